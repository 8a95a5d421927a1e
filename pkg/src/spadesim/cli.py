"""Command-line front end tying the toolkit together.

Subcommands: probs, fisher-scan, bounds-scan, simulate, calibrate, figure,
experiment. Every parameter can come from a flat ``key = value`` config file
(--config) with command-line flags taking precedence. Exit codes: 0 success,
2 configuration error, 3 numerical failure, 4 unidentifiable parameter or
signal below the noise floor.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import io
from .bounds import sweep_bounds
from .calibration import fit_linear, fit_quadratic, invert_curve
from .config import (
    REQUIRED,
    Param,
    parse_bool,
    parse_float_list,
    resolve_output_path,
    resolve_params,
)
from .errors import (
    BelowNoiseFloorError,
    ConfigError,
    DivergentSensitivityError,
    EstimationError,
    FitError,
    InvalidCurveError,
    NumericalFailureError,
    ParameterDomainError,
    SpadeSimError,
    UnidentifiableError,
)
from .experiment import EXPERIMENT_KINDS, FIGURES, ExperimentSettings, figure_rows, run_experiment
from .fisher import QuadratureConfig, fisher_d, fisher_eps
from .model import (
    Misalignment,
    NoiseModel,
    SceneParams,
    apply_crosstalk,
    exact_mode_probs,
    subrayleigh_probs,
)
from .montecarlo import JITTER_MODES, PROBABILITY_MODELS, AcquisitionConfig, estimate_f1, sample_counts

__all__ = ["main"]


_SCENE_PARAMS = [
    Param("eta", float, 1.0, "detection probability per temporal mode"),
    Param("epsilon", float, 0.1, "relative intensity of the weaker source"),
    Param("w0_um", float, 300.0, "PSF / sorter waist in micrometres"),
]

PARAMS = {
    "probs": _SCENE_PARAMS
    + [
        Param("d_x_um", float, None, "weak-source x displacement in micrometres"),
        Param("d_y_um", float, None, "weak-source y displacement in micrometres"),
        Param("d_a", float, None, "dimensionless on-axis separation d / w0 (alternative to d_x_um)"),
        Param("delta_x_um", float, 0.0, "sorter x misalignment in micrometres"),
        Param("delta_y_um", float, 0.0, "sorter y misalignment in micrometres"),
        Param("sigma_um", float, 0.0, "RMS stochastic misalignment in micrometres"),
        Param("chi", float, 0.0, "crosstalk fraction"),
        Param("out", str, None, "optional CSV output path"),
        Param("outdir", str, None, "output directory (default $SPADESIM_OUTDIR or cwd)"),
    ],
    "fisher-scan": [
        Param("eta", float, 1.0),
        Param("epsilon", float, 0.1),
        Param("d_a_min", float, 1e-3),
        Param("d_a_max", float, 10.0),
        Param("points", int, 41),
        Param("log_grid", parse_bool, True, "log-spaced separations"),
        Param("which", str, "both", "information to compute", choices=("d", "eps", "both")),
        Param("half_width", float, 8.0, "quadrature half-width in w0 units"),
        Param("rel_tol", float, 1e-8, "quadrature relative tolerance"),
        Param("out", str, None, "CSV output path (stdout when omitted)"),
        Param("outdir", str, None),
    ],
    "bounds-scan": [
        Param("axis", str, "d_a", "swept variable", choices=("d_a", "eps")),
        Param("grid_min", float, None, "sweep start (default 0.05 for d_a, 0.01 for eps)"),
        Param("grid_max", float, None, "sweep end (default 2.0 for d_a, 0.5 for eps)"),
        Param("grid_points", int, None, "sweep length (default 40 for d_a, 50 for eps)"),
        Param("epsilon", float, 0.01, "relative intensity (d_a axis)"),
        Param("d_a", float, 0.5, "separation in w0 units (eps axis)"),
        Param("chi_list", parse_float_list, None, "crosstalk values, comma separated"),
        Param("sigma_w0", float, 0.0, "RMS misalignment in w0 units"),
        Param("eta_n", float, 4e4, "detected-photon budget (rescaled curves do not depend on it)"),
        Param("out", str, None, "CSV output path (stdout when omitted)"),
        Param("outdir", str, None),
    ],
    "figure": [
        Param("eps_list", parse_float_list, None, "fig1 intensity-ratio curves"),
        Param("epsilon", float, None, "fig2 relative intensity"),
        Param("d_a", float, None, "fig3 separation in w0 units"),
        Param("chi_list", parse_float_list, None, "fig2/fig3 crosstalk curves"),
        Param("grid_min", float, None),
        Param("grid_max", float, None),
        Param("grid_points", int, None),
        Param("out", str, None, "CSV output path (default <name>.csv)"),
        Param("outdir", str, None),
    ],
    "simulate": [
        Param("eta", float, 0.01),
        Param("epsilon", float, 0.1),
        Param("w0_um", float, 300.0),
        Param("d_x_um", float, 100.0),
        Param("d_y_um", float, 0.0),
        Param("sigma_um", float, 0.0),
        Param("chi", float, 0.0035),
        Param("n_slots", int, 40000, "temporal modes per measure"),
        Param("n_measures", int, 100, "repeated measures per acquisition"),
        Param("jitter_mode", str, "per-measure-random", choices=JITTER_MODES),
        Param("master_seed", int, 20260810),
        Param("dark_rate", float, 0.0, "spurious-count probability per slot per bright channel"),
        Param("model", str, "exact", "probability model", choices=PROBABILITY_MODELS),
        Param("split_bright", parse_bool, False, "record the two bright channels separately"),
        Param("offset_x_um", float, 0.0, "fixed-offset jitter: x offset"),
        Param("offset_y_um", float, 0.0, "fixed-offset jitter: y offset"),
        Param("workers", int, 1, "thread count (results are worker-independent)"),
        Param("out", str, "counts.csv", "CSV output path"),
        Param("outdir", str, None),
    ],
    "calibrate": [
        Param("input", str, REQUIRED, "sweep CSV (control,measure_index,n0,n1)"),
        Param("kind", str, "quadratic", "calibration model", choices=("quadratic", "linear")),
        Param("weighted", parse_bool, True, "weight points by 1/delta_n1^2"),
        Param("out_curve", str, "curve.json"),
        Param("out_residuals", str, "residuals.csv"),
        Param("invert_n1", float, None, "invert the fitted curve at this observed count"),
        Param("branch", int, 1, "sign branch for quadratic inversion (+1 or -1)"),
        Param("outdir", str, None),
    ],
    "experiment": [
        Param("eta", float, 0.01),
        Param("epsilon", float, 0.1, "relative intensity (d-sweep)"),
        Param("w0_um", float, 300.0),
        Param("d_min_um", float, -200.0),
        Param("d_max_um", float, 200.0),
        Param("d_step_um", float, 20.0),
        Param("d_um", float, 150.0, "fixed separation (eps-sweep)"),
        Param("eps_min", float, 0.025),
        Param("eps_max", float, 0.5),
        Param("eps_step", float, 0.025),
        Param("n_measures", int, 100),
        Param("eta_n", float, None, "photon budget per point (default 4e4 d-sweep, 8e4 eps-sweep)"),
        Param("eta_n_low", float, 4e4, "lower bracketing budget for the DI curves"),
        Param("eta_n_high", float, 8e4, "upper bracketing budget for the DI curves"),
        Param("chi", float, 0.0035),
        Param("sigma_um", float, 0.0),
        Param("dark_rate", float, 0.0),
        Param("master_seed", int, 20260810),
        Param("model", str, "exact", "probability model", choices=PROBABILITY_MODELS),
        Param("jitter_mode", str, "per-measure-random", choices=JITTER_MODES),
        Param("weighted", parse_bool, True),
        Param("workers", int, 1),
        Param("prefix", str, None, "output file prefix (default from the sweep kind)"),
        Param("outdir", str, None),
    ],
}

_POSITIONALS = {
    "figure": ("name", FIGURES, "figure to reproduce"),
    "experiment": ("kind", EXPERIMENT_KINDS, "sweep to run"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spadesim",
        description="Sub-Rayleigh two-source simulation and estimation toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command, params in PARAMS.items():
        p = sub.add_parser(command, help=f"{command} command")
        if command in _POSITIONALS:
            name, choices, help_text = _POSITIONALS[command]
            p.add_argument(name, choices=choices, help=help_text)
        p.add_argument("--config", default=None, help="flat key = value configuration file")
        for param in params:
            kwargs = {"default": None, "help": param.help, "dest": param.name}
            if param.type is not str:
                kwargs["type"] = param.type
            if param.choices is not None:
                kwargs["choices"] = param.choices
            p.add_argument("--" + param.name.replace("_", "-"), **kwargs)
    return parser


def _emit_rows(cfg, rows, header, command_meta):
    """Write table rows to --out (CSV) or stdout."""
    meta = dict(command_meta)
    if cfg.get("out"):
        path = resolve_output_path(cfg["out"], cfg.get("outdir"))
        io.write_table_csv(path, header, rows, meta)
        print(f"wrote {path}")
    else:
        for key in sorted(meta):
            print(f"# {key} = {io.format_value(meta[key])}")
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else io.format_value(v) for v in row])


def _meta(command, cfg, skip=("out", "outdir", "config")) -> dict:
    meta = {k: v for k, v in cfg.items() if k not in skip and v is not None}
    meta["command"] = command
    return meta


def _cmd_probs(cfg) -> int:
    if cfg["d_a"] is not None and (cfg["d_x_um"] is not None or cfg["d_y_um"] is not None):
        raise ConfigError("give either d_a or d_x_um/d_y_um, not both")
    w0 = cfg["w0_um"]
    if w0 <= 0:
        raise ConfigError(f"w0_um must be positive, got {w0}")
    if cfg["d_a"] is not None:
        dax, day = cfg["d_a"], 0.0
    else:
        dax = (cfg["d_x_um"] or 0.0) / w0
        day = (cfg["d_y_um"] or 0.0) / w0
    # everything below is in waist units, so micrometre and dimensionless
    # inputs describing the same scene produce identical output
    scene = SceneParams(cfg["eta"], cfg["epsilon"], dax, day, 1.0)
    mis = Misalignment(cfg["delta_x_um"] / w0, cfg["delta_y_um"] / w0)
    noise = NoiseModel(cfg["sigma_um"] / w0, cfg["chi"])
    probs = exact_mode_probs(scene, mis)
    mixed = apply_crosstalk((probs.p00, probs.p1), noise.chi)
    sub = subrayleigh_probs(scene, noise)
    sub_mixed = apply_crosstalk(sub, noise.chi)
    rows = [
        ("exact_p00", probs.p00),
        ("exact_p01", probs.p01),
        ("exact_p10", probs.p10),
        ("exact_p1", probs.p1),
        ("exact_p_none", probs.p_none),
        ("exact_crosstalk_p0", mixed[0]),
        ("exact_crosstalk_p1", mixed[1]),
        ("subrayleigh_p0", sub[0]),
        ("subrayleigh_p1", sub[1]),
        ("subrayleigh_crosstalk_p0", sub_mixed[0]),
        ("subrayleigh_crosstalk_p1", sub_mixed[1]),
    ]
    for name, value in rows:
        print(f"{name} = {io.format_value(value)}")
    if cfg["out"]:
        path = resolve_output_path(cfg["out"], cfg.get("outdir"))
        io.write_table_csv(path, ["quantity", "value"], rows, _meta("probs", cfg))
        print(f"wrote {path}")
    return 0


def _cmd_fisher_scan(cfg) -> int:
    if cfg["points"] < 1 or cfg["d_a_min"] <= 0 and cfg["log_grid"]:
        raise ConfigError("log grids need d_a_min > 0 and points >= 1")
    if cfg["log_grid"]:
        grid = np.geomspace(cfg["d_a_min"], cfg["d_a_max"], cfg["points"])
    else:
        grid = np.linspace(cfg["d_a_min"], cfg["d_a_max"], cfg["points"])
    quad_cfg = QuadratureConfig(half_width=cfg["half_width"], rel_tol=cfg["rel_tol"])
    rows = []
    if cfg["which"] in ("d", "both"):
        for da in grid:
            scene = SceneParams(cfg["eta"], cfg["epsilon"], float(da), 0.0, 1.0)
            rows.append((float(da), "F_d", fisher_d(scene, quad_cfg).value))
    if cfg["which"] in ("eps", "both"):
        for da in grid:
            scene = SceneParams(cfg["eta"], cfg["epsilon"], float(da), 0.0, 1.0)
            rows.append((float(da), "F_eps", fisher_eps(scene, quad_cfg).value))
    _emit_rows(cfg, rows, ["x", "series", "y"], _meta("fisher-scan", cfg))
    return 0


def _cmd_bounds_scan(cfg) -> int:
    axis = cfg["axis"]
    lo = cfg["grid_min"] if cfg["grid_min"] is not None else (0.05 if axis == "d_a" else 0.01)
    hi = cfg["grid_max"] if cfg["grid_max"] is not None else (2.0 if axis == "d_a" else 0.5)
    n = cfg["grid_points"] if cfg["grid_points"] is not None else (40 if axis == "d_a" else 50)
    chis = cfg["chi_list"] if cfg["chi_list"] is not None else (
        (0.0, 0.001, 0.01) if axis == "d_a" else (0.0, 0.001, 0.005)
    )
    grid = np.linspace(lo, hi, n)
    if axis == "d_a":
        scene = SceneParams(1.0, cfg["epsilon"], float(grid[0]), 0.0, 1.0)
    else:
        scene = SceneParams(1.0, float(grid[0]), cfg["d_a"], 0.0, 1.0)
    noises = [NoiseModel(sigma=cfg["sigma_w0"], chi=c) for c in chis]
    rows = sweep_bounds(axis, grid, scene, noises, cfg["eta_n"])
    meta = _meta("bounds-scan", cfg)
    meta.update({"grid_min": lo, "grid_max": hi, "grid_points": n, "chi_list": chis})
    _emit_rows(cfg, rows, ["x", "series", "y"], meta)
    return 0


def _cmd_figure(cfg, name) -> int:
    overrides = {}
    for key in ("eps_list", "epsilon", "d_a", "chi_list"):
        if cfg[key] is not None:
            overrides[key] = cfg[key]
    grid_keys = ("grid_min", "grid_max", "grid_points")
    if any(cfg[k] is not None for k in grid_keys):
        if not all(cfg[k] is not None for k in grid_keys):
            raise ConfigError("grid overrides need grid_min, grid_max and grid_points together")
        space = np.geomspace if name == "fig1" else np.linspace
        overrides["grid"] = space(cfg["grid_min"], cfg["grid_max"], cfg["grid_points"])
    try:
        rows, params = figure_rows(name, **overrides)
    except ParameterDomainError as exc:
        raise ConfigError(str(exc)) from None
    meta = {"command": "figure", "figure": name}
    meta.update(params)
    out = cfg["out"] or f"{name}.csv"
    path = resolve_output_path(out, cfg.get("outdir"))
    io.write_curve_csv(path, rows, meta)
    print(f"wrote {path}")
    return 0


def _cmd_simulate(cfg) -> int:
    scene = SceneParams(cfg["eta"], cfg["epsilon"], cfg["d_x_um"], cfg["d_y_um"], cfg["w0_um"])
    noise = NoiseModel(sigma=cfg["sigma_um"], chi=cfg["chi"])
    acq = AcquisitionConfig(
        n_slots=cfg["n_slots"],
        n_measures=cfg["n_measures"],
        jitter_mode=cfg["jitter_mode"],
        master_seed=cfg["master_seed"],
        dark_rate=cfg["dark_rate"],
        probability_model=cfg["model"],
        offset=(cfg["offset_x_um"], cfg["offset_y_um"]),
        split_bright=cfg["split_bright"],
    )
    record = sample_counts(scene, noise, acq, workers=cfg["workers"])
    print(f"n0 = {record.n0}  n1 = {record.n1}  (slots per measure = {acq.n_slots})")
    try:
        est = estimate_f1(record)
        print(
            f"f1 = {io.format_value(est.f1)}  delta_f1 = {io.format_value(est.delta_f1)}"
            + ("  [degenerate]" if est.degenerate else "")
        )
    except EstimationError as exc:
        print(f"f1 undefined: {exc}")
    path = resolve_output_path(cfg["out"], cfg.get("outdir"))
    io.write_record_csv(path, record, _meta("simulate", cfg))
    print(f"wrote {path}")
    return 0


def _cmd_calibrate(cfg) -> int:
    sweep, _ = io.read_sweep_csv(cfg["input"])
    if cfg["kind"] == "quadratic":
        curve = fit_quadratic(sweep, weighted=cfg["weighted"])
    else:
        curve = fit_linear(sweep, weighted=cfg["weighted"])
    print(
        f"kind = {curve.kind}  a1 = {curve.intercept:.6g} +- {curve.intercept_stderr:.3g}"
        f"  b1 = {curve.slope:.6g} +- {curve.slope_stderr:.3g}"
        f"  reduced_chisq = {curve.reduced_chisq:.4g}"
    )
    meta = _meta("calibrate", cfg)
    curve_path = resolve_output_path(cfg["out_curve"], cfg.get("outdir"))
    io.write_curve_json(curve_path, curve, meta)
    fitted = curve.predict(sweep.control)
    rows = list(
        zip(
            sweep.control.tolist(),
            sweep.n1.tolist(),
            fitted.tolist(),
            curve.residuals.tolist(),
            sweep.delta_n1.tolist(),
        )
    )
    resid_path = resolve_output_path(cfg["out_residuals"], cfg.get("outdir"))
    io.write_table_csv(resid_path, ["control", "n1", "fitted", "residual", "delta_n1"], rows, meta)
    print(f"wrote {curve_path}")
    print(f"wrote {resid_path}")
    if cfg["invert_n1"] is not None:
        estimate = invert_curve(curve, cfg["invert_n1"], branch=cfg["branch"])
        print(f"inverted control estimate = {io.format_value(estimate)}")
    return 0


def _cmd_experiment(cfg, kind) -> int:
    eta_n = cfg["eta_n"]
    if eta_n is None:
        eta_n = 4e4 if kind == "d-sweep" else 8e4
    settings = ExperimentSettings(
        kind=kind,
        eta=cfg["eta"],
        epsilon=cfg["epsilon"],
        w0_um=cfg["w0_um"],
        d_min_um=cfg["d_min_um"],
        d_max_um=cfg["d_max_um"],
        d_step_um=cfg["d_step_um"],
        d_um=cfg["d_um"],
        eps_min=cfg["eps_min"],
        eps_max=cfg["eps_max"],
        eps_step=cfg["eps_step"],
        n_measures=cfg["n_measures"],
        eta_n=eta_n,
        eta_n_low=cfg["eta_n_low"],
        eta_n_high=cfg["eta_n_high"],
        chi=cfg["chi"],
        sigma_um=cfg["sigma_um"],
        dark_rate=cfg["dark_rate"],
        master_seed=cfg["master_seed"],
        probability_model=cfg["model"],
        jitter_mode=cfg["jitter_mode"],
        weighted=cfg["weighted"],
        workers=cfg["workers"],
    )
    result = run_experiment(settings)
    meta = _meta("experiment", cfg)
    meta.update(
        {
            "kind": kind,
            "eta_n": eta_n,
            "n_slots": settings.n_slots,
            "realized_eta_n": settings.realized_eta_n,
        }
    )
    prefix = cfg["prefix"] or kind.replace("-", "_")
    outdir = cfg.get("outdir")
    sweep_path = resolve_output_path(f"{prefix}_sweep.csv", outdir)
    io.write_sweep_csv(sweep_path, result.control, result.records, meta)
    curve_path = resolve_output_path(f"{prefix}_curve.json", outdir)
    io.write_curve_json(curve_path, result.curve, meta)
    fitted = result.curve.predict(result.sweep.control)
    resid_rows = list(
        zip(
            result.control.tolist(),
            result.sweep.n1.tolist(),
            fitted.tolist(),
            result.curve.residuals.tolist(),
            result.sweep.delta_n1.tolist(),
            result.estimates.tolist(),
            result.empirical_error.tolist(),
        )
    )
    resid_path = resolve_output_path(f"{prefix}_residuals.csv", outdir)
    io.write_table_csv(
        resid_path,
        ["control", "n1", "fitted", "residual", "delta_n1", "estimate", "estimate_error"],
        resid_rows,
        meta,
    )
    comparison_path = resolve_output_path(f"{prefix}_comparison.csv", outdir)
    io.write_comparison_csv(comparison_path, result.comparison_rows, meta)
    curve = result.curve
    print(
        f"{kind}: a1 = {curve.intercept:.6g} +- {curve.intercept_stderr:.3g}"
        f"  b1 = {curve.slope:.6g} +- {curve.slope_stderr:.3g}"
        f"  reduced_chisq = {curve.reduced_chisq:.4g}"
    )
    for path in (sweep_path, curve_path, resid_path, comparison_path):
        print(f"wrote {path}")
    return 0


def _run(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = resolve_params(PARAMS[args.command], args, args.config)
    if args.command == "probs":
        return _cmd_probs(cfg)
    if args.command == "fisher-scan":
        return _cmd_fisher_scan(cfg)
    if args.command == "bounds-scan":
        return _cmd_bounds_scan(cfg)
    if args.command == "figure":
        return _cmd_figure(cfg, args.name)
    if args.command == "simulate":
        return _cmd_simulate(cfg)
    if args.command == "calibrate":
        return _cmd_calibrate(cfg)
    if args.command == "experiment":
        return _cmd_experiment(cfg, args.kind)
    raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    try:
        return _run(argv)
    except (ConfigError, ParameterDomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalFailureError, FitError, InvalidCurveError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (
        UnidentifiableError,
        BelowNoiseFloorError,
        DivergentSensitivityError,
        EstimationError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except SpadeSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
