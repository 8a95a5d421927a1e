"""End-to-end simulated experiments and figure-reproduction pipelines.

An experiment sweeps a control parameter (source separation or relative
intensity), simulates the photon counting at every point, fits the
calibration curve, inverts it back, propagates the count uncertainty, and
tabulates the result against the closed-form mode-sorting bound and the
direct-imaging bounds at two bracketing photon budgets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import calibration
from .bounds import spade_error_d, spade_error_eps, sweep_bounds
from .errors import (
    BelowCalibrationFloorError,
    DivergentSensitivityError,
    ParameterDomainError,
    UnidentifiableError,
)
from .fisher import QuadratureConfig, fisher_d, fisher_eps
from .model import NoiseModel, SceneParams
from .montecarlo import AcquisitionConfig, CountRecord, sample_counts

__all__ = [
    "EXPERIMENT_KINDS",
    "ExperimentSettings",
    "ExperimentResult",
    "run_experiment",
    "figure_rows",
    "FIGURES",
]

EXPERIMENT_KINDS = ("d-sweep", "eps-sweep")


@dataclass(frozen=True)
class ExperimentSettings:
    """Parameters of a simulated calibration experiment.

    ``eta_n`` is the target detected-photon budget per sweep point; the slot
    count per measure is derived from it. ``eta_n_low`` / ``eta_n_high`` are
    the bracketing budgets used only for the direct-imaging theory curves.
    Lengths are in micrometres.
    """

    kind: str = "d-sweep"
    eta: float = 0.01
    epsilon: float = 0.1
    w0_um: float = 300.0
    d_min_um: float = -200.0
    d_max_um: float = 200.0
    d_step_um: float = 20.0
    d_um: float = 150.0
    eps_min: float = 0.025
    eps_max: float = 0.5
    eps_step: float = 0.025
    n_measures: int = 100
    eta_n: float = 4e4
    eta_n_low: float = 4e4
    eta_n_high: float = 8e4
    chi: float = 0.0035
    sigma_um: float = 0.0
    dark_rate: float = 0.0
    master_seed: int = 20260810
    probability_model: str = "exact"
    jitter_mode: str = "per-measure-random"
    weighted: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ParameterDomainError(
                f"kind must be one of {EXPERIMENT_KINDS}, got {self.kind!r}"
            )
        if self.eta_n < 1.0:
            raise ParameterDomainError(f"eta_n must be >= 1, got {self.eta_n}")

    @property
    def n_slots(self) -> int:
        """Slots per measure so that eta * n_slots * n_measures ~ eta_n."""
        n = round(self.eta_n / (self.eta * self.n_measures))
        return max(int(n), 1)

    @property
    def realized_eta_n(self) -> float:
        """Photon budget actually simulated after slot-count rounding."""
        return self.eta * self.n_slots * self.n_measures


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    """Everything an experiment produces, ready for serialization."""

    settings: ExperimentSettings
    control: np.ndarray
    records: list[CountRecord]
    sweep: calibration.SweepData
    curve: calibration.CalibrationCurve
    estimates: np.ndarray
    empirical_error: np.ndarray
    spade_bound: np.ndarray
    di_bound_low: np.ndarray
    di_bound_high: np.ndarray

    @property
    def comparison_rows(self):
        """Rows (control, empirical error, spade bound, DI low, DI high)."""
        return list(
            zip(
                self.control.tolist(),
                self.empirical_error.tolist(),
                self.spade_bound.tolist(),
                self.di_bound_low.tolist(),
                self.di_bound_high.tolist(),
            )
        )


def _point_seed(master_seed: int, index: int) -> int:
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    if step <= 0.0 or hi < lo:
        raise ParameterDomainError(f"invalid grid [{lo}, {hi}] step {step}")
    count = int(round((hi - lo) / step)) + 1
    grid = lo + step * np.arange(count)
    return grid[grid <= hi + 1e-9 * abs(step)]


def _simulate_points(scenes, noise, settings) -> list[CountRecord]:
    records = []
    for k, scene in enumerate(scenes):
        acq = AcquisitionConfig(
            n_slots=settings.n_slots,
            n_measures=settings.n_measures,
            jitter_mode=settings.jitter_mode,
            master_seed=_point_seed(settings.master_seed, k),
            dark_rate=settings.dark_rate,
            probability_model=settings.probability_model,
        )
        records.append(sample_counts(scene, noise, acq, workers=settings.workers))
    return records


def run_experiment(settings: ExperimentSettings) -> ExperimentResult:
    """Simulate, calibrate, invert and compare one full sweep."""
    noise = NoiseModel(sigma=settings.sigma_um, chi=settings.chi)
    quad_cfg = QuadratureConfig()
    if settings.kind == "d-sweep":
        d_um = _grid(settings.d_min_um, settings.d_max_um, settings.d_step_um)
        control = d_um / settings.w0_um
        scenes = [
            SceneParams(settings.eta, settings.epsilon, d_x=d, d_y=0.0, w0=settings.w0_um)
            for d in d_um
        ]
    else:
        control = _grid(settings.eps_min, settings.eps_max, settings.eps_step)
        scenes = [
            SceneParams(settings.eta, float(e), d_x=settings.d_um, d_y=0.0, w0=settings.w0_um)
            for e in control
        ]
    records = _simulate_points(scenes, noise, settings)
    sweep = calibration.SweepData.from_records(control, records)
    if settings.kind == "d-sweep":
        curve = calibration.fit_quadratic(sweep, weighted=settings.weighted)
    else:
        curve = calibration.fit_linear(sweep, weighted=settings.weighted)

    totals = sweep.n1
    deltas = sweep.delta_n1
    estimates = np.full(control.size, math.nan)
    empirical = np.full(control.size, math.nan)
    for k, c in enumerate(control):
        branch = -1 if c < 0.0 else 1
        try:
            estimates[k] = calibration.invert_curve(curve, float(totals[k]), branch=branch)
        except BelowCalibrationFloorError:
            pass
        try:
            empirical[k] = calibration.propagate_uncertainty(curve, float(c), float(deltas[k]))
        except DivergentSensitivityError:
            pass

    n_modes = settings.n_slots * settings.n_measures
    spade = np.empty(control.size)
    di_low = np.empty(control.size)
    di_high = np.empty(control.size)
    fisher_cache: dict[float, float] = {}
    for k, (c, scene) in enumerate(zip(control, scenes)):
        if settings.kind == "d-sweep":
            try:
                spade[k] = spade_error_d(scene, noise, n_modes) / settings.w0_um
            except UnidentifiableError:
                spade[k] = math.inf
            key = abs(float(c))
            if key not in fisher_cache:
                unit = SceneParams(1.0, settings.epsilon, d_x=key, d_y=0.0, w0=1.0)
                fisher_cache[key] = fisher_d(unit, quad_cfg).value
            info = fisher_cache[key]
        else:
            spade[k] = spade_error_eps(scene, noise, n_modes)
            unit = SceneParams(1.0, float(c), d_x=settings.d_um / settings.w0_um, d_y=0.0, w0=1.0)
            info = fisher_eps(unit, quad_cfg).value
        di_low[k] = math.inf if info <= 0.0 else 1.0 / math.sqrt(settings.eta_n_low * info)
        di_high[k] = math.inf if info <= 0.0 else 1.0 / math.sqrt(settings.eta_n_high * info)

    return ExperimentResult(
        settings=settings,
        control=control,
        records=records,
        sweep=sweep,
        curve=curve,
        estimates=estimates,
        empirical_error=empirical,
        spade_bound=spade,
        di_bound_low=di_low,
        di_bound_high=di_high,
    )


# Figure-reproduction defaults: curve sets, grids and fixed parameters.
FIGURES = ("fig1", "fig2", "fig3")

_FIG1_EPS = (0.01, 0.1, 0.5)
_FIG2_CHIS = (0.0, 0.001, 0.01)
_FIG3_CHIS = (0.0, 0.001, 0.005)


def figure_rows(name: str, **overrides):
    """Data rows (x, series, y) for one of the canned figures.

    fig1: direct-imaging Fisher information for d, rescaled by w0^2 / eps /
    eta, versus d_a for several eps. fig2: rescaled error on d versus d_a for
    direct imaging and mode sorting at several crosstalk levels. fig3: the
    same comparison for epsilon versus epsilon at fixed separation.
    Recognized overrides: eps_list (fig1), epsilon (fig2), d_a (fig3),
    chi_list (fig2/fig3), grid (any).
    """
    allowed = {
        "fig1": {"eps_list", "grid"},
        "fig2": {"epsilon", "chi_list", "grid"},
        "fig3": {"d_a", "chi_list", "grid"},
    }
    if name not in FIGURES:
        raise ParameterDomainError(f"unknown figure {name!r}; choose from {FIGURES}")
    unknown = set(overrides) - allowed[name] - {"quad_cfg"}
    if unknown:
        raise ParameterDomainError(f"unsupported overrides for {name}: {sorted(unknown)}")
    quad_cfg = overrides.get("quad_cfg")

    if name == "fig1":
        eps_list = tuple(overrides.get("eps_list", _FIG1_EPS))
        grid = np.asarray(overrides.get("grid", np.geomspace(1e-3, 10.0, 61)), dtype=float)
        rows = []
        for eps in eps_list:
            for da in grid:
                scene = SceneParams(1.0, float(eps), d_x=float(da), d_y=0.0, w0=1.0)
                rows.append((float(da), f"eps={eps:g}", fisher_d(scene, quad_cfg).value / eps))
        params = {"eps_list": eps_list, "grid_min": grid[0], "grid_max": grid[-1], "grid_points": grid.size}
        return rows, params

    if name == "fig2":
        epsilon = float(overrides.get("epsilon", 0.01))
        chis = tuple(overrides.get("chi_list", _FIG2_CHIS))
        grid = np.asarray(overrides.get("grid", np.linspace(0.05, 2.0, 40)), dtype=float)
        scene = SceneParams(1.0, epsilon, d_x=grid[0], d_y=0.0, w0=1.0)
        noises = [NoiseModel(sigma=0.0, chi=c) for c in chis]
        rows = sweep_bounds("d_a", grid, scene, noises, 4e4, quad_cfg)
        params = {"epsilon": epsilon, "chi_list": chis, "sigma": 0.0,
                  "grid_min": grid[0], "grid_max": grid[-1], "grid_points": grid.size}
        return rows, params

    d_a = float(overrides.get("d_a", 0.5))
    chis = tuple(overrides.get("chi_list", _FIG3_CHIS))
    grid = np.asarray(overrides.get("grid", np.linspace(0.01, 0.5, 50)), dtype=float)
    scene = SceneParams(1.0, float(grid[0]), d_x=d_a, d_y=0.0, w0=1.0)
    noises = [NoiseModel(sigma=0.0, chi=c) for c in chis]
    rows = sweep_bounds("eps", grid, scene, noises, 4e4, quad_cfg)
    params = {"d_a": d_a, "chi_list": chis, "sigma": 0.0,
              "grid_min": grid[0], "grid_max": grid[-1], "grid_points": grid.size}
    return rows, params
