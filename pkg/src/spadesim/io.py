"""CSV and JSON schemas shared by the command-line harness.

Every CSV starts with comment lines carrying the fully resolved
configuration (including the master seed where the command is stochastic),
then a header row, then data. Values are written with shortest round-trip
float formatting, so re-running a command with the same configuration
reproduces the file byte for byte.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .calibration import CalibrationCurve, SweepData
from .errors import ConfigError
from .montecarlo import CountRecord

__all__ = [
    "format_value",
    "write_table_csv",
    "write_curve_csv",
    "write_record_csv",
    "write_sweep_csv",
    "write_comparison_csv",
    "write_curve_json",
    "read_sweep_csv",
]


def format_value(value) -> str:
    """Deterministic text form: shortest round-trip for floats."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(value, (tuple, list, np.ndarray)):
        return ",".join(format_value(v) for v in value)
    return str(value)


def _open_writer(path, meta: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fh = path.open("w", newline="", encoding="utf-8")
    for key in sorted(meta):
        fh.write(f"# {key} = {format_value(meta[key])}\n")
    return fh, csv.writer(fh, lineterminator="\n")


def write_table_csv(path, header, rows, meta: dict) -> None:
    """Generic table with the standard comment-metadata preamble."""
    fh, writer = _open_writer(path, meta)
    with fh:
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([v if isinstance(v, str) else format_value(v) for v in row])


def write_curve_csv(path, rows, meta: dict) -> None:
    """Curve rows (x, series label, y) under an x,series,y header."""
    write_table_csv(path, ["x", "series", "y"], rows, meta)


def write_record_csv(path, record: CountRecord, meta: dict) -> None:
    """One acquisition: a row (index, n0, n1, substream_id) per measure."""
    fh, writer = _open_writer(path, meta)
    with fh:
        writer.writerow(["index", "n0", "n1", "substream_id"])
        for i in range(record.n_measures):
            writer.writerow(
                [
                    i,
                    int(record.n0_per_measure[i]),
                    int(record.n1_per_measure[i]),
                    int(record.substream_ids[i]),
                ]
            )


def write_sweep_csv(path, control, records, meta: dict) -> None:
    """Sweep data: a row (control, measure_index, n0, n1) per measure."""
    fh, writer = _open_writer(path, meta)
    with fh:
        writer.writerow(["control", "measure_index", "n0", "n1"])
        for c, record in zip(control, records):
            for i in range(record.n_measures):
                writer.writerow(
                    [
                        format_value(float(c)),
                        i,
                        int(record.n0_per_measure[i]),
                        int(record.n1_per_measure[i]),
                    ]
                )


def write_comparison_csv(path, rows, meta: dict) -> None:
    """Comparison of the empirical error against the theory bounds."""
    write_table_csv(
        path,
        ["control", "empirical_error", "spade_bound", "di_bound_low_budget", "di_bound_high_budget"],
        rows,
        meta,
    )


def write_curve_json(path, curve: CalibrationCurve, meta: dict) -> None:
    """Fitted calibration curve with covariance and residuals."""
    payload = {
        "kind": curve.kind,
        "intercept": curve.intercept,
        "slope": curve.slope,
        "intercept_stderr": curve.intercept_stderr,
        "slope_stderr": curve.slope_stderr,
        "covariance": np.asarray(curve.covariance).tolist(),
        "residuals": np.asarray(curve.residuals).tolist(),
        "reduced_chisq": None if math.isnan(curve.reduced_chisq) else curve.reduced_chisq,
        "weighted": bool(curve.weighted),
        "config": {k: format_value(v) for k, v in sorted(meta.items())},
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_sweep_csv(path):
    """Read a sweep CSV back into (SweepData, n0 count matrix).

    Accepts the schema written by :func:`write_sweep_csv`; comment lines are
    ignored. Points must carry the same number of measures.
    """
    path = Path(path)
    per_control: dict[float, list[tuple[int, int]]] = {}
    order: list[float] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = None
        for lineno, row in enumerate(reader, start=1):
            if not row or row[0].startswith("#"):
                continue
            if header is None:
                header = row
                if header[:4] != ["control", "measure_index", "n0", "n1"]:
                    raise ConfigError(
                        f"{path}:{lineno}: expected header control,measure_index,n0,n1"
                    )
                continue
            try:
                control = float(row[0])
                n0 = int(row[2])
                n1 = int(row[3])
            except (IndexError, ValueError) as exc:
                raise ConfigError(f"{path}:{lineno}: malformed sweep row: {exc}") from None
            if control not in per_control:
                per_control[control] = []
                order.append(control)
            per_control[control].append((n0, n1))
    if header is None or not order:
        raise ConfigError(f"{path}: no sweep data found")
    lengths = {len(v) for v in per_control.values()}
    if len(lengths) != 1:
        raise ConfigError(f"{path}: unequal measure counts across control values")
    controls = np.asarray(sorted(order), dtype=float)
    counts1 = np.array([[pair[1] for pair in per_control[c]] for c in controls], dtype=np.int64)
    counts0 = np.array([[pair[0] for pair in per_control[c]] for c in controls], dtype=np.int64)
    return SweepData(control=controls, counts=counts1), counts0
