"""Calibration-curve regression, inversion and uncertainty propagation.

A sweep records the total first-order-mode counts n1 against a control
parameter (dimensionless separation d_a or relative intensity epsilon). The
calibration model is quadratic in d_a (no linear term, by symmetry) or linear
in epsilon. Fits are weighted least squares with per-point weights
1 / delta_n1^2 whenever every uncertainty is positive, with an unweighted
fallback; coefficient covariance uses the supplied uncertainties as known
variances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BelowCalibrationFloorError,
    DivergentSensitivityError,
    FitError,
    InvalidCurveError,
    ParameterDomainError,
)

__all__ = [
    "QUADRATIC_IN_DA",
    "LINEAR_IN_EPS",
    "SweepData",
    "CalibrationCurve",
    "fit_quadratic",
    "fit_linear",
    "invert_curve",
    "propagate_uncertainty",
]

QUADRATIC_IN_DA = "quadratic-in-d_a"
LINEAR_IN_EPS = "linear-in-eps"


@dataclass(frozen=True, eq=False)
class SweepData:
    """Counts versus control parameter, one row of repeated measures per point.

    ``control`` must be strictly increasing. ``counts`` has shape
    (n_points, n_measures) and holds the per-measure n1 counts. The per-point
    uncertainty of the total is delta_n1 = std(n1_i, ddof=1) * sqrt(N_m).
    """

    control: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        control = np.asarray(self.control, dtype=float)
        counts = np.asarray(self.counts)
        if control.ndim != 1:
            raise ParameterDomainError("control must be one-dimensional")
        if counts.ndim != 2 or counts.shape[0] != control.size:
            raise ParameterDomainError(
                f"counts must have shape (n_points, n_measures), got {counts.shape}"
            )
        if counts.shape[1] < 2:
            raise ParameterDomainError("at least 2 measures per point are required")
        if np.any(np.diff(control) <= 0.0):
            raise ParameterDomainError("control values must be strictly increasing")
        if np.any(counts < 0):
            raise ParameterDomainError("counts must be non-negative")
        object.__setattr__(self, "control", control)
        object.__setattr__(self, "counts", np.asarray(counts, dtype=np.int64))

    @classmethod
    def from_records(cls, control, records) -> "SweepData":
        """Assemble a sweep from one CountRecord per control value."""
        return cls(control=np.asarray(control, dtype=float),
                   counts=np.stack([r.n1_per_measure for r in records]))

    @property
    def n_points(self) -> int:
        return self.control.size

    @property
    def n_measures(self) -> int:
        return self.counts.shape[1]

    @property
    def n1(self) -> np.ndarray:
        """Total n1 per control value."""
        return self.counts.sum(axis=1)

    @property
    def delta_n1(self) -> np.ndarray:
        """Uncertainty of the total: std of the per-measure counts times sqrt(N_m)."""
        return self.counts.std(axis=1, ddof=1) * math.sqrt(self.n_measures)


@dataclass(frozen=True, eq=False)
class CalibrationCurve:
    """Fitted calibration curve n1(control) with coefficient covariance.

    ``intercept`` and ``slope`` are the coefficients (a1, b1) of
    a1 + b1 * control^2 (quadratic kind) or a1 + b1 * control (linear kind).
    ``covariance`` is the 2x2 matrix in (intercept, slope) order and
    ``reduced_chisq`` the goodness-of-fit (weighted chi-square per degree of
    freedom, or residual variance for unweighted fits).
    """

    kind: str
    intercept: float
    slope: float
    covariance: np.ndarray
    residuals: np.ndarray
    reduced_chisq: float
    weighted: bool

    @property
    def intercept_stderr(self) -> float:
        return math.sqrt(max(self.covariance[0, 0], 0.0))

    @property
    def slope_stderr(self) -> float:
        return math.sqrt(max(self.covariance[1, 1], 0.0))

    def _regressor(self, control):
        c = np.asarray(control, dtype=float)
        return c**2 if self.kind == QUADRATIC_IN_DA else c

    def predict(self, control):
        """Fitted counts at the given control value(s)."""
        return self.intercept + self.slope * self._regressor(control)

    def derivative(self, control):
        """d n1 / d control of the fitted curve."""
        c = np.asarray(control, dtype=float)
        if self.kind == QUADRATIC_IN_DA:
            return 2.0 * self.slope * c
        return self.slope * np.ones_like(c)


def _least_squares(x, y, delta, weighted):
    use_weights = bool(weighted) and np.all(delta > 0.0)
    X = np.column_stack([np.ones_like(x), x])
    dof = x.size - 2
    if use_weights:
        w = 1.0 / delta**2
        A = X.T @ (X * w[:, None])
        b = X.T @ (w * y)
        try:
            cov = np.linalg.inv(A)
        except np.linalg.LinAlgError as exc:
            raise FitError(f"normal equations are singular: {exc}") from None
        beta = cov @ b
        resid = y - X @ beta
        chisq = float(np.sum(w * resid**2))
        reduced = chisq / dof if dof > 0 else math.nan
    else:
        beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
        if rank < 2:
            raise FitError("design matrix is rank deficient")
        resid = y - X @ beta
        rss = float(np.sum(resid**2))
        reduced = rss / dof if dof > 0 else math.nan
        scale = reduced if dof > 0 else 0.0
        cov = scale * np.linalg.inv(X.T @ X)
    return beta, cov, resid, reduced, use_weights


def fit_quadratic(sweep: SweepData, weighted: bool = True) -> CalibrationCurve:
    """Weighted least squares of n1 on control^2 (calibration in d_a).

    Requires at least 3 distinct |control| values; the model has no linear
    term since the counts are even in the separation.
    """
    if np.unique(np.abs(sweep.control)).size < 3:
        raise FitError("quadratic calibration needs >= 3 distinct |d_a| values")
    x = sweep.control**2
    beta, cov, resid, reduced, used = _least_squares(
        x, sweep.n1.astype(float), sweep.delta_n1, weighted
    )
    return CalibrationCurve(
        kind=QUADRATIC_IN_DA,
        intercept=float(beta[0]),
        slope=float(beta[1]),
        covariance=cov,
        residuals=resid,
        reduced_chisq=reduced,
        weighted=used,
    )


def fit_linear(sweep: SweepData, weighted: bool = True) -> CalibrationCurve:
    """Weighted least squares of n1 on the control value (calibration in epsilon)."""
    if np.unique(sweep.control).size < 2:
        raise FitError("linear calibration needs >= 2 distinct control values")
    beta, cov, resid, reduced, used = _least_squares(
        sweep.control, sweep.n1.astype(float), sweep.delta_n1, weighted
    )
    return CalibrationCurve(
        kind=LINEAR_IN_EPS,
        intercept=float(beta[0]),
        slope=float(beta[1]),
        covariance=cov,
        residuals=resid,
        reduced_chisq=reduced,
        weighted=used,
    )


def invert_curve(curve: CalibrationCurve, n1_observed: float, branch: int = 1) -> float:
    """Control-parameter estimate from an observed total count.

    For the quadratic kind the sign of the result is set by ``branch`` (+1 or
    -1), since the curve cannot distinguish the sign of the separation.
    """
    if branch not in (1, -1):
        raise ParameterDomainError(f"branch must be +1 or -1, got {branch}")
    if curve.kind == QUADRATIC_IN_DA:
        if curve.slope <= 0.0:
            raise InvalidCurveError(f"non-positive quadratic coefficient b1 = {curve.slope:g}")
        if n1_observed < curve.intercept:
            raise BelowCalibrationFloorError(
                f"observed n1 = {n1_observed:g} is below the calibration floor a1 = {curve.intercept:g}",
                radicand=(n1_observed - curve.intercept) / curve.slope,
            )
        return branch * math.sqrt((n1_observed - curve.intercept) / curve.slope)
    if curve.slope <= 0.0:
        raise InvalidCurveError(f"non-positive calibration slope b1 = {curve.slope:g}")
    return (n1_observed - curve.intercept) / curve.slope


def propagate_uncertainty(curve: CalibrationCurve, control_value: float, delta_n1: float) -> float:
    """Control-parameter uncertainty |d n1 / d control|^-1 * delta_n1.

    For the quadratic kind the derivative vanishes at control = 0, where the
    propagated uncertainty is undefined.
    """
    if delta_n1 < 0.0:
        raise ParameterDomainError(f"delta_n1 must be >= 0, got {delta_n1}")
    deriv = float(curve.derivative(control_value))
    if deriv == 0.0:
        raise DivergentSensitivityError(
            f"curve sensitivity vanishes at control = {control_value:g}; uncertainty undefined"
        )
    return delta_n1 / abs(deriv)
