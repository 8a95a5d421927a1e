"""Closed-form statistical error bounds for mode-sorted measurements.

The bounds follow from propagating the binomial uncertainty of the
first-order-mode detection frequency through the quadratic-order model, with
misalignment and crosstalk entering only through the effective variance
sigma^2 + 4 w0^2 chi. All bounds are one-standard-deviation errors and share
the eta * n detected-photon budget with the direct-imaging comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import ParameterDomainError, UnidentifiableError
from .fisher import QuadratureConfig, fisher_d, fisher_eps
from .model import NoiseModel, SceneParams, effective_noise

__all__ = [
    "BudgetParams",
    "spade_error_d",
    "spade_error_eps",
    "snr_gain",
    "sweep_bounds",
]


@dataclass(frozen=True)
class BudgetParams:
    """Temporal-mode count of an acquisition; eta * n is the photon budget."""

    n: float

    def __post_init__(self):
        if not self.n >= 1.0:
            raise ParameterDomainError(f"n must be >= 1, got {self.n}")

    def detected(self, eta: float) -> float:
        """Mean number of detected photons over the acquisition."""
        return eta * self.n


def _budget(n) -> float:
    if isinstance(n, BudgetParams):
        return float(n.n)
    n = float(n)
    if not n >= 1.0:
        raise ParameterDomainError(f"n must be >= 1, got {n}")
    return n


def spade_error_d(scene: SceneParams, noise: NoiseModel, n) -> float:
    """One-sigma error on the separation d from mode-sorted counting.

    Returns w0 * sqrt((sigma_eff^2 / (eps d^2) + 1) / (eta n eps)); without
    noise this reduces to w0 / sqrt(eta n eps), independent of d.
    """
    nn = _budget(n)
    if scene.d == 0.0:
        raise UnidentifiableError("separation is unidentifiable at d = 0 (infinite bound)")
    if scene.epsilon == 0.0:
        raise UnidentifiableError("separation is unidentifiable at epsilon = 0 (infinite bound)")
    s2 = effective_noise(noise, scene.w0)
    return scene.w0 * math.sqrt(
        (s2 / (scene.epsilon * scene.d**2) + 1.0) / (scene.eta * nn * scene.epsilon)
    )


def spade_error_eps(scene: SceneParams, noise: NoiseModel, n) -> float:
    """One-sigma error on the relative intensity epsilon.

    Returns (2 w0 / d) * sqrt((sigma_eff^2 / (eps d^2) + 1) * eps / (eta n));
    without noise this is (2 w0 / d) * sqrt(eps / (eta n)).
    """
    nn = _budget(n)
    if scene.d == 0.0:
        raise UnidentifiableError("epsilon is unidentifiable at d = 0 (infinite bound)")
    s2 = effective_noise(noise, scene.w0)
    # eps * (s2 / (eps d^2) + 1) stays finite for eps -> 0
    inner = (s2 / scene.d**2 + scene.epsilon) / (scene.eta * nn)
    return (2.0 * scene.w0 / scene.d) * math.sqrt(inner)


def snr_gain(scene: SceneParams, noise: NoiseModel, n, quad_cfg: QuadratureConfig | None = None) -> float:
    """Ratio of the direct-imaging d bound to the mode-sorting d bound.

    Both sides use the same temporal-mode budget n. In the noiseless
    sub-waist regime the ratio tends to epsilon^(-1/2).
    """
    nn = _budget(n)
    spade = spade_error_d(scene, noise, nn)
    on_axis = SceneParams(scene.eta, scene.epsilon, scene.d, 0.0, scene.w0)
    fd = fisher_d(on_axis, quad_cfg).value
    if fd <= 0.0:
        return math.inf
    return (1.0 / math.sqrt(nn * fd)) / spade


def _noise_label(noise: NoiseModel, w0: float) -> str:
    if noise.sigma == 0.0:
        return f"spade chi={noise.chi:g}"
    return f"spade sigma/w0={noise.sigma / w0:g} chi={noise.chi:g}"


def sweep_bounds(axis, grid, scene: SceneParams, noises, n, quad_cfg: QuadratureConfig | None = None):
    """Rescaled error curves versus a parameter grid, for CSV emission.

    ``axis`` selects the swept variable: ``"d_a"`` sweeps the dimensionless
    separation at the scene's epsilon, ``"eps"`` sweeps the relative
    intensity at the scene's separation. Returns rows (x, series_label, y)
    where y is the error rescaled by sqrt(eta n) / w0 (for d, giving a
    dimensionless curve) or by sqrt(eta n) (for epsilon). The direct-imaging
    series comes first, then one series per noise model; row order follows
    the grid within each series. The rescaled curves are independent of the
    actual budget.
    """
    nn = _budget(n)
    rows = []
    root = math.sqrt(scene.eta * nn)
    if axis == "d_a":
        di_vals = []
        for da in grid:
            pt = replace(scene, d_x=da * scene.w0, d_y=0.0)
            fd = fisher_d(pt, quad_cfg).value
            di_vals.append(math.inf if fd <= 0.0 else root / (scene.w0 * math.sqrt(nn * fd)))
        rows.extend((float(da), "di", v) for da, v in zip(grid, di_vals))
        for noise in noises:
            for da in grid:
                pt = replace(scene, d_x=da * scene.w0, d_y=0.0)
                rows.append(
                    (float(da), _noise_label(noise, scene.w0), root * spade_error_d(pt, noise, nn) / scene.w0)
                )
    elif axis == "eps":
        di_vals = []
        for eps in grid:
            pt = replace(scene, epsilon=float(eps))
            fe = fisher_eps(pt, quad_cfg).value
            di_vals.append(math.inf if fe <= 0.0 else root / math.sqrt(nn * fe))
        rows.extend((float(eps), "di", v) for eps, v in zip(grid, di_vals))
        for noise in noises:
            for eps in grid:
                pt = replace(scene, epsilon=float(eps))
                rows.append((float(eps), _noise_label(noise, scene.w0), root * spade_error_eps(pt, noise, nn)))
    else:
        raise ParameterDomainError(f"unknown sweep axis {axis!r} (use 'd_a' or 'eps')")
    return rows
