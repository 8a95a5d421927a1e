"""Fisher information and Cramér-Rao bounds for ideal direct imaging.

Direct imaging measures the photon arrival position on an infinitely fine
pixel grid. With the weaker source on the x axis the y coordinate carries no
information and integrates out, leaving one-dimensional Fisher integrals over
the marginal density p(x). Both integrals are evaluated by adaptive
quadrature with analytic integrand derivatives; the working variable is
u = x / w0 so the computation is unit-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import NumericalFailureError, ParameterDomainError, UnidentifiableError
from .model import SceneParams

__all__ = [
    "QuadratureConfig",
    "FisherResult",
    "DiBounds",
    "di_marginal_intensity",
    "fisher_d",
    "fisher_eps",
    "di_bounds",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class QuadratureConfig:
    """Adaptive quadrature settings for the Fisher integrals.

    ``half_width`` is the integration half-width in units of w0 before the
    window is widened by |d|; at least 8 so the Gaussian tails are below
    1e-14. ``rel_tol`` is the requested relative tolerance (floored at 1e-13,
    the practical limit of float64 quadrature).
    """

    half_width: float = 8.0
    rel_tol: float = 1e-8
    scheme: str = "adaptive"

    def __post_init__(self):
        if not self.half_width >= 8.0:
            raise ParameterDomainError(f"half_width must be >= 8, got {self.half_width}")
        if not 1e-13 <= self.rel_tol:
            raise ParameterDomainError(f"rel_tol must be >= 1e-13, got {self.rel_tol}")
        if self.scheme != "adaptive":
            raise ParameterDomainError(f"unknown quadrature scheme {self.scheme!r}")


@dataclass(frozen=True)
class FisherResult:
    """Fisher information value with its estimated quadrature error."""

    value: float
    quad_error: float


@dataclass(frozen=True)
class DiBounds:
    """One-sigma direct-imaging lower bounds for d and epsilon.

    A bound is infinite, with the matching flag set, when the corresponding
    Fisher information vanishes (unidentifiable parameter).
    """

    delta_d: float
    delta_eps: float
    d_unidentifiable: bool = False
    eps_unidentifiable: bool = False


def _on_axis_separation(scene: SceneParams) -> float:
    if scene.d_y != 0.0:
        raise ParameterDomainError(
            "direct-imaging formulas assume the weaker source on the x axis (d_y = 0)"
        )
    return scene.d_x / scene.w0


def di_marginal_intensity(x, scene: SceneParams):
    """Marginal image-plane density p(x); integrates to eta over the real line."""
    da = _on_axis_separation(scene)
    u = np.asarray(x, dtype=float) / scene.w0
    eps = scene.epsilon
    val = (1.0 - eps) * np.exp(-0.5 * u**2) + eps * np.exp(-0.5 * (u - da) ** 2)
    return scene.eta * val / (_SQRT_2PI * scene.w0)


def _integrate(integrand, da: float, cfg: QuadratureConfig) -> tuple[float, float]:
    hi = cfg.half_width + abs(da)
    out = quad(
        integrand,
        -hi,
        hi,
        epsabs=0.0,
        epsrel=cfg.rel_tol,
        limit=200,
        points=(0.0, da),
        full_output=1,
    )
    if len(out) > 3:
        # quad appends a message (and possibly details) when it is unhappy
        raise NumericalFailureError(
            f"Fisher quadrature did not converge: {out[3]}", error_estimate=out[1]
        )
    return out[0], out[1]


def fisher_d(scene: SceneParams, quad_cfg: QuadratureConfig | None = None) -> FisherResult:
    """Fisher information for the separation d (units 1/w0^2).

    Uses the analytic derivative of the marginal density with respect to d;
    only the displaced Gaussian depends on d.
    """
    cfg = quad_cfg or QuadratureConfig()
    da = _on_axis_separation(scene)
    eps = scene.epsilon

    def integrand(u):
        g0 = math.exp(-0.5 * u * u)
        gd = math.exp(-0.5 * (u - da) ** 2)
        q = ((1.0 - eps) * g0 + eps * gd) / _SQRT_2PI
        if q <= 0.0:
            return 0.0
        dq = eps * (u - da) * gd / _SQRT_2PI
        return dq * dq / q

    value, err = _integrate(integrand, da, cfg)
    scale = scene.eta / scene.w0**2
    return FisherResult(value * scale, err * scale)


def fisher_eps(scene: SceneParams, quad_cfg: QuadratureConfig | None = None) -> FisherResult:
    """Fisher information for the relative intensity epsilon (dimensionless)."""
    cfg = quad_cfg or QuadratureConfig()
    da = _on_axis_separation(scene)
    eps = scene.epsilon

    def integrand(u):
        g0 = math.exp(-0.5 * u * u)
        gd = math.exp(-0.5 * (u - da) ** 2)
        q = ((1.0 - eps) * g0 + eps * gd) / _SQRT_2PI
        if q <= 0.0:
            return 0.0
        dq = (gd - g0) / _SQRT_2PI
        return dq * dq / q

    value, err = _integrate(integrand, da, cfg)
    return FisherResult(value * scene.eta, err * scene.eta)


def di_bounds(scene: SceneParams, n, quad_cfg: QuadratureConfig | None = None) -> DiBounds:
    """Cramér-Rao bounds 1/sqrt(n F) for direct imaging with n temporal modes.

    ``n`` counts temporal modes, so eta * n is the mean detected-photon
    budget; this matches the photon accounting of the mode-sorting bounds.
    """
    n = float(n)
    if not n >= 1.0:
        raise ParameterDomainError(f"n must be >= 1, got {n}")
    fd = fisher_d(scene, quad_cfg).value
    fe = fisher_eps(scene, quad_cfg).value
    d_flag = fd <= 0.0
    e_flag = fe <= 0.0
    return DiBounds(
        delta_d=math.inf if d_flag else 1.0 / math.sqrt(n * fd),
        delta_eps=math.inf if e_flag else 1.0 / math.sqrt(n * fe),
        d_unidentifiable=d_flag,
        eps_unidentifiable=e_flag,
    )
