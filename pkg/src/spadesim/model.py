"""Forward model for two-source photon detection in low-order Hermite-Gaussian modes.

Two incoherent point emitters with a Gaussian point-spread function of waist
``w0`` are imaged onto a mode sorter. The brighter emitter defines the origin;
the sorter axis is aligned to it up to a residual offset ``(delta_x, delta_y)``.
Per temporal mode, a photon is detected with probability ``eta``, and a
detected photon originates from the weaker emitter with probability
``epsilon``. The sorter projects onto the fundamental mode (labelled ``00``)
and the two first-order modes carrying odd dependence in x (``01``) and in y
(``10``).

All expressions depend on lengths only through ratios to ``w0``, so any
consistent length unit may be used. The closed forms here are the single
source of truth for the Monte Carlo sampler and the error-bound module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import ParameterDomainError

__all__ = [
    "SceneParams",
    "Misalignment",
    "NoiseModel",
    "ModeProbabilities",
    "scene_with_brighter_first",
    "exact_mode_probs",
    "exact_mode_prob_arrays",
    "subrayleigh_probs",
    "apply_crosstalk",
    "effective_noise",
    "aligned_offset",
    "numeric_aligned_offset",
]


def _check_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ParameterDomainError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class SceneParams:
    """Physical scene: detection probability, intensity ratio, geometry.

    Attributes
    ----------
    eta : float
        Per-temporal-mode photon detection probability, 0 < eta <= 1.
    epsilon : float
        Probability that a detected photon came from the weaker source,
        restricted to [0, 1/2] so that the origin always holds the brighter
        source. Use :func:`scene_with_brighter_first` to relabel a scene
        specified with epsilon > 1/2.
    d_x, d_y : float
        Transverse displacement of the weaker source, same unit as ``w0``.
    w0 : float
        Point-spread-function / mode-sorter waist, > 0.
    """

    eta: float
    epsilon: float
    d_x: float
    d_y: float = 0.0
    w0: float = 1.0

    def __post_init__(self):
        for name in ("eta", "epsilon", "d_x", "d_y", "w0"):
            _check_finite(name, getattr(self, name))
        if not 0.0 < self.eta <= 1.0:
            raise ParameterDomainError(f"eta must be in (0, 1], got {self.eta}")
        if not 0.0 <= self.epsilon <= 0.5:
            raise ParameterDomainError(
                f"epsilon must be in [0, 1/2] (brighter source at the origin), got {self.epsilon}"
            )
        if self.w0 <= 0.0:
            raise ParameterDomainError(f"w0 must be positive, got {self.w0}")

    @property
    def d(self) -> float:
        """Source separation |d| = sqrt(d_x^2 + d_y^2)."""
        return math.hypot(self.d_x, self.d_y)

    @property
    def d_a(self) -> float:
        """Dimensionless separation d / w0."""
        return self.d / self.w0


def scene_with_brighter_first(eta, epsilon, d_x, d_y=0.0, w0=1.0) -> SceneParams:
    """Build a scene accepting any epsilon in [0, 1].

    For epsilon > 1/2 the two sources are relabelled: the formerly weaker
    source becomes the origin (and alignment reference), so epsilon maps to
    1 - epsilon and the displacement flips sign.
    """
    epsilon = _check_finite("epsilon", epsilon)
    if not 0.0 <= epsilon <= 1.0:
        raise ParameterDomainError(f"epsilon must be in [0, 1], got {epsilon}")
    if epsilon > 0.5:
        return SceneParams(eta, 1.0 - epsilon, -d_x, -d_y, w0)
    return SceneParams(eta, epsilon, d_x, d_y, w0)


@dataclass(frozen=True)
class Misalignment:
    """Residual offset of the mode-sorter axis; (0, 0) is perfect alignment."""

    delta_x: float = 0.0
    delta_y: float = 0.0

    def __post_init__(self):
        _check_finite("delta_x", self.delta_x)
        _check_finite("delta_y", self.delta_y)


@dataclass(frozen=True)
class NoiseModel:
    """Stochastic misalignment scale and mode-sorter crosstalk.

    ``sigma`` is the RMS misalignment (same unit as w0), with each offset
    component having variance sigma^2 / 2. ``chi`` is the probability that a
    fundamental-mode photon is registered in one of the bright first-order
    channels instead.
    """

    sigma: float = 0.0
    chi: float = 0.0

    def __post_init__(self):
        _check_finite("sigma", self.sigma)
        _check_finite("chi", self.chi)
        if self.sigma < 0.0:
            raise ParameterDomainError(f"sigma must be >= 0, got {self.sigma}")
        if not 0.0 <= self.chi < 1.0:
            raise ParameterDomainError(f"chi must be in [0, 1), got {self.chi}")


@dataclass(frozen=True)
class ModeProbabilities:
    """Per-photon-slot detection probabilities in the three lowest modes."""

    p00: float
    p01: float
    p10: float

    @property
    def p1(self) -> float:
        """Joint probability of detection in either first-order mode."""
        return self.p01 + self.p10

    @property
    def p_none(self) -> float:
        """Probability of no detection in any monitored mode."""
        return 1.0 - self.p00 - self.p1


def exact_mode_prob_arrays(scene: SceneParams, delta_x, delta_y):
    """Vectorized exact (p00, p01, p10) over arrays of misalignment offsets.

    Offsets are in the same length unit as ``scene.w0``. Broadcasting follows
    numpy rules; scalars are fine.
    """
    dx = np.asarray(delta_x, dtype=float) / scene.w0
    dy = np.asarray(delta_y, dtype=float) / scene.w0
    sx = scene.d_x / scene.w0
    sy = scene.d_y / scene.w0
    # Quadratic forms weighted by the Gaussian overlap of PSF and sorter modes
    bright = scene.eta * (1.0 - scene.epsilon) * np.exp(-(dx**2 + dy**2) / 4.0)
    weak = scene.eta * scene.epsilon * np.exp(-((sx - dx) ** 2 + (sy - dy) ** 2) / 4.0)
    p00 = bright + weak
    p01 = bright * dx**2 / 4.0 + weak * (sx - dx) ** 2 / 4.0
    p10 = bright * dy**2 / 4.0 + weak * (sy - dy) ** 2 / 4.0
    return p00, p01, p10


def exact_mode_probs(scene: SceneParams, mis: Misalignment = Misalignment()) -> ModeProbabilities:
    """Exact detection probabilities for a fixed misalignment offset."""
    p00, p01, p10 = exact_mode_prob_arrays(scene, mis.delta_x, mis.delta_y)
    return ModeProbabilities(float(p00), float(p01), float(p10))


def subrayleigh_probs(scene: SceneParams, noise: NoiseModel) -> tuple[float, float]:
    """Quadratic-order (p0, p1) after averaging over stochastic misalignment.

    Valid for d and sigma well below w0; the two probabilities sum to eta
    identically. Crosstalk is not included here, see :func:`apply_crosstalk`.
    """
    q1 = (noise.sigma**2 + scene.epsilon * scene.d**2) / (4.0 * scene.w0**2)
    p1 = scene.eta * q1
    return scene.eta - p1, p1


def apply_crosstalk(probs: tuple[float, float], chi: float) -> tuple[float, float]:
    """Mix a (p0, p1) pair by the crosstalk fraction chi; the sum is conserved."""
    chi = _check_finite("chi", chi)
    if not 0.0 <= chi < 1.0:
        raise ParameterDomainError(f"chi must be in [0, 1), got {chi}")
    p0, p1 = probs
    return (1.0 - chi) * p0 + chi * p1, (1.0 - chi) * p1 + chi * p0


def effective_noise(noise: NoiseModel, w0: float) -> float:
    """Effective misalignment variance sigma^2 + 4 w0^2 chi (length^2).

    Crosstalk acts on the quadratic-order probabilities exactly like an extra
    stochastic misalignment of variance 4 w0^2 chi, which is how it enters
    every closed-form error bound.
    """
    w0 = _check_finite("w0", w0)
    if w0 <= 0.0:
        raise ParameterDomainError(f"w0 must be positive, got {w0}")
    return noise.sigma**2 + 4.0 * w0**2 * noise.chi


def aligned_offset(scene: SceneParams) -> tuple[float, float]:
    """Offset (epsilon d_x, epsilon d_y) maximizing p00 to quadratic order.

    Aligning on the brighter source with the weaker one present leaves this
    small residual pull towards the weaker source.
    """
    return scene.epsilon * scene.d_x, scene.epsilon * scene.d_y


def numeric_aligned_offset(scene: SceneParams) -> tuple[float, float]:
    """Verification mode: maximize exact p00 over the offset numerically.

    Starts from perfect alignment and returns the argmax of p00. Agrees with
    :func:`aligned_offset` up to terms cubic in d / w0.
    """

    def neg_p00(delta):
        p00, _, _ = exact_mode_prob_arrays(scene, delta[0], delta[1])
        return -float(p00)

    res = minimize(
        neg_p00,
        x0=np.zeros(2),
        method="Nelder-Mead",
        options={"xatol": 1e-10 * scene.w0, "fatol": 1e-16, "maxiter": 4000},
    )
    return float(res.x[0]), float(res.x[1])
