"""Seeded Monte Carlo of single-photon counting through the mode sorter.

An acquisition consists of ``n_measures`` repeated measures of ``n_slots``
temporal modes each. Every measure owns an independent deterministic RNG
substream derived from the master seed by its measure index, so results are
bit-identical regardless of worker count or execution order.

Per measure the sampler draws a misalignment offset (scheme set by
``jitter_mode``), evaluates the exact detection probabilities, mixes in
crosstalk, and draws the slot outcomes from the resulting categorical
distribution. Optional dark counts land on otherwise empty slots, one
Bernoulli trial per bright channel, which keeps n0 + n1 <= n_slots exact.

``probability_model="sub-rayleigh"`` replaces the exact probabilities by the
quadratic-order closed form with the effective noise variance
sigma^2 + 4 w0^2 chi. This generates data that follow the calibration model
class exactly (jitter draws are skipped: the closed form already averages
over the misalignment distribution).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    BelowNoiseFloorError,
    EstimationError,
    ParameterDomainError,
    UnidentifiableError,
)
from .model import (
    Misalignment,
    NoiseModel,
    SceneParams,
    apply_crosstalk,
    effective_noise,
    exact_mode_prob_arrays,
    exact_mode_probs,
)

__all__ = [
    "JITTER_MODES",
    "PROBABILITY_MODELS",
    "AcquisitionConfig",
    "CountRecord",
    "F1Estimate",
    "EpsEstimate",
    "sample_counts",
    "estimate_f1",
    "invert_for_d",
    "invert_for_eps",
]

JITTER_MODES = ("fixed-offset", "per-measure-random", "per-slot-random")
PROBABILITY_MODELS = ("exact", "sub-rayleigh")

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class AcquisitionConfig:
    """Acquisition structure and sampling options.

    ``offset`` (scene length units) is the deterministic misalignment used by
    the ``fixed-offset`` jitter mode; the random modes draw offsets with
    component variance sigma^2 / 2 per measure or per slot. ``dark_rate`` is
    the spurious-count probability per slot per bright channel.
    ``split_bright`` keeps separate counts for the two bright channels
    (exact model only), splitting the crosstalk leak evenly between them.
    """

    n_slots: int
    n_measures: int = 100
    jitter_mode: str = "per-measure-random"
    master_seed: int = 0
    dark_rate: float = 0.0
    probability_model: str = "exact"
    offset: tuple[float, float] = (0.0, 0.0)
    split_bright: bool = False

    def __post_init__(self):
        if int(self.n_slots) != self.n_slots or self.n_slots < 1:
            raise ParameterDomainError(f"n_slots must be a positive integer, got {self.n_slots}")
        if int(self.n_measures) != self.n_measures or self.n_measures < 1:
            raise ParameterDomainError(
                f"n_measures must be a positive integer, got {self.n_measures}"
            )
        if self.jitter_mode not in JITTER_MODES:
            raise ParameterDomainError(
                f"jitter_mode must be one of {JITTER_MODES}, got {self.jitter_mode!r}"
            )
        if self.probability_model not in PROBABILITY_MODELS:
            raise ParameterDomainError(
                f"probability_model must be one of {PROBABILITY_MODELS}, got {self.probability_model!r}"
            )
        if not 0.0 <= self.dark_rate <= 1e-3:
            raise ParameterDomainError(f"dark_rate must be in [0, 1e-3], got {self.dark_rate}")
        if self.split_bright and self.probability_model != "exact":
            raise ParameterDomainError("split_bright requires the exact probability model")


@dataclass(frozen=True, eq=False)
class CountRecord:
    """Per-measure photon counts with seed provenance.

    ``substream_ids`` are the spawn keys of the per-measure RNG substreams;
    together with ``master_seed`` they identify every random draw, so the
    record is exactly reproducible from (scene, noise, config).
    """

    n0_per_measure: np.ndarray
    n1_per_measure: np.ndarray
    substream_ids: np.ndarray
    master_seed: int
    n_slots: int
    n01_per_measure: np.ndarray | None = None
    n10_per_measure: np.ndarray | None = None

    @property
    def n0(self) -> int:
        return int(self.n0_per_measure.sum())

    @property
    def n1(self) -> int:
        return int(self.n1_per_measure.sum())

    @property
    def n_measures(self) -> int:
        return len(self.n1_per_measure)


@dataclass(frozen=True)
class F1Estimate:
    """Relative first-order-mode frequency with its binomial uncertainty."""

    f1: float
    delta_f1: float
    n_detected: int
    degenerate: bool


@dataclass(frozen=True)
class EpsEstimate:
    """Relative-intensity estimate; ``clamped`` marks raw values outside [0, 1/2]."""

    value: float
    raw: float
    clamped: bool


def _measure_rng(master_seed: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    return np.random.Generator(np.random.PCG64(ss))


def _subrayleigh_mixed(scene: SceneParams, noise: NoiseModel) -> tuple[float, float]:
    q1 = (effective_noise(noise, scene.w0) + scene.epsilon * scene.d**2) / (4.0 * scene.w0**2)
    if not 0.0 <= q1 <= 1.0:
        raise ParameterDomainError(
            f"sub-Rayleigh closed form out of range (q1 = {q1:g}); reduce d or sigma"
        )
    return scene.eta * (1.0 - q1), scene.eta * q1


def _lumped_probs(scene: SceneParams, noise: NoiseModel, delta_x, delta_y):
    probs = exact_mode_probs(scene, Misalignment(float(delta_x), float(delta_y)))
    return apply_crosstalk((probs.p00, probs.p1), noise.chi)


def _split_probs(scene: SceneParams, noise: NoiseModel, delta_x, delta_y):
    probs = exact_mode_probs(scene, Misalignment(float(delta_x), float(delta_y)))
    chi = noise.chi
    p0m = (1.0 - chi) * probs.p00 + chi * probs.p1
    p01m = (1.0 - chi) * probs.p01 + 0.5 * chi * probs.p00
    p10m = (1.0 - chi) * probs.p10 + 0.5 * chi * probs.p00
    return p0m, p01m, p10m


def _per_slot_measure(scene, noise, acq, rng):
    scale = noise.sigma / _SQRT2
    deltas = rng.normal(0.0, scale, size=(2, acq.n_slots))
    p00, p01, p10 = exact_mode_prob_arrays(scene, deltas[0], deltas[1])
    chi = noise.chi
    if acq.split_bright:
        p0m = (1.0 - chi) * p00 + chi * (p01 + p10)
        p01m = (1.0 - chi) * p01 + 0.5 * chi * p00
        p10m = (1.0 - chi) * p10 + 0.5 * chi * p00
        u = rng.random(acq.n_slots)
        n0 = int(np.count_nonzero(u < p0m))
        n01 = int(np.count_nonzero((u >= p0m) & (u < p0m + p01m)))
        n10 = int(np.count_nonzero((u >= p0m + p01m) & (u < p0m + p01m + p10m)))
        return n0, n01 + n10, n01, n10
    p0m = (1.0 - chi) * p00 + chi * (p01 + p10)
    p1m = (1.0 - chi) * (p01 + p10) + chi * p00
    u = rng.random(acq.n_slots)
    n0 = int(np.count_nonzero(u < p0m))
    n1 = int(np.count_nonzero((u >= p0m) & (u < p0m + p1m)))
    return n0, n1, None, None


def _measure_counts(scene, noise, acq, rng):
    if acq.probability_model == "sub-rayleigh":
        p0m, p1m = _subrayleigh_mixed(scene, noise)
        counts = rng.multinomial(acq.n_slots, (p0m, p1m, 1.0 - p0m - p1m))
        n0, n1, n01, n10 = int(counts[0]), int(counts[1]), None, None
    elif acq.jitter_mode == "per-slot-random":
        n0, n1, n01, n10 = _per_slot_measure(scene, noise, acq, rng)
    else:
        if acq.jitter_mode == "fixed-offset":
            dx, dy = acq.offset
        else:
            dx, dy = rng.normal(0.0, noise.sigma / _SQRT2, size=2)
        if acq.split_bright:
            p0m, p01m, p10m = _split_probs(scene, noise, dx, dy)
            counts = rng.multinomial(
                acq.n_slots, (p0m, p01m, p10m, 1.0 - p0m - p01m - p10m)
            )
            n0, n01, n10 = int(counts[0]), int(counts[1]), int(counts[2])
            n1 = n01 + n10
        else:
            p0m, p1m = _lumped_probs(scene, noise, dx, dy)
            counts = rng.multinomial(acq.n_slots, (p0m, p1m, 1.0 - p0m - p1m))
            n0, n1, n01, n10 = int(counts[0]), int(counts[1]), None, None
    if acq.dark_rate > 0.0:
        empty = acq.n_slots - n0 - n1
        if acq.split_bright:
            add01 = int(rng.binomial(empty, acq.dark_rate))
            add10 = int(rng.binomial(empty - add01, acq.dark_rate))
            n01 += add01
            n10 += add10
            n1 = n01 + n10
        else:
            either = 1.0 - (1.0 - acq.dark_rate) ** 2
            n1 += int(rng.binomial(empty, either))
    return n0, n1, n01, n10


def sample_counts(
    scene: SceneParams,
    noise: NoiseModel,
    acq: AcquisitionConfig,
    workers: int = 1,
) -> CountRecord:
    """Simulate one acquisition and return the per-measure counts.

    ``workers`` > 1 distributes measures over a thread pool; the output is
    bit-identical to the serial run because each measure uses its own
    substream and results are stored by measure index.
    """
    m = acq.n_measures
    n0 = np.zeros(m, dtype=np.int64)
    n1 = np.zeros(m, dtype=np.int64)
    split = acq.split_bright
    n01 = np.zeros(m, dtype=np.int64) if split else None
    n10 = np.zeros(m, dtype=np.int64) if split else None

    def one(i):
        rng = _measure_rng(acq.master_seed, i)
        return i, _measure_counts(scene, noise, acq, rng)

    if workers <= 1:
        results = map(one, range(m))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(m)))
    for i, (c0, c1, c01, c10) in results:
        n0[i] = c0
        n1[i] = c1
        if split:
            n01[i] = c01
            n10[i] = c10
    return CountRecord(
        n0_per_measure=n0,
        n1_per_measure=n1,
        substream_ids=np.arange(m, dtype=np.int64),
        master_seed=acq.master_seed,
        n_slots=acq.n_slots,
        n01_per_measure=n01,
        n10_per_measure=n10,
    )


def estimate_f1(record: CountRecord) -> F1Estimate:
    """Relative frequency f1 = n1 / (n0 + n1) with plug-in binomial error.

    f1 is an unbiased estimator of p1 / eta. The estimate is flagged
    degenerate when every detection fell in a single channel (delta_f1 = 0).
    """
    total = record.n0 + record.n1
    if total < 1:
        raise EstimationError("no detections recorded; f1 is undefined")
    f1 = record.n1 / total
    delta = math.sqrt(f1 * (1.0 - f1) / total)
    return F1Estimate(f1=f1, delta_f1=delta, n_detected=total, degenerate=f1 in (0.0, 1.0))


def _noise_floor(scene: SceneParams, noise: NoiseModel) -> float:
    return effective_noise(noise, scene.w0) / (4.0 * scene.w0**2)


def invert_for_d(f1: float, scene: SceneParams, noise: NoiseModel) -> float:
    """Separation estimate from f1 with epsilon known.

    Inverts the quadratic-order model: d = 2 w0 sqrt((f1 - floor) / eps)
    with floor = (sigma^2 + 4 w0^2 chi) / (4 w0^2).
    """
    if scene.epsilon <= 0.0:
        raise UnidentifiableError("cannot invert for d with epsilon = 0")
    radicand = (f1 - _noise_floor(scene, noise)) / scene.epsilon
    if radicand < 0.0:
        raise BelowNoiseFloorError(
            f"f1 = {f1:g} is below the noise floor; signal indistinguishable from noise",
            radicand=radicand,
        )
    return 2.0 * scene.w0 * math.sqrt(radicand)


def invert_for_eps(f1: float, scene: SceneParams, noise: NoiseModel) -> EpsEstimate:
    """Relative-intensity estimate from f1 with the separation known.

    Inverts eps = 4 w0^2 (f1 - floor) / d^2 and clamps the result to
    [0, 1/2], flagging when clamping occurred.
    """
    if scene.d == 0.0:
        raise UnidentifiableError("cannot invert for epsilon with d = 0")
    numerator = f1 - _noise_floor(scene, noise)
    if numerator < 0.0:
        raise BelowNoiseFloorError(
            f"f1 = {f1:g} is below the noise floor; signal indistinguishable from noise",
            radicand=numerator,
        )
    raw = 4.0 * scene.w0**2 * numerator / scene.d**2
    value = min(max(raw, 0.0), 0.5)
    return EpsEstimate(value=value, raw=raw, clamped=value != raw)
