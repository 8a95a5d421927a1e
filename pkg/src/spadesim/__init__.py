"""Sub-Rayleigh two-source simulation and estimation toolkit.

Measures the transverse separation and relative intensity of two faint,
unequal-intensity point sources by sorting the image-plane field into
low-order Hermite-Gaussian modes and counting single photons, including the
statistical-error theory, crosstalk and misalignment noise models, a seeded
Monte Carlo of the acquisition, the calibration-curve readout pipeline, and
Fisher-information benchmarks against ideal direct imaging.
"""

from .bounds import BudgetParams, snr_gain, spade_error_d, spade_error_eps, sweep_bounds
from .calibration import (
    LINEAR_IN_EPS,
    QUADRATIC_IN_DA,
    CalibrationCurve,
    SweepData,
    fit_linear,
    fit_quadratic,
    invert_curve,
    propagate_uncertainty,
)
from .errors import (
    BelowCalibrationFloorError,
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
from .experiment import ExperimentResult, ExperimentSettings, figure_rows, run_experiment
from .fisher import (
    DiBounds,
    FisherResult,
    QuadratureConfig,
    di_bounds,
    di_marginal_intensity,
    fisher_d,
    fisher_eps,
)
from .model import (
    Misalignment,
    ModeProbabilities,
    NoiseModel,
    SceneParams,
    aligned_offset,
    apply_crosstalk,
    effective_noise,
    exact_mode_prob_arrays,
    exact_mode_probs,
    numeric_aligned_offset,
    scene_with_brighter_first,
    subrayleigh_probs,
)
from .montecarlo import (
    AcquisitionConfig,
    CountRecord,
    EpsEstimate,
    F1Estimate,
    estimate_f1,
    invert_for_d,
    invert_for_eps,
    sample_counts,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # model
    "SceneParams", "Misalignment", "NoiseModel", "ModeProbabilities",
    "scene_with_brighter_first", "exact_mode_probs", "exact_mode_prob_arrays",
    "subrayleigh_probs", "apply_crosstalk", "effective_noise",
    "aligned_offset", "numeric_aligned_offset",
    # fisher
    "QuadratureConfig", "FisherResult", "DiBounds",
    "di_marginal_intensity", "fisher_d", "fisher_eps", "di_bounds",
    # bounds
    "BudgetParams", "spade_error_d", "spade_error_eps", "snr_gain", "sweep_bounds",
    # montecarlo
    "AcquisitionConfig", "CountRecord", "F1Estimate", "EpsEstimate",
    "sample_counts", "estimate_f1", "invert_for_d", "invert_for_eps",
    # calibration
    "QUADRATIC_IN_DA", "LINEAR_IN_EPS", "SweepData", "CalibrationCurve",
    "fit_quadratic", "fit_linear", "invert_curve", "propagate_uncertainty",
    # experiment
    "ExperimentSettings", "ExperimentResult", "run_experiment", "figure_rows",
    # errors
    "SpadeSimError", "ParameterDomainError", "ConfigError", "NumericalFailureError",
    "UnidentifiableError", "BelowNoiseFloorError", "BelowCalibrationFloorError",
    "DivergentSensitivityError", "InvalidCurveError", "FitError", "EstimationError",
]
