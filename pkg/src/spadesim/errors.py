"""Exception hierarchy shared across the toolkit.

Every error raised on purpose derives from :class:`SpadeSimError`, so callers
(and the CLI exit-code mapping) can distinguish our failures from genuine
bugs. Parameter-domain violations additionally subclass ``ValueError``.
"""


class SpadeSimError(Exception):
    """Base class for all toolkit errors."""


class ParameterDomainError(SpadeSimError, ValueError):
    """An input lies outside the documented parameter domain."""


class ConfigError(SpadeSimError):
    """A run configuration (file or flags) is malformed or inconsistent."""


class NumericalFailureError(SpadeSimError):
    """A numerical routine did not converge to the requested accuracy.

    Carries the achieved error estimate in ``error_estimate`` when known.
    """

    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate


class UnidentifiableError(SpadeSimError):
    """The requested parameter cannot be estimated (infinite error bound)."""


class BelowNoiseFloorError(SpadeSimError):
    """An observed rate is indistinguishable from the noise floor.

    ``radicand`` holds the (negative) quantity whose square root was needed.
    """

    def __init__(self, message, radicand=None):
        super().__init__(message)
        self.radicand = radicand


class BelowCalibrationFloorError(BelowNoiseFloorError):
    """An observed count lies below the fitted calibration intercept."""


class DivergentSensitivityError(SpadeSimError):
    """Uncertainty propagation at a stationary point of the curve."""


class InvalidCurveError(SpadeSimError):
    """A calibration curve is unusable for inversion (e.g. non-positive slope)."""


class FitError(SpadeSimError):
    """A regression could not be performed (rank deficiency, too few points)."""


class EstimationError(SpadeSimError):
    """An estimator has no data to work with (e.g. zero detections)."""
