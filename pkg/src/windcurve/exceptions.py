"""Exception hierarchy shared across the package."""


class WindcurveError(Exception):
    """Base class for all windcurve errors."""


class InvalidPeriodError(WindcurveError):
    """Sample period is zero or negative."""


class AlignmentError(WindcurveError):
    """Series cannot be joined (empty timestamp intersection or mismatch)."""


class SplitError(WindcurveError):
    """Train/test boundary lies outside the dataset range."""


class CurveParseError(WindcurveError):
    """Malformed row in a curve library file."""


class NormalizationError(WindcurveError):
    """Curve cannot be normalized (zero peak rating)."""


class HeightEstimationError(WindcurveError):
    """Effective hub height cannot be estimated from the given means."""


class ParameterError(WindcurveError):
    """Invalid algorithm parameter (e.g. LOF neighbor count >= sample count)."""


class ImputationError(WindcurveError):
    """Imputation requested where the required hub wind measurement is missing."""


class FitError(WindcurveError):
    """Model fitting failed."""


class UndefinedMetricError(WindcurveError):
    """Metric denominator is non-positive (no usable ground truth)."""


class ModelFormatError(WindcurveError):
    """Serialized model document does not match the expected schema."""
