"""Exception types shared across the package."""


class GausscurvError(Exception):
    """Base class for all package-specific failures."""


class AdmissibilityError(GausscurvError):
    """A weight evaluator violates positivity or monotonicity on the sample grid."""


class QuadratureError(GausscurvError):
    """An adaptive quadrature or extrapolation did not converge."""


class ConvexityError(GausscurvError):
    """An operation requiring a convex body received one whose certificate fails."""


class ConfigError(GausscurvError):
    """A run configuration value is missing, malformed, or out of range."""
