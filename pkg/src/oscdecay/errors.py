"""Exception types shared across the package."""


class OscdecayError(Exception):
    """Base class for all package errors."""


class EmptyPolynomial(OscdecayError):
    """Phase polynomial has no terms."""


class TruncationInsufficient(OscdecayError):
    """A series shift was requested beyond its truncation order."""


class DepthExceeded(OscdecayError):
    """Branch refinement failed to separate within the depth budget."""


class RamificationOverflow(OscdecayError):
    """Branch exponent denominators exceed the ramification cap."""


class DegenerateForm(OscdecayError):
    """No slicing slope avoids the zero set of the leading form."""


class SampleOutsideDomain(OscdecayError):
    """Internal sampler produced a point violating wedge bounds."""


class NonIntegrable(OscdecayError):
    """The requested density is not integrable near the origin."""


class MonotonicityRequired(OscdecayError):
    """First-order van der Corput bound needs the monotone-derivative flag."""


class InsufficientSpan(OscdecayError):
    """Fit abscissae span fewer than two decades or too few points."""


class NonPositiveValue(OscdecayError):
    """Fit input values must be strictly positive."""


class BudgetExceeded(OscdecayError):
    """Evaluation budget exhausted; carries the partial result."""

    def __init__(self, message, partial=None, error_bound=None):
        super().__init__(message)
        self.partial = partial
        self.error_bound = error_bound


class SingularPoint(OscdecayError):
    """Density evaluated on the zero set with a negative exponent."""


class OracleFailure(OscdecayError):
    """Reference quadrature could not reach the requested tolerance."""
