"""Exception types shared across the package."""


class FracwaveError(Exception):
    """Base class for all package-specific errors."""


class GridTooSmall(FracwaveError):
    """Physical grid cannot represent the requested band-limited object exactly."""


class NegativePowerAtZeroMode(FracwaveError):
    """|k|^gamma with gamma < 0 applied to a field with a nonzero k=0 mode."""


class QuadratureNotConverged(FracwaveError):
    """Doubling the quadrature order moved the result beyond the tolerance."""


class NotPositive(FracwaveError):
    """The averaged potential violates the positivity condition."""


class NotCritical(FracwaveError):
    """The averaged potential has a nonzero quadratic coefficient."""


class DegenerateWeights(FracwaveError):
    """Importance-sampling effective sample size fell below the threshold."""


class NonFinite(FracwaveError):
    """A spectral coefficient became NaN or infinite during time stepping."""


class PositivityHolds(FracwaveError):
    """Counterexample drift requested for a potential that satisfies positivity."""


class ConditionViolated(FracwaveError):
    """Exponents fall outside the hypothesis of the requested inequality case."""


class ConfigError(FracwaveError):
    """Run configuration failed schema validation."""
