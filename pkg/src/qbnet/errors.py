"""Typed exceptions shared across the package."""


class QbnetError(Exception):
    """Base class for all qbnet errors."""


class DimensionMismatch(QbnetError, ValueError):
    """Array lengths inconsistent with the declared topology."""


class NegativeRate(QbnetError, ValueError):
    """A rate, amplitude, or frequency is outside its physical range."""


class NonUnitPCoefficient(QbnetError, ValueError):
    """A collective-jump coefficient does not have unit modulus."""


class UnstableSystem(QbnetError, RuntimeError):
    """Drift matrix has an eigenvalue with positive real part."""


class SingularDrift(QbnetError, RuntimeError):
    """No decaying steady state: a drift eigenvalue sits on the imaginary axis."""


class DegenerateRates(QbnetError, ValueError):
    """Closed-form transient needs pairwise-distinct damping rates.

    The numerical moment engine handles degenerate rates exactly; use it
    instead of the analytic expression.
    """


class ZeroRate(QbnetError, ValueError):
    """A damping rate entering a denominator is zero."""


class SingularMatrix(QbnetError, RuntimeError):
    """Undamped response matrix cannot be inverted."""


class DimensionOverflow(QbnetError, ValueError):
    """Requested Fock-space dimension exceeds the configured cap."""


class TruncationUnsound(QbnetError, RuntimeError):
    """Population at the truncation edge is too large to trust the result."""


class NotConverged(QbnetError, RuntimeError):
    """Iterative refinement ran out of its horizon before stabilizing."""


class ZeroReference(QbnetError, ValueError):
    """A ratio was requested against a vanishing reference value."""


class ConfigError(QbnetError, ValueError):
    """Malformed configuration document."""


class PlanError(QbnetError, ValueError):
    """Invalid sweep plan."""
