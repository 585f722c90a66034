"""Exception types shared across the package."""


class QcompError(Exception):
    """Base class for all package errors."""


class ValidationError(QcompError):
    """Input fails a structural precondition (shape, hermiticity, ...)."""


class DimensionMismatch(ValidationError):
    """Operands have incompatible dimensions."""


class NotHermitian(ValidationError):
    """A matrix expected to be Hermitian is not, beyond tolerance."""


class NotCompletelyPositive(ValidationError):
    """A map expected to be completely positive has a negative Choi eigenvalue."""


class NotAChannel(ValidationError):
    """A map expected to be trace preserving and CP fails the channel test."""


class ZeroMap(ValidationError):
    """A construction needs a nonzero map but received (numerically) zero."""


class ShapeError(DimensionMismatch):
    """A structured object (block ensemble, tensor) is malformed."""


class SizeMismatch(DimensionMismatch):
    """Two finite collections that must align have different sizes."""


class LabelUnknown(ValidationError):
    """A parameter label is not present in the experiment."""


class LabelMismatch(ValidationError):
    """Two experiments do not share the same label set."""


class NotSpanning(ValidationError):
    """A purported spanning family of states does not span the Hermitian space."""


class NotComplete(ValidationError):
    """An experiment required to be complete (tomographically spanning) is not."""


class DegeneratePayoff(ValidationError):
    """A payoff table is identically zero."""


class SolverError(QcompError):
    """Base class for convex-solver failures."""


class NumericalFailure(SolverError):
    """The interior-point iteration broke down (singular scaling point, ...)."""


class MaxIterations(SolverError):
    """Iteration limit reached without certified convergence."""


class Infeasible(SolverError):
    """The problem was detected to be primal infeasible."""


class Unbounded(SolverError):
    """The problem was detected to be unbounded (dual infeasible)."""
