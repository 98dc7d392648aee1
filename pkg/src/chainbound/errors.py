"""Shared exception types."""


class ChainboundError(Exception):
    """Base class for library errors."""


class DomainError(ChainboundError, ValueError):
    """An argument is outside the mathematical domain of the operation."""


class InvalidModulusError(ChainboundError):
    """A modulus evaluated non-positive or is otherwise unusable."""


class NotAdmissibleError(ChainboundError):
    """Operation requires an admissible modulus (dyadic growth ratio > 1)."""


class NotCertifiedError(ChainboundError):
    """No closed-form growth-constant certificate exists for this modulus."""


class NontrivialSpaceError(ChainboundError):
    """Metric space has fewer than two distinct points."""


class SizeError(ChainboundError):
    """Input exceeds a hard size budget for the requested mode."""


class FitError(ChainboundError):
    """Dimension fit failed on a degenerate space."""


class DimsTooSmallError(ChainboundError):
    """Greedy cover exceeded the cardinality implied by the supplied dimension info."""

    def __init__(self, level: int, count: int, bound: float):
        self.level = level
        self.count = count
        self.bound = bound
        super().__init__(
            f"greedy cover at level {level} has {count} centers, exceeding the "
            f"dimension-info bound {bound:.6g}; supply a larger covering constant"
        )


class MembershipError(ChainboundError):
    """A point id is not part of the required set (e.g. not a net point)."""


class ParameterError(ChainboundError, ValueError):
    """Experiment parameters violate a stated hypothesis."""


class ShapeError(ChainboundError):
    """Array shapes do not line up (e.g. integrand vs. increment grid)."""


class QuadratureError(ChainboundError):
    """Quadrature failed to converge under refinement."""


class ParseError(ChainboundError):
    """A data file could not be parsed; carries a line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class UsageError(ChainboundError):
    """CLI config/schema violation."""
