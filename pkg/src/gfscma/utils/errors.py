"""Custom error definitions."""

from typing import Optional


class GfScmaError(Exception):
    """Base exception for grant-free SCMA analysis errors."""
    pass


class DomainError(GfScmaError, ValueError):
    """Raised when an argument lies outside an operation's domain."""
    pass


class BranchCutError(DomainError):
    """Raised when a hypergeometric argument sits on the real branch cut z >= 1."""
    pass


class ConvergenceError(GfScmaError):
    """Raised when a series misses its tolerance within the term budget."""
    pass


class DivisibilityError(DomainError):
    """Raised when K does not divide L*T."""
    pass


class CodebookParseError(GfScmaError):
    """Raised when a codebook file cannot be parsed."""

    def __init__(self, message: str, path: str = "<string>", line: int = 0, column: int = 0):
        self.path = path
        self.line = line
        self.column = column
        super().__init__(f"{path}:{line}:{column}: {message}")


class CodebookInvariantError(GfScmaError):
    """Raised when a codebook violates a structural invariant."""

    def __init__(self, check: str, message: str):
        self.check = check
        super().__init__(f"codebook check '{check}' failed: {message}")


class QuadratureError(GfScmaError):
    """Raised when a characteristic-function inversion fails."""
    pass


class TruncationError(QuadratureError):
    """Raised when the integrand envelope never decays below tolerance."""
    pass


class ToleranceError(QuadratureError):
    """Raised when a quadrature panel misses its error threshold."""
    pass


class PremiseError(GfScmaError):
    """Raised when an approximation is requested outside its premises."""
    pass


class WindowTooSmallError(GfScmaError):
    """Raised when the simulation window cannot contain the truncation radius."""
    pass


class ConfigError(GfScmaError):
    """Raised when run configuration validation fails."""

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        prefix = f"{field}: " if field else ""
        super().__init__(f"{prefix}{message}")
