"""Exception types raised by neuro_qp."""

from typing import Optional


class NeuroQpError(Exception):
    """Base class for all neuro_qp errors."""


class DimensionMismatchError(NeuroQpError, ValueError):
    """Vector or matrix dimensions disagree."""

    def __init__(self, what: str, expected: int, got: int):
        super().__init__(f"{what}: expected length {expected}, got {got}")
        self.what = what
        self.expected = expected
        self.got = got


class ProblemFileError(NeuroQpError, ValueError):
    """A problem or spec file could not be parsed."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class SchemaVersionError(ProblemFileError):
    """File carries a schema version this release cannot read."""


class DivergenceError(NeuroQpError, RuntimeError):
    """Solver state became non-finite."""

    def __init__(self, solver: str, iteration: int):
        super().__init__(
            f"{solver} diverged at iteration {iteration} (non-finite state); "
            f"the step size alpha is likely too large"
        )
        self.solver = solver
        self.iteration = iteration


class QuantizationError(NeuroQpError, ValueError):
    """Values cannot be represented in the requested fixed-point layout."""


class BenchSpecError(NeuroQpError, ValueError):
    """Malformed benchmark spec or violated study precondition."""
