"""
Error Types

Exception hierarchy shared by all packages. Every error carries the process
exit code the CLI reports for it.
"""

from typing import Optional, Sequence


class CompositeDesignError(Exception):
    """Base class for all errors raised by this package."""

    exit_code: int = 3


class UsageError(CompositeDesignError):
    """Unknown subcommand, unknown flag or invalid flag value."""

    exit_code = 1


# =============================================================================
# Validation errors (exit code 2)
# =============================================================================

class InputValidationError(CompositeDesignError):
    """Input data violates a documented precondition."""

    exit_code = 2


class MalformedFileError(InputValidationError):
    """A file could not be parsed."""

    def __init__(self, path: str, line: Optional[int], message: str):
        location = f"{path}:{line}" if line is not None else path
        super().__init__(f"{location}: {message}")
        self.path = path
        self.line = line


class CatalogValidationError(InputValidationError):
    """One or more catalog rows are out of the admissible property range."""

    def __init__(self, offending_ids: Sequence[int], details: str = ""):
        ids = ", ".join(str(i) for i in offending_ids)
        message = f"Materials out of range: ids [{ids}]"
        if details:
            message = f"{message} ({details})"
        super().__init__(message)
        self.offending_ids = list(offending_ids)


class EmptyCatalogError(InputValidationError):
    """The catalog contains no materials."""


class ArtifactError(InputValidationError):
    """An artifact file is truncated, corrupt or unreadable."""


class IncompatibleWeightsError(InputValidationError):
    """Weights were produced for a different network configuration."""


# =============================================================================
# Numerical errors (exit code 3)
# =============================================================================

class NumericalError(CompositeDesignError):
    """A numerical procedure failed."""

    exit_code = 3


class PackingInfeasibleError(NumericalError):
    """Non-overlapping particle positions could not be found."""


class DegenerateMaterialError(NumericalError):
    """An element has a non-physical material after denormalization."""

    def __init__(self, element: int, message: str):
        super().__init__(f"Element {element}: {message}")
        self.element = element


class SolverError(NumericalError):
    """The linear solver did not converge."""

    def __init__(self, message: str, residual_history: Optional[Sequence[float]] = None):
        super().__init__(message)
        self.residual_history = list(residual_history or [])


class UndefinedBulkModulusError(NumericalError):
    """The prescribed strain has zero trace."""


class DenoiserInputError(NumericalError):
    """The denoiser received a non-finite or mis-shaped input."""


class TrainingDivergedError(NumericalError):
    """The training loss became non-finite."""

    def __init__(self, step: int):
        super().__init__(f"Training loss became non-finite at step {step}")
        self.step = step


class GuidanceStepError(NumericalError):
    """A guided sampling step failed."""

    def __init__(self, step: int, message: str):
        super().__init__(f"Sampling step {step}: {message}")
        self.step = step


class BatchFailedError(NumericalError):
    """Every chain of a sampling batch failed."""


class EvaluationError(NumericalError):
    """Every evaluation repeat of a design failed."""
