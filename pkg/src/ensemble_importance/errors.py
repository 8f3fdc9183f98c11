"""Exception types shared across the package."""


class EnsembleImportanceError(Exception):
    """Base class for all errors raised by this package."""


class DataValidationError(EnsembleImportanceError):
    """A forecast or oracle table violates the tabular data contract."""


class TaskComputationError(EnsembleImportanceError):
    """Importance computation failed for one prediction task."""


class ModelCapError(EnsembleImportanceError):
    """Subset enumeration refused: the task exceeds the configured model cap."""
