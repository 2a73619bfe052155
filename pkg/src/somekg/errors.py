"""Exception types shared across the workbench."""


class SomekgError(Exception):
    """Base class for all workbench errors."""


class ParseError(SomekgError):
    """Malformed input text. Carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ConfigurationError(SomekgError, ValueError):
    """Invalid configuration value."""


class UnknownEntityError(SomekgError, LookupError):
    """Entity name not present in the vocabulary."""


class UnknownRelationError(SomekgError, LookupError):
    """Relation name not present in the vocabulary."""


class SamplingError(SomekgError):
    """A random sampling procedure could not produce a valid draw."""


class TrainingError(SomekgError):
    """Training aborted (e.g. non-finite loss)."""


class EvaluationError(SomekgError):
    """Evaluation could not be carried out on the given inputs."""


class CalibrationError(SomekgError):
    """Threshold calibration failed (e.g. uncovered relation)."""


class ShapeError(SomekgError, ValueError):
    """Array shapes or grid dimensions do not match."""


class GridIndexError(SomekgError, IndexError):
    """Cell coordinates outside the map."""


class DatasetError(SomekgError):
    """Dataset construction or splitting failed."""


class DiagnosticError(SomekgError):
    """A diagnostic statistic is undefined on the given inputs."""


class CheckpointError(SomekgError):
    """Checkpoint file unreadable, corrupted, or of the wrong kind."""
