"""Exception hierarchy.

Argument-style errors also subclass ``ValueError`` so callers that only
know the builtin still catch them.
"""


class NoiselabError(Exception):
    """Base class for all package errors."""


class ArgumentError(NoiselabError, ValueError):
    """An argument violates a documented precondition."""


class UsageError(NoiselabError):
    """An operation was called in the wrong context (wrong split, stale cache)."""


class FormatError(NoiselabError, ValueError):
    """A file does not follow the expected binary or JSON layout."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class ConsistencyError(FormatError):
    """Two parts of an input disagree (e.g. image count vs label count)."""


class RangeError(NoiselabError, ValueError):
    """A value (typically a label) is outside its allowed range."""


class DataError(NoiselabError, ValueError):
    """Numeric input is negative or non-finite where that is not allowed."""


class TrainingError(NoiselabError):
    """A gradient step produced non-finite values."""

    def __init__(self, message: str, batch_index: int | None = None):
        super().__init__(message if batch_index is None else f"{message} (batch {batch_index})")
        self.batch_index = batch_index


class RunError(NoiselabError):
    """A training run failed; carries the phase and position where it happened."""

    def __init__(self, message: str, phase: str | None = None, epoch: int | None = None,
                 batch_index: int | None = None):
        where = []
        if phase is not None:
            where.append(f"phase={phase}")
        if epoch is not None:
            where.append(f"epoch={epoch}")
        if batch_index is not None:
            where.append(f"batch={batch_index}")
        super().__init__(f"{message} [{', '.join(where)}]" if where else message)
        self.phase = phase
        self.epoch = epoch
        self.batch_index = batch_index
