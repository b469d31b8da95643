"""Exception hierarchy shared across the pipeline, mapped to CLI exit codes."""


class FuzzprobeError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigurationError(FuzzprobeError):
    """A config file, oracle spec, or argument combination is unusable."""

    exit_code = 2


class TransportError(FuzzprobeError):
    """The scoring service could not be reached after bounded retries."""

    exit_code = 3

    def __init__(self, message, batch_index=None):
        super().__init__(message)
        self.batch_index = batch_index


class ProtocolError(TransportError):
    """The scoring service answered, but not with a usable response."""


class DataError(FuzzprobeError):
    """Persisted data (cache, curves, report) is malformed or inconsistent."""

    exit_code = 4


class InsufficientDataError(DataError):
    """An operation needs more samples than the input provides."""


class StageError(FuzzprobeError):
    """A pipeline stage failed; carries the stage name and the root cause."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause

    @property
    def exit_code(self):  # type: ignore[override]
        return getattr(self.cause, "exit_code", 1)
