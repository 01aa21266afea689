"""Exception hierarchy shared across the toolkit."""


class MtVerifyError(Exception):
    """Base class for all toolkit errors."""


class DataFormatError(MtVerifyError):
    """A data file does not match its declared on-disk format."""


class ValidationError(MtVerifyError):
    """An in-memory object violates one of its structural invariants."""


class ConfigError(MtVerifyError):
    """A configuration value or plan file is unusable."""


class TransformError(MtVerifyError):
    """A metamorphic transform was given arguments it cannot honor."""


class NormalizationError(MtVerifyError):
    """Per-instance standardization is undefined (zero variance)."""


class TrainingError(MtVerifyError):
    """Training failed to produce a usable model."""


class TrainingDivergedError(TrainingError):
    """Training loss left the finite/bounded regime.

    Carries the partial run (with its truncated trace) as ``run`` so
    callers can still inspect what happened before the blow-up.
    """

    def __init__(self, message, run=None):
        super().__init__(message)
        self.run = run


class SubjectCrashError(MtVerifyError):
    """The application under test raised instead of producing output."""


class BaselineKilledError(MtVerifyError):
    """The clean baseline failed a metamorphic relation; suite aborted.

    Carries the partially built ``matrix`` for diagnostics.
    """

    def __init__(self, message, matrix=None):
        super().__init__(message)
        self.matrix = matrix
