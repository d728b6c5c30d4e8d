"""Exception taxonomy shared across the package."""


class SeparabilityError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(SeparabilityError):
    """An operation received inputs that violate its preconditions."""


class ConfigurationError(SeparabilityError):
    """A configuration object is internally inconsistent or unusable."""


class DatasetError(SeparabilityError):
    """A dataset on disk could not be loaded or validated."""


class MissingStemError(DatasetError):
    """An expected instrument stem file is absent from a song directory."""


class AlignmentError(DatasetError):
    """Stems of one song disagree in length, channel count, or sample rate."""


class SilentReferenceError(SeparabilityError):
    """A reference window is silent, so the requested score is undefined.

    Callers that aggregate over windows catch this and record a missing
    score instead of propagating the error.
    """


class UndefinedCorrelationError(SeparabilityError):
    """A correlation is undefined (zero variance in one of the inputs)."""
