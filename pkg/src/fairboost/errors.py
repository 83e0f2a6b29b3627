"""Exception hierarchy shared across the package.

Every error raised on purpose derives from FairboostError so callers (and
the CLI) can map failures to outcomes without matching on message text.
"""


class FairboostError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(FairboostError):
    """A user-supplied parameter is out of range or inconsistent."""


class SchemaError(FairboostError):
    """A column schema is malformed or does not match the data."""


class DataError(FairboostError):
    """A data file or in-memory dataset violates a validation rule."""


class IngestionError(DataError):
    """A raw benchmark file is missing or does not look like the expected source."""


class TrainingError(FairboostError):
    """Training entered a numerically degenerate state."""


class ContractError(FairboostError):
    """An internal precondition was violated by the caller."""


class ModelError(FairboostError):
    """Base class for problems with a serialized or in-memory model."""


class ModelVersionError(ModelError):
    """The model file declares a format version this code does not read."""


class ModelParseError(ModelError):
    """The model file is syntactically invalid (includes truncation)."""


class ModelStructureError(ModelError):
    """The model file parsed but describes an inconsistent tree."""
