"""Exception types shared across the toolkit."""


class DgasError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(DgasError, ValueError):
    """A caller passed data that violates an operation's contract."""


class ConfigurationError(DgasError, ValueError):
    """A configuration is internally inconsistent or does not match the data."""


class DegenerateInputError(InvalidInputError):
    """Input is syntactically valid but statistically unusable (e.g. zero variance)."""


class ModelFormatError(DgasError, ValueError):
    """Base class for model-container decoding failures."""


class UnsupportedVersionError(ModelFormatError):
    """The container declares a format version this build cannot read."""


class TruncatedStreamError(ModelFormatError):
    """The byte stream ended before the container was complete."""


class ShapeInconsistencyError(ModelFormatError):
    """Decoded tensors do not match the shapes implied by the decoded config."""
