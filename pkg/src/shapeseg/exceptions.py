"""Exception types shared across the package."""


class ShapesegError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(ShapesegError):
    """A config object violates one of its invariants.

    The message names the offending field.
    """


class DataFormatError(ShapesegError):
    """An on-disk volume or mask file is malformed or fails validation."""


class CheckpointError(ShapesegError):
    """A checkpoint file is malformed or does not match the target network."""


class TrainingAbort(ShapesegError):
    """Training hit a non-recoverable numeric failure (non-finite loss or gradient)."""


class UsageError(ShapesegError):
    """Invalid command-line invocation."""
