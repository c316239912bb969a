"""Exception hierarchy shared across the package."""


class SelnetError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(SelnetError):
    """Operands with incompatible dimensions; the message names both."""


class PreconditionError(SelnetError):
    """An operation was called outside its documented domain."""


class StateError(SelnetError):
    """An operation was called in the wrong order (e.g. backward before forward)."""


class DataError(SelnetError):
    """Malformed input data: bad CSV cells, missing columns, out-of-domain labels."""


class TrainingDivergedError(SelnetError):
    """Non-finite loss during training; message carries epoch, batch and lr."""


class RunDirExistsError(SelnetError):
    """Run directories are append-only; refusing to write into an existing one."""


class CheckpointError(SelnetError):
    """Base class for checkpoint file problems."""


class CheckpointMagicError(CheckpointError):
    """The file does not start with the expected magic bytes."""


class CheckpointVersionError(CheckpointError):
    """The file carries an unsupported format version."""


class CheckpointTruncatedError(CheckpointError):
    """The file ended before the declared payload was complete."""
