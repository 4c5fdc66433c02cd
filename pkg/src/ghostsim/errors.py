"""Exception hierarchy shared by all ghostsim modules."""


class GhostsimError(Exception):
    """Base class for all errors raised by this package."""


class ZeroDimension(GhostsimError):
    """An image or pattern dimension is zero or negative."""


class DimensionMismatch(GhostsimError):
    """Two operands do not share the same height and width."""


class ConstantImage(GhostsimError):
    """Normalization is undefined for a constant image."""


class LengthMismatch(GhostsimError):
    """A bucket sequence and a speckle set disagree in length."""


class TooFewSamples(GhostsimError):
    """Not enough samples for a covariance estimate."""


class CorruptGF(GhostsimError):
    """Group-frame planes are inconsistent with buckets x patterns."""


class BadCheckpoints(GhostsimError):
    """Progressive-reconstruction checkpoints are not valid prefixes."""


class InvalidTrajectory(GhostsimError):
    """Rotation trajectory parameters are inconsistent."""


class NonPositiveParameter(GhostsimError):
    """A parameter that must be positive is not."""


class IndexOutOfRange(GhostsimError):
    """A frame or entry index does not exist."""


class InvalidBGF(GhostsimError):
    """A batch group frame violates its structural invariants."""


class BadBase(GhostsimError):
    """The requested merge base does not index an existing frame."""


class TooSmall(GhostsimError):
    """Image too small for the metric window."""


class IoFailure(GhostsimError):
    """Underlying file I/O failed or a file is malformed."""


class BadMagic(GhostsimError):
    """File does not start with the expected magic bytes."""


class VersionUnsupported(GhostsimError):
    """Container version not understood by this reader."""


class TruncatedFile(GhostsimError):
    """File ends in the middle of a record."""
