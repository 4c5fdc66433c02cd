"""Error taxonomy for the trainer.

Everything raised on purpose derives from GfnnError so the CLI can
catch one type and map it to exit code 1.
"""

__all__ = [
    "GfnnError",
    "BadShape",
    "ContainerFormatError",
    "DatasetTooSmall",
    "ShapeMismatch",
]


class GfnnError(Exception):
    """Base class for all errors raised by this package."""


class BadShape(GfnnError):
    """Image geometry the network cannot be built for."""


class ContainerFormatError(GfnnError):
    """Dataset file violates the container format."""


class DatasetTooSmall(GfnnError):
    """Too few entries for the requested split or batching."""


class ShapeMismatch(GfnnError):
    """Data shapes disagree with the model or with each other."""
