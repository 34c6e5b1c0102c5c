"""Exception types raised by the graphsr library.

Every failure mode gets its own class so callers (and the CLI exit-code
mapping) can tell configuration problems, I/O problems, and pipeline
problems apart without parsing messages.
"""


class GraphSRError(Exception):
    """Base class for all graphsr errors."""


class ConfigError(GraphSRError, ValueError):
    """A hyperparameter or parameter combination is invalid."""


class InvalidDimensionError(GraphSRError, ValueError):
    """An operation would produce or received a zero/negative-sized image."""


class ChannelMismatchError(GraphSRError, ValueError):
    """An image has the wrong number of channels for the operation."""


class NonFiniteInputError(GraphSRError, ValueError):
    """An input array contains NaN or infinity."""


class PatchBoundsError(GraphSRError, ValueError):
    """A patch coordinate plus extent falls outside the image."""


class InsufficientCandidatesError(GraphSRError, ValueError):
    """A search window holds fewer candidate patches than neighbors requested."""


class ScaleMismatchError(GraphSRError, ValueError):
    """Two images that must be related by an exact integer scale are not."""


class CoverageError(GraphSRError, ValueError):
    """Patch reconstruction left at least one output pixel uncovered."""


class ImageIOError(GraphSRError, OSError):
    """Reading or writing an image file failed."""


class UnsupportedFormatError(ImageIOError):
    """The file format is not one of the supported formats (PNG, PPM, PGM)."""


class CorruptFileError(ImageIOError):
    """The file was recognized but its contents are malformed or truncated."""
