"""Exception hierarchy shared by every stage of the pipeline."""


class SkinSegError(Exception):
    """Base class for all errors raised by this package."""


class BadGeometry(SkinSegError, ValueError):
    pass


class DimensionMismatch(SkinSegError, ValueError):
    pass


class OutOfRange(SkinSegError, IndexError):
    pass


class ReconstructionError(SkinSegError, ValueError):
    """A YUV triple that no RGB444 pixel maps to."""


class UnsupportedFormat(SkinSegError, ValueError):
    pass


class PhaseError(SkinSegError, ValueError):
    """Camera byte stream lost its two-bytes-per-pixel alignment."""


class FrameGeometryError(SkinSegError, ValueError):
    pass


class ImageIOError(SkinSegError, OSError):
    pass


class MismatchError(SkinSegError):
    """Behavioral and cycle-accurate masks disagree."""

    def __init__(self, message, first=None, count=0):
        super().__init__(message)
        self.first = first
        self.count = count
