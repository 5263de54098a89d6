"""Typed errors raised by the fasthog library.

Everything derives from FastHogError so callers (and the CLI) can catch
the whole family at once.
"""


class FastHogError(Exception):
    """Base class for all fasthog errors."""


# --- PNM decoding/encoding ---

class UnsupportedMagic(FastHogError):
    """File is not a P2/P3/P5/P6 portable anymap."""


class MaxvalNot255(FastHogError):
    """Only 8-bit samples (maxval 255) are supported."""


class TruncatedData(FastHogError):
    """File ended before all samples were read."""


class NonNumericToken(FastHogError):
    """A header or ASCII sample token is not a valid number."""


# --- orientation binning ---

class BinCountOutOfRange(FastHogError):
    """Requested bin count outside the supported 2..64 range."""


class ImageTooSmall(FastHogError):
    """Central differences need at least a 3x3 image."""


# --- integral images ---

class AccumulatorOverflowRisk(FastHogError):
    """16-bit accumulators could overflow for this image size."""


class BinOutOfRange(FastHogError):
    """Bin index is not below the stack's bin count."""


class RectOutOfBounds(FastHogError):
    """Rectangle is empty or extends outside the grid."""


# --- descriptors ---

class InvalidGeometry(FastHogError):
    """Cell/block layout does not tile the window."""


class WindowOutOfBounds(FastHogError):
    """Window does not lie fully inside the stack."""


# --- detection ---

class BadHeader(FastHogError):
    """Model file header is malformed."""


class LengthMismatch(FastHogError):
    """Weight/descriptor length does not match the geometry."""


class NonFiniteWeight(FastHogError):
    """Model contains a NaN or infinite weight."""


class WindowLargerThanImage(FastHogError):
    """No window placement fits inside the image."""


# --- benchmarking ---

class NoValidWindows(FastHogError):
    """Benchmark grid contains no window positions."""


class PathMismatch(FastHogError):
    """Naive and integral paths disagreed; timings would be meaningless."""
