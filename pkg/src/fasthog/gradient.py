"""Orientation binning via a precomputed lookup table.

Central differences give an integer gradient pair (dx, dy) per pixel with
each component in -255..255, so every possible orientation fits in a
511x511 table of bin indices. Building the table once replaces the
atan2 call per pixel with a single lookup. Gradient magnitudes are
discarded: each pixel contributes a plain count of 1 to its bin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BinCountOutOfRange, ImageTooSmall
from .image_io import Image

#: Sentinel for pixels with no defined orientation (zero gradient or border).
NO_BIN = -1

MIN_BINS = 2
MAX_BINS = 64

_TWO_PI = 2.0 * math.pi
_LUT_SIDE = 511  # 2*255 + 1 offsets per axis


def bin_of(dx: int, dy: int, bins: int) -> int:
    """Map one gradient pair to its angular bin, or NO_BIN for (0, 0).

    The full circle [0, 2pi) is split into `bins` equal half-open
    sectors; an angle exactly on a boundary belongs to the higher bin.
    The clamp guards against the scaled angle rounding up to exactly
    `bins` when the normalized angle rounds to 2pi.
    """
    if dx == 0 and dy == 0:
        return NO_BIN
    phi = math.atan2(dy, dx)
    if phi < 0.0:
        phi += _TWO_PI
    return min(int(phi * bins / _TWO_PI), bins - 1)


@dataclass(frozen=True)
class OrientationLut:
    """511x511 table of bin indices, indexed by (dx+255, dy+255)."""

    bins: int
    table: np.ndarray

    def lookup(self, dx: int, dy: int) -> int:
        return int(self.table[dx + 255, dy + 255])


def build_lut(bins: int) -> OrientationLut:
    """Precompute bin_of over the whole (dx, dy) domain.

    Vectorized, but entry-for-entry identical to the scalar bin_of
    (both evaluate atan2 and the same scaled-floor expression).
    """
    if not MIN_BINS <= bins <= MAX_BINS:
        raise BinCountOutOfRange(f"bins must be in [{MIN_BINS}, {MAX_BINS}], got {bins}")
    d = np.arange(-255, 256, dtype=np.float64)
    dx, dy = np.meshgrid(d, d, indexing="ij")
    phi = np.arctan2(dy, dx)
    phi[phi < 0.0] += _TWO_PI
    table = np.floor(phi * bins / _TWO_PI).astype(np.int16)
    np.minimum(table, bins - 1, out=table)
    table[255, 255] = NO_BIN
    table.setflags(write=False)
    return OrientationLut(bins=bins, table=table)


@dataclass(frozen=True)
class BinMap:
    """Per-pixel orientation bin indices for one image.

    cells has shape (height, width), dtype int16; border pixels and
    zero-gradient pixels hold NO_BIN.
    """

    bins: int
    cells: np.ndarray

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]


def gradient_map(image: Image, lut: OrientationLut) -> BinMap:
    """Convert an image into its orientation bin map via the lookup table.

    Per interior pixel and channel: dx = P[x+1][y] - P[x-1][y],
    dy = P[x][y+1] - P[x][y-1]; the channel with the largest dx^2 + dy^2
    wins (ties to the lowest channel index) and its pair is looked up.
    Border pixels get NO_BIN since central differences need both
    neighbors.
    """
    if image.width < 3 or image.height < 3:
        raise ImageTooSmall(f"need at least 3x3, got {image.width}x{image.height}")

    planes = image.planes.astype(np.int16)
    dx = planes[:, 1:-1, 2:] - planes[:, 1:-1, :-2]
    dy = planes[:, 2:, 1:-1] - planes[:, :-2, 1:-1]

    if image.channels == 1:
        wdx, wdy = dx[0], dy[0]
    else:
        mag = dx.astype(np.int32) ** 2 + dy.astype(np.int32) ** 2
        winner = np.argmax(mag, axis=0)[None]  # argmax takes the first max
        wdx = np.take_along_axis(dx, winner, axis=0)[0]
        wdy = np.take_along_axis(dy, winner, axis=0)[0]

    cells = np.full((image.height, image.width), NO_BIN, dtype=np.int16)
    cells[1:-1, 1:-1] = lut.table[wdx + 255, wdy + 255]
    return BinMap(bins=lut.bins, cells=cells)
