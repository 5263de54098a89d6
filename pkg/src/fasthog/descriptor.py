"""Window descriptors assembled from overlapping block histograms.

A detection window is tiled into square cells; blocks of adjacent cells
slide over the cell lattice, and the descriptor is the concatenation of
every block's cell histograms (blocks row-major, cells within a block
row-major, bins ascending). Cell histograms come from the integral stack
in O(bins) each; naive_histogram recounts pixels directly and serves as
the correctness oracle and benchmark baseline.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidGeometry, WindowOutOfBounds
from .gradient import BinMap
from .integral import IntegralStack, Rect, check_rect

NORMALIZATIONS = ("none", "l1", "l2")

_EPS = 1e-6


@dataclass(frozen=True)
class DescriptorGeometry:
    """Cell/block layout of a detection window."""

    window_w: int
    window_h: int
    cell: int
    block: int = 2
    block_stride: int = 1
    bins: int = 9
    normalization: str = "none"

    def __post_init__(self):
        if self.window_w < 1 or self.window_h < 1 or self.cell < 1:
            raise InvalidGeometry("window and cell sizes must be positive")
        if self.window_w % self.cell or self.window_h % self.cell:
            raise InvalidGeometry(
                f"cell {self.cell} does not divide window {self.window_w}x{self.window_h}"
            )
        if not 1 <= self.block <= min(self.cells_x, self.cells_y):
            raise InvalidGeometry(
                f"block {self.block} does not fit {self.cells_x}x{self.cells_y} cells"
            )
        if self.block_stride < 1:
            raise InvalidGeometry("block_stride must be >= 1")
        if self.bins < 1:
            raise InvalidGeometry("bins must be >= 1")
        if self.normalization not in NORMALIZATIONS:
            raise InvalidGeometry(f"unknown normalization {self.normalization!r}")

    @property
    def cells_x(self) -> int:
        return self.window_w // self.cell

    @property
    def cells_y(self) -> int:
        return self.window_h // self.cell

    @property
    def blocks_x(self) -> int:
        return (self.cells_x - self.block) // self.block_stride + 1

    @property
    def blocks_y(self) -> int:
        return (self.cells_y - self.block) // self.block_stride + 1


def descriptor_length(g: DescriptorGeometry) -> int:
    return g.blocks_x * g.blocks_y * g.block * g.block * g.bins


def naive_histogram(binmap: BinMap, r: Rect) -> np.ndarray:
    """Histogram of r by walking every pixel and counting its bin.

    The definitional counting path: sentinel pixels are skipped, every
    other pixel bumps its bin by one, and the cost grows with the
    rectangle's area. This is the correctness oracle for the integral
    path.
    """
    check_rect(r, binmap.width, binmap.height)
    counts = [0] * binmap.bins
    for row in binmap.cells[r.y0 : r.y1, r.x0 : r.x1].tolist():
        for v in row:
            if v >= 0:
                counts[v] += 1
    return np.array(counts, dtype=np.int64)


def normalize(values: np.ndarray, scheme: str) -> np.ndarray:
    """Normalize one block sub-vector; the fixed epsilon keeps zero
    vectors at zero instead of dividing by zero."""
    if scheme == "none":
        return values
    v = np.asarray(values, dtype=np.float64)
    if scheme == "l1":
        return v / (np.abs(v).sum() + _EPS)
    if scheme == "l2":
        return v / np.sqrt((v * v).sum() + _EPS * _EPS)
    raise InvalidGeometry(f"unknown normalization {scheme!r}")


def _assemble_blocks(cell_grid: np.ndarray, g: DescriptorGeometry) -> np.ndarray:
    """Concatenate block sub-vectors from a (cells_y, cells_x, bins) grid
    of cell histograms, applying per-block normalization.

    Both the direct and the cached descriptor paths funnel through here,
    which is what makes them bit-identical.
    """
    bl, bs = g.block, g.block_stride
    windows = sliding_window_view(cell_grid, (bl, bl), axis=(0, 1))[::bs, ::bs]
    blocks = np.moveaxis(windows, 2, 4)  # (by, bx, cell_y, cell_x, bin)
    if g.normalization == "none":
        return blocks.reshape(-1)
    flat = blocks.reshape(g.blocks_y, g.blocks_x, -1).astype(np.float64)
    if g.normalization == "l1":
        denom = np.abs(flat).sum(axis=2, keepdims=True) + _EPS
    else:
        denom = np.sqrt((flat * flat).sum(axis=2, keepdims=True) + _EPS * _EPS)
    return (flat / denom).reshape(-1)


def window_descriptor(
    stack: IntegralStack, origin: tuple[int, int], g: DescriptorGeometry
) -> np.ndarray:
    """Descriptor of the window at origin, straight from the stack.

    All cell histograms of the window come from one corner-grid gather:
    adjacent cells share summed-area corners, so an (cells_y+1) x
    (cells_x+1) grid of corner reads covers every cell.
    """
    ox, oy = origin
    if g.bins != stack.bins:
        raise InvalidGeometry(f"geometry bins {g.bins} != stack bins {stack.bins}")
    if not (0 <= ox and 0 <= oy and ox + g.window_w <= stack.width and oy + g.window_h <= stack.height):
        raise WindowOutOfBounds(
            f"window {g.window_w}x{g.window_h} at ({ox}, {oy}) exceeds "
            f"{stack.width}x{stack.height}"
        )
    xs = ox + g.cell * np.arange(g.cells_x + 1)
    ys = oy + g.cell * np.arange(g.cells_y + 1)
    corners = stack.planes[:, ys[:, None], xs[None, :]].astype(np.int64)
    hists = (
        corners[:, 1:, 1:] + corners[:, :-1, :-1] - corners[:, :-1, 1:] - corners[:, 1:, :-1]
    )
    return _assemble_blocks(np.moveaxis(hists, 0, 2), g)


class CellHistogramCache:
    """Write-once table of cell histograms for a whole scan.

    Every cell origin any window of the scan will touch is histogrammed
    up front in one vectorized pass; windows then assemble their
    descriptors by indexing into the shared grid. Immutable after
    construction, so concurrent readers are safe.
    """

    def __init__(
        self,
        stack: IntegralStack,
        g: DescriptorGeometry,
        origin_xs: np.ndarray,
        origin_ys: np.ndarray,
    ):
        self.geometry = g
        cell = g.cell
        offs_x = cell * np.arange(g.cells_x)
        offs_y = cell * np.arange(g.cells_y)
        cell_xs = np.unique(np.asarray(origin_xs)[:, None] + offs_x[None, :])
        cell_ys = np.unique(np.asarray(origin_ys)[:, None] + offs_y[None, :])

        p = stack.planes
        iy0, ix0 = cell_ys[:, None], cell_xs[None, :]
        grid = (
            p[:, iy0 + cell, ix0 + cell].astype(np.int64)
            + p[:, iy0, ix0]
            - p[:, iy0, ix0 + cell]
            - p[:, iy0 + cell, ix0]
        )
        self.grid = np.moveaxis(grid, 0, 2)  # (n_cell_ys, n_cell_xs, bins)
        self.grid.setflags(write=False)
        # per-window-origin positions of its cells inside the grid
        self.col_idx = np.searchsorted(cell_xs, np.asarray(origin_xs)[:, None] + offs_x[None, :])
        self.row_idx = np.searchsorted(cell_ys, np.asarray(origin_ys)[:, None] + offs_y[None, :])

    def window_cells(self, origin_ix: int, origin_iy: int) -> np.ndarray:
        """Cell-histogram grid of the window at origin index (ix, iy)."""
        return self.grid[np.ix_(self.row_idx[origin_iy], self.col_idx[origin_ix])]

    def descriptor(self, origin_ix: int, origin_iy: int) -> np.ndarray:
        return _assemble_blocks(self.window_cells(origin_ix, origin_iy), self.geometry)


def window_origins(
    width: int, height: int, g: DescriptorGeometry, stride: int
) -> tuple[np.ndarray, np.ndarray]:
    """Row-major grid of window origins that fit a width x height image."""
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    oxs = np.arange(0, width - g.window_w + 1, stride)
    oys = np.arange(0, height - g.window_h + 1, stride)
    return oxs, oys


def scan_descriptors(stack: IntegralStack, g: DescriptorGeometry, stride: int):
    """Yield (x, y, descriptor) for every window of a grid scan, row-major.

    Uses the cell cache; output is bit-identical to calling
    window_descriptor per origin.
    """
    if g.window_w > stack.width or g.window_h > stack.height:
        raise WindowOutOfBounds(
            f"window {g.window_w}x{g.window_h} exceeds {stack.width}x{stack.height}"
        )
    oxs, oys = window_origins(stack.width, stack.height, g, stride)
    cache = CellHistogramCache(stack, g, oxs, oys)
    for iy, oy in enumerate(oys):
        for ix, ox in enumerate(oxs):
            yield int(ox), int(oy), cache.descriptor(ix, iy)
