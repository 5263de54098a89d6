import math

import numpy as np
import pytest

from fasthog import Image, NO_BIN


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_image(rng, width, height, channels=1):
    return Image(rng.integers(0, 256, size=(channels, height, width), dtype=np.uint8))


def constant_image(width, height, value=128, channels=1):
    return Image(np.full((channels, height, width), value, dtype=np.uint8))


def reference_bin(dx, dy, bins):
    """Independent polar-conversion binning (does not call the library)."""
    if dx == 0 and dy == 0:
        return NO_BIN
    phi = math.atan2(dy, dx)
    if phi < 0.0:
        phi += 2.0 * math.pi
    return min(int(phi * bins / (2.0 * math.pi)), bins - 1)


def reference_binmap(image, bins):
    """Pure-scalar oracle: central differences + channel-max + atan2 binning."""
    h, w = image.height, image.width
    cells = np.full((h, w), NO_BIN, dtype=np.int16)
    p = image.planes
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            best_mag, best = -1, (0, 0)
            for c in range(image.channels):
                dx = int(p[c, y, x + 1]) - int(p[c, y, x - 1])
                dy = int(p[c, y + 1, x]) - int(p[c, y - 1, x])
                mag = dx * dx + dy * dy
                if mag > best_mag:
                    best_mag, best = mag, (dx, dy)
            cells[y, x] = reference_bin(best[0], best[1], bins)
    return cells


def loop_count(binmap, bin_index, x0, y0, x1, y1):
    """Pure-python pixel loop; the ground-truth count for one bin."""
    n = 0
    for y in range(y0, y1):
        for x in range(x0, x1):
            if binmap.cells[y, x] == bin_index:
                n += 1
    return n


def loop_histogram(binmap, x0, y0, x1, y1):
    counts = [0] * binmap.bins
    for y in range(y0, y1):
        for x in range(x0, x1):
            v = binmap.cells[y, x]
            if v >= 0:
                counts[v] += 1
    return np.array(counts, dtype=np.int64)


def random_rect(rng, width, height):
    x0, x1 = sorted(rng.choice(width + 1, size=2, replace=False))
    y0, y1 = sorted(rng.choice(height + 1, size=2, replace=False))
    return int(x0), int(y0), int(x1), int(y1)
