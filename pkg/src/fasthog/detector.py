"""Sliding-window detection with a linear model over fast descriptors.

Training is out of scope; models are loaded from a small text format (or
built synthetically in tests). Scanning walks a stride grid of window
origins, scores each descriptor with one inner product, and optionally
repeats across a bilinear image pyramid. Overlapping hits are merged
with greedy non-maximum suppression.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .descriptor import (
    CellHistogramCache,
    DescriptorGeometry,
    descriptor_length,
    window_origins,
)
from .errors import (
    BadHeader,
    LengthMismatch,
    NonFiniteWeight,
    WindowLargerThanImage,
)
from .gradient import OrientationLut, build_lut, gradient_map
from .image_io import Image
from .integral import IntegralStack, build_integral_stack

MODEL_MAGIC = "HOGMODEL 1"


@dataclass(frozen=True)
class LinearModel:
    """Weight vector + bias over a fixed descriptor geometry."""

    geometry: DescriptorGeometry
    weights: np.ndarray
    bias: float

    def __post_init__(self):
        expected = descriptor_length(self.geometry)
        if self.weights.ndim != 1 or len(self.weights) != expected:
            raise LengthMismatch(
                f"geometry needs {expected} weights, got {len(self.weights)}"
            )


@dataclass(frozen=True)
class Detection:
    """Scored box in original-image coordinates."""

    x: int
    y: int
    w: int
    h: int
    score: float
    scale: float = 1.0

    @property
    def box(self) -> tuple[int, int, int, int]:
        return (self.x, self.y, self.w, self.h)


def load_model(data: bytes | str) -> LinearModel:
    """Parse the text model format.

    Line 1: "HOGMODEL 1". Line 2: window_w window_h cell block
    block_stride bins normalization. Line 3: bias. Then one weight per
    line; the count must match the geometry's descriptor length.
    """
    if isinstance(data, bytes):
        data = data.decode("ascii", errors="replace")
    lines = [ln.strip() for ln in data.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0] != MODEL_MAGIC:
        raise BadHeader(f"expected {MODEL_MAGIC!r} on line 1")
    if len(lines) < 3:
        raise BadHeader("model file needs a geometry line and a bias line")

    fields = lines[1].split()
    if len(fields) != 7:
        raise BadHeader(f"geometry line needs 7 fields, got {len(fields)}")
    try:
        dims = [int(f) for f in fields[:6]]
    except ValueError as exc:
        raise BadHeader(f"bad geometry field: {exc}") from None
    geometry = DescriptorGeometry(
        window_w=dims[0],
        window_h=dims[1],
        cell=dims[2],
        block=dims[3],
        block_stride=dims[4],
        bins=dims[5],
        normalization=fields[6],
    )

    try:
        bias = float(lines[2])
    except ValueError:
        raise BadHeader(f"bad bias {lines[2]!r}") from None

    expected = descriptor_length(geometry)
    raw = lines[3:]
    if len(raw) != expected:
        raise LengthMismatch(f"expected {expected} weights, found {len(raw)}")
    try:
        weights = np.array([float(w) for w in raw], dtype=np.float64)
    except ValueError as exc:
        raise BadHeader(f"bad weight line: {exc}") from None
    if not math.isfinite(bias) or not np.all(np.isfinite(weights)):
        raise NonFiniteWeight("model contains NaN or infinite values")
    weights.setflags(write=False)
    return LinearModel(geometry=geometry, weights=weights, bias=bias)


def save_model(model: LinearModel) -> str:
    g = model.geometry
    header = (
        f"{MODEL_MAGIC}\n"
        f"{g.window_w} {g.window_h} {g.cell} {g.block} {g.block_stride} "
        f"{g.bins} {g.normalization}\n"
        f"{float(model.bias)!r}\n"
    )
    return header + "".join(f"{w!r}\n" for w in model.weights.tolist())


def score_window(model: LinearModel, values: np.ndarray) -> float:
    """Inner product of the model weights with one descriptor, plus bias."""
    if len(values) != len(model.weights):
        raise LengthMismatch(
            f"descriptor length {len(values)} != weights length {len(model.weights)}"
        )
    return float(np.dot(model.weights, np.asarray(values, dtype=np.float64)) + model.bias)


def _scan_rows(cache, model, oxs, oys, iy_range, threshold, scale):
    out = []
    g = model.geometry
    ww = int(round(g.window_w * scale))
    wh = int(round(g.window_h * scale))
    for iy in iy_range:
        oy = int(oys[iy])
        for ix in range(len(oxs)):
            score = float(
                np.dot(model.weights, cache.descriptor(ix, iy)) + model.bias
            )
            if score > threshold:
                ox = int(oxs[ix])
                out.append((ox, oy, ww, wh, score))
    return out


def scan(
    stack: IntegralStack,
    model: LinearModel,
    stride: int,
    threshold: float,
    threads: int = 1,
    scale: float = 1.0,
) -> list[Detection]:
    """Score every window on the stride grid; keep scores above threshold.

    Origins are visited row-major and the output preserves that order.
    `threads` only partitions the work; results are identical to the
    sequential scan. `scale` tags detections and maps boxes back to
    original coordinates during pyramid scans.
    """
    g = model.geometry
    if g.window_w > stack.width or g.window_h > stack.height:
        raise WindowLargerThanImage(
            f"window {g.window_w}x{g.window_h} exceeds image {stack.width}x{stack.height}"
        )
    oxs, oys = window_origins(stack.width, stack.height, g, stride)
    cache = CellHistogramCache(stack, g, oxs, oys)

    n_rows = len(oys)
    if threads <= 1 or n_rows <= 1:
        rows = _scan_rows(cache, model, oxs, oys, range(n_rows), threshold, scale)
    else:
        workers = min(threads, n_rows)
        chunk = (n_rows + workers - 1) // workers
        ranges = [range(i, min(i + chunk, n_rows)) for i in range(0, n_rows, chunk)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(
                lambda rng: _scan_rows(cache, model, oxs, oys, rng, threshold, scale),
                ranges,
            )
            rows = [hit for part in parts for hit in part]

    dets = []
    for ox, oy, ww, wh, score in rows:
        x = int(round(ox * scale))
        y = int(round(oy * scale))
        dets.append(Detection(x=x, y=y, w=ww, h=wh, score=score, scale=scale))
    return dets


def _resize_bilinear(image: Image, new_w: int, new_h: int) -> Image:
    """Downscale with separable bilinear interpolation (pixel centers
    aligned)."""
    h, w = image.height, image.width
    sy = np.clip((np.arange(new_h) + 0.5) * (h / new_h) - 0.5, 0.0, h - 1)
    sx = np.clip((np.arange(new_w) + 0.5) * (w / new_w) - 0.5, 0.0, w - 1)
    y0 = np.floor(sy).astype(np.intp)
    x0 = np.floor(sx).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (sy - y0)[:, None]
    fx = (sx - x0)[None, :]

    out = np.empty((image.channels, new_h, new_w), dtype=np.uint8)
    for c in range(image.channels):
        plane = image.planes[c].astype(np.float64)
        rows = plane[y0, :] * (1.0 - fy) + plane[y1, :] * fy
        mixed = rows[:, x0] * (1.0 - fx) + rows[:, x1] * fx
        out[c] = np.clip(np.rint(mixed), 0, 255).astype(np.uint8)
    return Image(out)


def pyramid_scan(
    image: Image,
    model: LinearModel,
    scale_step: float,
    stride: int,
    threshold: float,
    lut: OrientationLut | None = None,
    acc_width: int = 32,
    threads: int = 1,
) -> list[Detection]:
    """Scan the image and successively downscaled copies of it.

    Level k is the original resized by 1/scale_step**k (dimensions
    rounded down); levels stop once the window no longer fits. Boxes are
    mapped back by the level's cumulative scale factor.
    """
    if scale_step <= 1.0:
        raise ValueError(f"scale_step must be > 1, got {scale_step}")
    g = model.geometry
    if g.window_w > image.width or g.window_h > image.height:
        raise WindowLargerThanImage(
            f"window {g.window_w}x{g.window_h} exceeds image {image.width}x{image.height}"
        )
    if lut is None:
        lut = build_lut(g.bins)

    detections: list[Detection] = []
    level = 0
    while True:
        factor = scale_step**level
        w = int(image.width / factor)
        h = int(image.height / factor)
        if w < g.window_w or h < g.window_h:
            break
        scaled = image if level == 0 else _resize_bilinear(image, w, h)
        stack = build_integral_stack(gradient_map(scaled, lut), acc_width)
        hits = scan(stack, model, stride, threshold, threads=threads, scale=factor)
        for d in hits:
            # rounding can overshoot the original bounds by a pixel
            x = min(max(d.x, 0), image.width - 1)
            y = min(max(d.y, 0), image.height - 1)
            bw = min(d.w, image.width - x)
            bh = min(d.h, image.height - y)
            detections.append(Detection(x=x, y=y, w=bw, h=bh, score=d.score, scale=d.scale))
        level += 1
    return detections


def iou(a: tuple[float, float, float, float], b: tuple[float, float, float, float]) -> float:
    """Intersection-over-union of two (x, y, w, h) boxes."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    ix = max(0.0, min(ax + aw, bx + bw) - max(ax, bx))
    iy = max(0.0, min(ay + ah, by + bh) - max(ay, by))
    inter = ix * iy
    if inter <= 0.0:
        return 0.0
    union = aw * ah + bw * bh - inter
    return inter / union


def nms(detections: list[Detection], iou_threshold: float) -> list[Detection]:
    """Greedy non-maximum suppression.

    Sorted by score descending (ties by y, x, scale for determinism); a
    detection survives iff it overlaps every already-kept box by at most
    iou_threshold.
    """
    if not 0.0 <= iou_threshold <= 1.0:
        raise ValueError(f"iou_threshold must be in [0, 1], got {iou_threshold}")
    ordered = sorted(detections, key=lambda d: (-d.score, d.y, d.x, d.scale))
    kept: list[Detection] = []
    for cand in ordered:
        if all(iou(cand.box, k.box) <= iou_threshold for k in kept):
            kept.append(cand)
    return kept
