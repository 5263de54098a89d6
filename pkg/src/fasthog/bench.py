"""Benchmark comparing naive histogram assembly against the integral path.

Both paths start from the same bin map and produce the same descriptors
for every window of a stride grid. The naive path recounts each cell's
pixels per window; the fast path builds the per-bin integral stack once
and reads four corners per cell. Equality of the two outputs is verified
on every window before any timing happens: a benchmark of mismatched
results would be meaningless.
"""
from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

import numpy as np

from .descriptor import (
    DescriptorGeometry,
    _assemble_blocks,
    window_descriptor,
    window_origins,
)
from .errors import NoValidWindows, PathMismatch
from .gradient import BinMap, build_lut, gradient_map
from .image_io import Image
from .integral import build_integral_stack

CSV_FIELDS = (
    "width,height,channels,bins,cell,block,block_stride,window_w,window_h,"
    "stride,acc_width,windows,repeats,naive_ns,fast_ns,stack_build_ns,speedup"
)


@dataclass(frozen=True)
class BenchReport:
    image_w: int
    image_h: int
    channels: int
    geometry: DescriptorGeometry
    stride: int
    acc_width: int
    window_count: int
    repeats: int
    naive_ns: int
    fast_ns: int          # includes the stack build
    stack_build_ns: int
    naive_runs_ns: tuple[int, ...]
    fast_runs_ns: tuple[int, ...]

    @property
    def speedup(self) -> float:
        return self.naive_ns / self.fast_ns


def _naive_pass(binmap: BinMap, g: DescriptorGeometry, oxs, oys) -> float:
    """One full naive sweep: per window, per cell, recount the pixels."""
    cell, bins = g.cell, g.bins
    n_cy, n_cx = g.cells_y, g.cells_x
    shifted = binmap.cells + np.int16(1)  # sentinel -> slot 0, dropped below
    sink = 0.0
    for oy in oys:
        for ox in oxs:
            grid = np.empty((n_cy, n_cx, bins), dtype=np.int64)
            for cy in range(n_cy):
                y = oy + cy * cell
                for cx in range(n_cx):
                    x = ox + cx * cell
                    grid[cy, cx] = np.bincount(
                        shifted[y : y + cell, x : x + cell].ravel(), minlength=bins + 1
                    )[1:]
            values = _assemble_blocks(grid, g)
            sink += float(values[0])
    return sink


def _fast_pass(binmap: BinMap, g: DescriptorGeometry, oxs, oys, acc_width: int):
    """One full integral sweep including the stack build."""
    t0 = time.perf_counter_ns()
    stack = build_integral_stack(binmap, acc_width)
    build_ns = time.perf_counter_ns() - t0
    sink = 0.0
    for oy in oys:
        for ox in oxs:
            values = window_descriptor(stack, (int(ox), int(oy)), g)
            sink += float(values[0])
    return build_ns, sink


def run_bench(
    image: Image,
    g: DescriptorGeometry,
    stride: int = 1,
    repeats: int = 5,
    acc_width: int = 32,
) -> BenchReport:
    """Time both descriptor paths over every window of the stride grid.

    Reports the median of `repeats` timed sweeps per path. Both paths are
    first run untimed over the whole grid and compared window by window;
    any disagreement aborts with PathMismatch.
    """
    if repeats < 3:
        raise ValueError(f"repeats must be >= 3, got {repeats}")
    lut = build_lut(g.bins)
    binmap = gradient_map(image, lut)
    oxs, oys = window_origins(image.width, image.height, g, stride)
    window_count = len(oxs) * len(oys)
    if window_count == 0:
        raise NoValidWindows(
            f"no {g.window_w}x{g.window_h} window fits a {image.width}x{image.height} image"
        )

    _verify_paths(binmap, g, oxs, oys, acc_width)

    naive_runs = []
    for _ in range(repeats):
        t0 = time.perf_counter_ns()
        _naive_pass(binmap, g, oxs, oys)
        naive_runs.append(time.perf_counter_ns() - t0)

    fast_runs = []
    build_runs = []
    for _ in range(repeats):
        t0 = time.perf_counter_ns()
        build_ns, _ = _fast_pass(binmap, g, oxs, oys, acc_width)
        fast_runs.append(time.perf_counter_ns() - t0)
        build_runs.append(build_ns)

    return BenchReport(
        image_w=image.width,
        image_h=image.height,
        channels=image.channels,
        geometry=g,
        stride=stride,
        acc_width=acc_width,
        window_count=window_count,
        repeats=repeats,
        naive_ns=int(statistics.median(naive_runs)),
        fast_ns=int(statistics.median(fast_runs)),
        stack_build_ns=int(statistics.median(build_runs)),
        naive_runs_ns=tuple(naive_runs),
        fast_runs_ns=tuple(fast_runs),
    )


def _verify_paths(binmap: BinMap, g: DescriptorGeometry, oxs, oys, acc_width: int) -> None:
    cell, bins = g.cell, g.bins
    stack = build_integral_stack(binmap, acc_width)
    shifted = binmap.cells + np.int16(1)
    for oy in oys:
        for ox in oxs:
            grid = np.empty((g.cells_y, g.cells_x, bins), dtype=np.int64)
            for cy in range(g.cells_y):
                y = oy + cy * cell
                for cx in range(g.cells_x):
                    x = ox + cx * cell
                    grid[cy, cx] = np.bincount(
                        shifted[y : y + cell, x : x + cell].ravel(), minlength=bins + 1
                    )[1:]
            naive = _assemble_blocks(grid, g)
            fast = window_descriptor(stack, (int(ox), int(oy)), g)
            if not np.array_equal(naive, fast):
                raise PathMismatch(
                    f"descriptor mismatch at window ({ox}, {oy}); refusing to time"
                )


def format_report(report: BenchReport) -> str:
    g = report.geometry
    lines = [
        f"image: {report.image_w}x{report.image_h} ({report.channels} channel(s))",
        f"bins: {g.bins}",
        f"window: {g.window_w}x{g.window_h}, cell {g.cell}, block {g.block}, "
        f"block stride {g.block_stride}, normalization {g.normalization}",
        f"scan stride: {report.stride}",
        f"accumulator: {report.acc_width}-bit",
        f"windows: {report.window_count}",
        f"repeats: {report.repeats} (median)",
        f"naive total: {report.naive_ns} ns ({report.naive_ns / 1e6:.2f} ms)",
        f"integral total: {report.fast_ns} ns ({report.fast_ns / 1e6:.2f} ms, "
        f"incl. stack build)",
        f"stack build: {report.stack_build_ns} ns ({report.stack_build_ns / 1e6:.2f} ms)",
        f"speedup: {report.speedup:.2f}x",
    ]
    return "\n".join(lines)


def csv_row(report: BenchReport) -> str:
    g = report.geometry
    values = (
        report.image_w, report.image_h, report.channels, g.bins, g.cell, g.block,
        g.block_stride, g.window_w, g.window_h, report.stride, report.acc_width,
        report.window_count, report.repeats, report.naive_ns, report.fast_ns,
        report.stack_build_ns, f"{report.speedup:.6g}",
    )
    return ",".join(str(v) for v in values)


def render_report_figure(report: BenchReport, path: str) -> None:
    """Write a PNG/PDF figure of the benchmark: total times per path plus
    the per-repeat samples behind the medians."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax_total, ax_runs) = plt.subplots(1, 2, figsize=(9, 4))

    naive_ms = report.naive_ns / 1e6
    fast_ms = report.fast_ns / 1e6
    build_ms = report.stack_build_ns / 1e6
    ax_total.bar(["naive"], [naive_ms], color="#c44e52", label="naive recount")
    ax_total.bar(["integral"], [fast_ms - build_ms], color="#4c72b0", label="window sweep")
    ax_total.bar(
        ["integral"], [build_ms], bottom=[fast_ms - build_ms],
        color="#8caed6", label="stack build",
    )
    ax_total.set_ylabel("median total time (ms)")
    ax_total.set_title(f"{report.window_count} windows, speedup {report.speedup:.2f}x")
    ax_total.legend(fontsize=8)

    reps = np.arange(1, report.repeats + 1)
    ax_runs.plot(reps, np.asarray(report.naive_runs_ns) / 1e6, "o-",
                 color="#c44e52", label="naive")
    ax_runs.plot(reps, np.asarray(report.fast_runs_ns) / 1e6, "s-",
                 color="#4c72b0", label="integral")
    ax_runs.set_xlabel("repeat")
    ax_runs.set_ylabel("time (ms)")
    ax_runs.set_xticks(reps)
    ax_runs.set_title(
        f"{report.image_w}x{report.image_h}, stride {report.stride}, "
        f"{report.geometry.bins} bins"
    )
    ax_runs.legend(fontsize=8)

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
