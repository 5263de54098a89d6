"""Command-line surface: extract, detect, bench, selfcheck.

Exit codes: 0 success, 1 processing error (bad file, failed check),
2 usage error.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import bench as bench_mod
from .descriptor import (
    DescriptorGeometry,
    NORMALIZATIONS,
    naive_histogram,
    scan_descriptors,
    window_descriptor,
)
from .detector import Detection, load_model, nms, pyramid_scan, scan
from .errors import FastHogError
from .gradient import NO_BIN, bin_of, build_lut, gradient_map
from .image_io import Image, encode_ppm, read_image
from .integral import Rect, build_integral_stack, rect_histogram


def _parse_window(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like 64x128, got {text!r}")


def _add_geometry_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bins", type=int, default=9, help="orientation bins (default 9)")
    p.add_argument("--cell", type=int, default=8, help="cell side in pixels (default 8)")
    p.add_argument("--block", type=int, default=2, help="block side in cells (default 2)")
    p.add_argument("--block-stride", type=int, default=1,
                   help="block stride in cells (default 1)")
    p.add_argument("--window", type=_parse_window, default=(64, 128), metavar="WxH",
                   help="detection window size (default 64x128)")
    p.add_argument("--norm", choices=NORMALIZATIONS, default="none",
                   help="block normalization (default none)")


def _geometry(args) -> DescriptorGeometry:
    return DescriptorGeometry(
        window_w=args.window[0],
        window_h=args.window[1],
        cell=args.cell,
        block=args.block,
        block_stride=args.block_stride,
        bins=args.bins,
        normalization=args.norm,
    )


def _open_out(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline="\n"), True


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fasthog",
        description="Fast HOG descriptors via an orientation lookup table "
                    "and per-bin integral images.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="dump window descriptors for a PNM image")
    p.add_argument("--image", required=True, help="input PGM/PPM file")
    _add_geometry_args(p)
    p.add_argument("--stride", type=int, default=8, help="scan stride in pixels (default 8)")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("detect", help="run the sliding-window detector")
    p.add_argument("--image", required=True, help="input PGM/PPM file")
    p.add_argument("--model", required=True, help="model file (HOGMODEL 1 text format)")
    p.add_argument("--stride", type=int, default=8, help="scan stride in pixels (default 8)")
    p.add_argument("--threshold", type=float, default=0.0,
                   help="minimum score to report (default 0.0)")
    p.add_argument("--pyramid", action="store_true", help="scan across a scale pyramid")
    p.add_argument("--scale-step", type=float, default=1.2,
                   help="pyramid downscale factor per level (default 1.2)")
    p.add_argument("--nms-iou", type=float, default=0.5,
                   help="IoU threshold for non-maximum suppression (default 0.5)")
    p.add_argument("--annotate", metavar="OUT.ppm",
                   help="write the image with detection boxes burned in")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for the scan (results are identical)")
    p.add_argument("--seed", type=int, default=0,
                   help="accepted for reproducibility; detection is deterministic")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("bench", help="time the naive vs integral descriptor paths")
    p.add_argument("--image", required=True, help="input PGM/PPM file")
    _add_geometry_args(p)
    p.add_argument("--stride", type=int, default=1, help="scan stride in pixels (default 1)")
    p.add_argument("--repeats", type=int, default=5, help="timed repeats per path (default 5)")
    p.add_argument("--csv", action="store_true", help="also emit a CSV header and row")
    p.add_argument("--acc", type=int, choices=(16, 32), default=32,
                   help="integral accumulator width in bits (default 32)")
    p.add_argument("--plot", metavar="FIG.png",
                   help="render the benchmark figure to this file")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("selfcheck", help="run the built-in equivalence checks")
    p.add_argument("--bins", type=int, default=9, help="orientation bins (default 9)")
    p.add_argument("--trials", type=int, default=100,
                   help="random oracle-equivalence trials (default 100)")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.set_defaults(func=cmd_selfcheck)

    return parser


def _format_value(v, normalization: str) -> str:
    if normalization == "none":
        return str(int(v))
    return format(float(v), ".9g")


def cmd_extract(args) -> int:
    image = read_image(args.image)
    g = _geometry(args)
    stack = build_integral_stack(gradient_map(image, build_lut(g.bins)))
    out, close = _open_out(args.out)
    try:
        for x, y, values in scan_descriptors(stack, g, args.stride):
            parts = [str(x), str(y)]
            parts.extend(_format_value(v, g.normalization) for v in values)
            out.write(" ".join(parts) + "\n")
    finally:
        if close:
            out.close()
    return 0


def _burn_boxes(image: Image, detections: list[Detection]) -> bytes:
    """Burn 255-valued box outlines into a color copy of the image."""
    if image.channels == 3:
        rgb = image.planes.copy()
    else:
        rgb = np.repeat(image.planes, 3, axis=0).copy()
    for d in detections:
        x0, y0 = d.x, d.y
        x1, y1 = d.x + d.w - 1, d.y + d.h - 1
        rgb[:, y0, x0 : x1 + 1] = 255
        rgb[:, y1, x0 : x1 + 1] = 255
        rgb[:, y0 : y1 + 1, x0] = 255
        rgb[:, y0 : y1 + 1, x1] = 255
    return encode_ppm(rgb)


def cmd_detect(args) -> int:
    image = read_image(args.image)
    with open(args.model, "rb") as f:
        model = load_model(f.read())

    if args.pyramid:
        hits = pyramid_scan(image, model, args.scale_step, args.stride,
                            args.threshold, threads=args.threads)
    else:
        stack = build_integral_stack(gradient_map(image, build_lut(model.geometry.bins)))
        hits = scan(stack, model, args.stride, args.threshold, threads=args.threads)
    kept = nms(hits, args.nms_iou)

    out, close = _open_out(args.out)
    try:
        for d in kept:
            out.write(f"{d.x} {d.y} {d.w} {d.h} {d.score:.9g} {d.scale:.9g}\n")
    finally:
        if close:
            out.close()

    if args.annotate:
        with open(args.annotate, "wb") as f:
            f.write(_burn_boxes(image, kept))
    return 0


def cmd_bench(args) -> int:
    image = read_image(args.image)
    g = _geometry(args)
    report = bench_mod.run_bench(image, g, stride=args.stride,
                                 repeats=args.repeats, acc_width=args.acc)
    out, close = _open_out(args.out)
    try:
        out.write(bench_mod.format_report(report) + "\n")
        if args.csv:
            out.write(bench_mod.CSV_FIELDS + "\n")
            out.write(bench_mod.csv_row(report) + "\n")
    finally:
        if close:
            out.close()
    if args.plot:
        bench_mod.render_report_figure(report, args.plot)
    return 0


def _check_lut_exhaustive(bins: int) -> bool:
    lut = build_lut(bins)
    expected = np.array(
        [[bin_of(dx, dy, bins) for dy in range(-255, 256)] for dx in range(-255, 256)],
        dtype=np.int16,
    )
    return np.array_equal(lut.table, expected)


def _reference_binmap(image: Image, bins: int) -> np.ndarray:
    """Scalar per-pixel reference: central differences, channel-max rule,
    direct polar binning."""
    p = image.planes.astype(np.int32)
    cells = np.full((image.height, image.width), NO_BIN, dtype=np.int16)
    for y in range(1, image.height - 1):
        for x in range(1, image.width - 1):
            best_mag = -1
            best = (0, 0)
            for c in range(image.channels):
                dx = int(p[c, y, x + 1]) - int(p[c, y, x - 1])
                dy = int(p[c, y + 1, x]) - int(p[c, y - 1, x])
                mag = dx * dx + dy * dy
                if mag > best_mag:
                    best_mag = mag
                    best = (dx, dy)
            cells[y, x] = bin_of(best[0], best[1], bins)
    return cells


def cmd_selfcheck(args) -> int:
    rng = np.random.default_rng(args.seed)
    failures = 0

    ok = _check_lut_exhaustive(args.bins)
    print(f"lut exhaustive equivalence ({args.bins} bins, 511x511): "
          f"{'PASS' if ok else 'FAIL'}")
    failures += not ok

    lut = build_lut(args.bins)
    grad_ok = rect_ok = desc_ok = True
    rects_checked = 0
    for _ in range(args.trials):
        w = int(rng.integers(8, 41))
        h = int(rng.integers(8, 41))
        channels = int(rng.choice((1, 3)))
        image = Image(rng.integers(0, 256, size=(channels, h, w), dtype=np.uint8))

        binmap = gradient_map(image, lut)
        if not np.array_equal(binmap.cells, _reference_binmap(image, args.bins)):
            grad_ok = False

        stack = build_integral_stack(binmap)
        for _ in range(10):
            x0, x1 = sorted(rng.choice(w + 1, size=2, replace=False))
            y0, y1 = sorted(rng.choice(h + 1, size=2, replace=False))
            r = Rect(int(x0), int(y0), int(x1), int(y1))
            if not np.array_equal(rect_histogram(stack, r), naive_histogram(binmap, r)):
                rect_ok = False
            rects_checked += 1

        cell = int(rng.choice((2, 3, 4)))
        g = DescriptorGeometry(window_w=2 * cell, window_h=2 * cell, cell=cell,
                               block=2, block_stride=1, bins=args.bins)
        ox = int(rng.integers(0, w - g.window_w + 1))
        oy = int(rng.integers(0, h - g.window_h + 1))
        fast = window_descriptor(stack, (ox, oy), g)
        naive = np.concatenate([
            naive_histogram(binmap, Rect(ox + cx * cell, oy + cy * cell,
                                         ox + (cx + 1) * cell, oy + (cy + 1) * cell))
            for cy in range(2) for cx in range(2)
        ])
        if not np.array_equal(fast, naive):
            desc_ok = False

    print(f"gradient map vs direct computation ({args.trials} images): "
          f"{'PASS' if grad_ok else 'FAIL'}")
    print(f"rect histograms vs naive counting ({rects_checked} rects): "
          f"{'PASS' if rect_ok else 'FAIL'}")
    print(f"window descriptors vs naive assembly ({args.trials} windows): "
          f"{'PASS' if desc_ok else 'FAIL'}")
    failures += (not grad_ok) + (not rect_ok) + (not desc_ok)
    return 1 if failures else 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FastHogError as exc:
        print(f"fasthog: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"fasthog: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
