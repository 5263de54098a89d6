"""Fast HOG descriptors via an orientation lookup table and per-bin
integral images, plus a sliding-window linear detector."""

from .bench import BenchReport, csv_row, format_report, render_report_figure, run_bench
from .descriptor import (
    CellHistogramCache,
    DescriptorGeometry,
    NORMALIZATIONS,
    descriptor_length,
    naive_histogram,
    normalize,
    scan_descriptors,
    window_descriptor,
    window_origins,
)
from .detector import (
    Detection,
    LinearModel,
    iou,
    load_model,
    nms,
    pyramid_scan,
    save_model,
    scan,
    score_window,
)
from .errors import (
    AccumulatorOverflowRisk,
    BadHeader,
    BinCountOutOfRange,
    BinOutOfRange,
    FastHogError,
    ImageTooSmall,
    InvalidGeometry,
    LengthMismatch,
    MaxvalNot255,
    NonFiniteWeight,
    NonNumericToken,
    NoValidWindows,
    PathMismatch,
    RectOutOfBounds,
    TruncatedData,
    UnsupportedMagic,
    WindowLargerThanImage,
    WindowOutOfBounds,
)
from .gradient import NO_BIN, BinMap, OrientationLut, bin_of, build_lut, gradient_map
from .image_io import (
    Image,
    decode_pnm,
    encode_image,
    encode_pgm,
    encode_ppm,
    read_image,
    write_image,
)
from .integral import (
    IntegralStack,
    Rect,
    build_integral_stack,
    rect_count,
    rect_histogram,
)

__version__ = "0.1.0"
