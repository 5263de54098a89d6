"""PNM (PGM/PPM) decoding and encoding.

The only ingestion path for the CLI. Supports the ASCII (P2/P3) and raw
(P5/P6) variants with maxval fixed at 255; anything else is rejected with
a typed error rather than rescaled.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MaxvalNot255, NonNumericToken, TruncatedData, UnsupportedMagic

_MAGIC_CHANNELS = {b"P2": 1, b"P3": 3, b"P5": 1, b"P6": 3}
_ASCII_MAGICS = (b"P2", b"P3")
_WHITESPACE = b" \t\r\n\v\f"


@dataclass(frozen=True)
class Image:
    """8-bit image, stored channel-planar.

    planes has shape (channels, height, width), dtype uint8. Grayscale
    images have one plane; color images have three (R, G, B).
    """

    planes: np.ndarray

    def __post_init__(self):
        if self.planes.ndim != 3 or self.planes.dtype != np.uint8:
            raise ValueError("planes must be a (channels, height, width) uint8 array")
        if self.planes.shape[0] not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {self.planes.shape[0]}")

    @property
    def channels(self) -> int:
        return self.planes.shape[0]

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    @property
    def width(self) -> int:
        return self.planes.shape[2]


class _Tokenizer:
    """Yields whitespace-separated tokens, skipping '#' comments."""

    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def skip_space(self) -> None:
        data, n = self.data, len(self.data)
        while self.pos < n:
            c = self.data[self.pos : self.pos + 1]
            if c in _WHITESPACE:
                self.pos += 1
            elif c == b"#":
                nl = data.find(b"\n", self.pos)
                self.pos = n if nl < 0 else nl + 1
            else:
                return

    def next_token(self) -> bytes:
        self.skip_space()
        if self.pos >= len(self.data):
            raise TruncatedData("unexpected end of file while reading tokens")
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos : self.pos + 1] not in _WHITESPACE:
            if self.data[self.pos : self.pos + 1] == b"#":
                break
            self.pos += 1
        return self.data[start : self.pos]

    def next_int(self, what: str, lo: int = 0, hi: int = 2**31) -> int:
        tok = self.next_token()
        try:
            value = int(tok)
        except ValueError:
            raise NonNumericToken(f"bad {what} token {tok!r}") from None
        if not lo <= value <= hi:
            raise NonNumericToken(f"{what} {value} out of range [{lo}, {hi}]")
        return value


def decode_pnm(data: bytes) -> Image:
    """Decode a P2/P3/P5/P6 anymap with maxval 255 into an Image.

    Header comments are skipped. Raw payloads must contain exactly
    width*height*channels bytes (trailing bytes are ignored).
    """
    magic = data[:2]
    if magic not in _MAGIC_CHANNELS:
        raise UnsupportedMagic(f"unsupported magic {magic!r}")
    channels = _MAGIC_CHANNELS[magic]

    tok = _Tokenizer(data, pos=2)
    width = tok.next_int("width", lo=1)
    height = tok.next_int("height", lo=1)
    maxval = tok.next_int("maxval", lo=1, hi=65535)
    if maxval != 255:
        raise MaxvalNot255(f"maxval must be 255, got {maxval}")

    count = width * height * channels
    if magic in _ASCII_MAGICS:
        flat = np.empty(count, dtype=np.uint8)
        for i in range(count):
            flat[i] = tok.next_int("sample", lo=0, hi=255)
    else:
        # exactly one whitespace byte separates the header from the payload
        payload = data[tok.pos + 1 :]
        if len(payload) < count:
            raise TruncatedData(f"expected {count} sample bytes, got {len(payload)}")
        flat = np.frombuffer(payload[:count], dtype=np.uint8)

    # file order is row-major with interleaved channels; store planar
    planes = flat.reshape(height, width, channels).transpose(2, 0, 1)
    return Image(np.ascontiguousarray(planes))


def encode_pgm(plane: np.ndarray) -> bytes:
    """Encode a single-channel 8-bit grid as a binary PGM (P5)."""
    plane = np.asarray(plane, dtype=np.uint8)
    if plane.ndim != 2 or plane.size == 0:
        raise ValueError("plane must be a nonempty 2-D array")
    h, w = plane.shape
    return b"P5\n%d %d\n255\n" % (w, h) + plane.tobytes()


def encode_ppm(planes: np.ndarray) -> bytes:
    """Encode a (3, height, width) 8-bit array as a binary PPM (P6)."""
    planes = np.asarray(planes, dtype=np.uint8)
    if planes.ndim != 3 or planes.shape[0] != 3 or planes.size == 0:
        raise ValueError("planes must be a nonempty (3, height, width) array")
    _, h, w = planes.shape
    interleaved = planes.transpose(1, 2, 0)
    return b"P6\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(interleaved).tobytes()


def encode_image(image: Image) -> bytes:
    """Encode an Image as P5 (grayscale) or P6 (color)."""
    if image.channels == 1:
        return encode_pgm(image.planes[0])
    return encode_ppm(image.planes)


def read_image(path: str) -> Image:
    with open(path, "rb") as f:
        return decode_pnm(f.read())


def write_image(path: str, image: Image) -> None:
    with open(path, "wb") as f:
        f.write(encode_image(image))
