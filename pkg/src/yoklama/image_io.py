"""Raster image plumbing: PGM/PPM codecs, grayscale conversion, bilinear
resizing, and multi-scale pyramids.

Pixels are carried as float64 in [0, 255] throughout the pipeline so the
gradient math downstream stays exact; quantization to 8 bits happens only
when encoding.  Only the binary netpbm formats (P5/P6, maxval 255) are
supported; anything else must be converted before it enters the pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DecodeError(ValueError):
    """Raised when PGM/PPM bytes cannot be decoded."""


def _as_pixel_array(data, shape_hint: str) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(data, dtype=np.float64))
    if arr.size == 0:
        raise ValueError(f"empty {shape_hint} pixel data")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{shape_hint} pixels must be finite")
    if arr.min() < 0.0 or arr.max() > 255.0:
        raise ValueError(f"{shape_hint} pixels must lie in [0, 255]")
    return arr


@dataclass(frozen=True)
class GrayImage:
    """Single-channel raster; ``pixels`` is (height, width) float64.

    Arrays are not defensively copied: treat an image as immutable once
    constructed.
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = _as_pixel_array(self.pixels, "gray")
        if arr.ndim != 2:
            raise ValueError("gray pixels must be a 2-D array")
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class RgbImage:
    """Three-channel raster; ``pixels`` is (height, width, 3) float64."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = _as_pixel_array(self.pixels, "rgb")
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError("rgb pixels must be a (height, width, 3) array")
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class PyramidLevel:
    image: GrayImage
    scale: float  # ratio of original size to this level's size, >= 1


@dataclass(frozen=True)
class ImagePyramid:
    levels: tuple[PyramidLevel, ...]


def _header_tokens(data: bytes) -> tuple[list[bytes], int]:
    """Read the four whitespace-separated header tokens.

    Returns the tokens and the payload offset (one separator byte after the
    maxval token, as the binary netpbm formats require).
    """
    tokens: list[bytes] = []
    pos = 0
    n = len(data)
    while len(tokens) < 4:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        start = pos
        while pos < n and not data[pos : pos + 1].isspace():
            pos += 1
        if pos == start:
            raise DecodeError("truncated header")
        tokens.append(data[start:pos])
    if pos >= n or not data[pos : pos + 1].isspace():
        raise DecodeError("missing separator after maxval")
    return tokens, pos + 1


def decode_image(data: bytes) -> GrayImage | RgbImage:
    """Decode binary PGM (P5) or PPM (P6) bytes, maxval 255."""
    if len(data) < 2:
        raise DecodeError("truncated header")
    if data[:2] not in (b"P5", b"P6"):
        raise DecodeError(f"unsupported magic number {data[:2]!r}")
    tokens, offset = _header_tokens(data)
    magic = tokens[0]
    if magic not in (b"P5", b"P6"):
        raise DecodeError(f"unsupported magic number {magic!r}")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise DecodeError("malformed header field") from None
    if width <= 0 or height <= 0:
        raise DecodeError("non-positive dimensions")
    if maxval != 255:
        raise DecodeError(f"unsupported maxval {maxval} (only 255)")
    channels = 1 if magic == b"P5" else 3
    expected = width * height * channels
    payload = data[offset:]
    if len(payload) < expected:
        raise DecodeError("truncated pixel payload")
    if len(payload) > expected:
        raise DecodeError("oversized pixel payload")
    values = np.frombuffer(payload, dtype=np.uint8).astype(np.float64)
    if channels == 1:
        return GrayImage(values.reshape(height, width))
    return RgbImage(values.reshape(height, width, 3))


def encode_image(image: GrayImage) -> bytes:
    """Encode to binary PGM; values are rounded to the nearest integer."""
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    return header + np.rint(image.pixels).astype(np.uint8).tobytes()


def to_grayscale(image: RgbImage) -> GrayImage:
    """Luma conversion: 0.299 r + 0.587 g + 0.114 b, kept as real numbers."""
    p = image.pixels
    gray = p[:, :, 0] * 0.299 + p[:, :, 1] * 0.587 + p[:, :, 2] * 0.114
    # The weights sum to 1 only in decimal; clip the last-ulp excess.
    return GrayImage(np.clip(gray, 0.0, 255.0))


def resize_bilinear(image: GrayImage, new_width: int, new_height: int) -> GrayImage:
    """Bilinear resize with half-pixel centers and clamp-to-edge sampling.

    Interpolation uses the lerp form a + f*(b - a), which keeps output
    values inside [min(input), max(input)] and leaves constant images
    bit-identical.
    """
    if new_width <= 0 or new_height <= 0:
        raise ValueError("target dimensions must be positive")
    src = image.pixels
    height, width = src.shape
    xs = (np.arange(new_width, dtype=np.float64) + 0.5) * (width / new_width) - 0.5
    ys = (np.arange(new_height, dtype=np.float64) + 0.5) * (height / new_height) - 0.5
    xs = np.clip(xs, 0.0, width - 1.0)
    ys = np.clip(ys, 0.0, height - 1.0)
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    x1 = np.minimum(x0 + 1, width - 1)
    y1 = np.minimum(y0 + 1, height - 1)
    fx = xs - x0
    fy = (ys - y0)[:, None]
    top = src[np.ix_(y0, x0)]
    top = top + fx * (src[np.ix_(y0, x1)] - top)
    bottom = src[np.ix_(y1, x0)]
    bottom = bottom + fx * (src[np.ix_(y1, x1)] - bottom)
    return GrayImage(top + fy * (bottom - top))


def build_pyramid(image: GrayImage, scale_step: float, min_side: int) -> ImagePyramid:
    """Downscale by powers of ``scale_step`` until a side would drop below
    ``min_side``; level k has dims floor(original / scale_step**k).

    Requires min_side * (1 - 1/scale_step) >= 1 so that consecutive level
    widths are strictly decreasing.
    """
    if scale_step <= 1.0:
        raise ValueError("scale_step must be > 1")
    if min_side < 1 or min_side > min(image.width, image.height):
        raise ValueError("min_side must be in [1, min(width, height)]")
    if min_side * (1.0 - 1.0 / scale_step) < 1.0:
        raise ValueError(
            "scale_step too fine for min_side: levels would not shrink strictly"
        )
    levels = []
    k = 0
    while True:
        scale = scale_step**k
        w = int(image.width / scale)
        h = int(image.height / scale)
        if w < min_side or h < min_side:
            break
        level_image = image if k == 0 else resize_bilinear(image, w, h)
        levels.append(PyramidLevel(level_image, float(scale)))
        k += 1
    return ImagePyramid(tuple(levels))


def pyramid_level_count(width: int, height: int, scale_step: float, min_side: int) -> int:
    """Closed-form level count; build_pyramid must agree with it."""
    ratio = min(width, height) / min_side
    return 1 + math.floor(math.log(ratio) / math.log(scale_step) + 1e-12)
