"""Core raster types: 8-bit images, PNM codecs, integral images, patch cropping.

Images are stored as numpy arrays of shape (height, width, channels) with
dtype uint8, i.e. row-major and channel-interleaved.  The only on-disk
formats are binary PGM (P5) and PPM (P6) with maxval 255; the encoder emits
one canonical byte layout so files are reproducible bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, PnmDecodeError

_WHITESPACE = b" \t\n\r\x0b\x0c"


class PixelCoord(NamedTuple):
    row: int
    col: int


@dataclass
class Image:
    """8-bit raster with 1 (gray) or 3 (RGB) interleaved channels."""

    height: int
    width: int
    channels: int
    samples: np.ndarray  # uint8, shape (height, width, channels)

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise ValueError("image dimensions must be positive")
        if self.channels not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {self.channels}")
        self.samples = np.ascontiguousarray(self.samples, dtype=np.uint8)
        expected = (self.height, self.width, self.channels)
        if self.samples.shape != expected:
            raise ValueError(
                f"samples shape {self.samples.shape} != expected {expected}"
            )

    def __eq__(self, other):
        if not isinstance(other, Image):
            return NotImplemented
        return (
            self.height == other.height
            and self.width == other.width
            and self.channels == other.channels
            and np.array_equal(self.samples, other.samples)
        )


@dataclass
class GrayImage:
    """Real-valued intensity raster with values in [0, 1]."""

    height: int
    width: int
    values: np.ndarray  # float64, shape (height, width)

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.shape != (self.height, self.width):
            raise ValueError("values shape does not match declared dimensions")
        if self.values.size and (self.values.min() < 0.0 or self.values.max() > 1.0):
            raise ValueError("gray values must lie in [0, 1]")


@dataclass
class IntegralImage:
    """Summed-area table: entry (i, j) is the sum over rows < i, cols < j.

    The table has shape (height+1, width+1); its first row and column are
    zero, so any rectangle sum is four lookups.
    """

    height: int
    width: int
    table: np.ndarray  # float64, shape (height+1, width+1)

    def rect_sum(self, r0: int, c0: int, r1: int, c1: int) -> float:
        """Sum of source values over the half-open box [r0, r1) x [c0, c1)."""
        t = self.table
        return float(t[r1, c1] - t[r0, c1] - t[r1, c0] + t[r0, c0])


def round_half_up(values: np.ndarray) -> np.ndarray:
    """Round non-negative reals with ties going up (0.5 -> 1), as uint8.

    numpy's default rounding is round-half-even; this fixed rule keeps all
    exported rasters byte-identical across platforms.
    """
    return np.floor(np.asarray(values, dtype=np.float64) + 0.5).astype(np.uint8)


# ---------------------------------------------------------------------------
# PNM codec (binary P5 / P6, maxval 255)
# ---------------------------------------------------------------------------


def _next_token(data: bytes, pos: int, field: str) -> tuple[bytes, int]:
    """Scan one whitespace-delimited header token, skipping '#' comments."""
    n = len(data)
    while pos < n:
        b = data[pos : pos + 1]
        if b in _WHITESPACE:
            pos += 1
        elif b == b"#":
            while pos < n and data[pos : pos + 1] != b"\n":
                pos += 1
        else:
            break
    if pos >= n:
        raise PnmDecodeError(f"missing {field} in PNM header")
    start = pos
    while pos < n and data[pos : pos + 1] not in _WHITESPACE:
        pos += 1
    return data[start:pos], pos


def _int_token(data: bytes, pos: int, field: str) -> tuple[int, int]:
    token, pos = _next_token(data, pos, field)
    try:
        value = int(token)
    except ValueError:
        raise PnmDecodeError(f"invalid {field} {token!r} in PNM header") from None
    if value <= 0:
        raise PnmDecodeError(f"non-positive {field} in PNM header")
    return value, pos


def decode_pnm(data: bytes) -> Image:
    """Decode binary PGM/PPM bytes (maxval 255) to an Image.

    Accepts standard netpbm headers (comments, arbitrary whitespace).
    Raises PnmDecodeError naming the offending field on malformed input.
    """
    magic, pos = _next_token(data, 0, "magic")
    if magic == b"P5":
        channels = 1
    elif magic == b"P6":
        channels = 3
    else:
        raise PnmDecodeError(f"unsupported magic {magic!r} (want P5 or P6)")
    width, pos = _int_token(data, pos, "width")
    height, pos = _int_token(data, pos, "height")
    maxval, pos = _int_token(data, pos, "maxval")
    if maxval != 255:
        raise PnmDecodeError(f"unsupported maxval {maxval} (only 255)")
    # Exactly one whitespace byte separates the maxval from the raw body.
    if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE:
        raise PnmDecodeError("missing whitespace before PNM body")
    pos += 1
    body = data[pos : pos + height * width * channels]
    if len(body) < height * width * channels:
        raise PnmDecodeError(
            f"truncated body: need {height * width * channels} bytes, "
            f"got {len(body)}"
        )
    samples = np.frombuffer(body, dtype=np.uint8).reshape(height, width, channels)
    return Image(height, width, channels, samples.copy())


def encode_pnm(image: Image) -> bytes:
    """Encode to the canonical binary PGM/PPM layout.

    Canonical form: magic, newline, "width height", newline, "255", newline,
    raw samples.  Byte-exact across platforms, so encode/decode round-trips.
    """
    magic = b"P5" if image.channels == 1 else b"P6"
    header = magic + b"\n%d %d\n255\n" % (image.width, image.height)
    return header + image.samples.tobytes()


def read_image(path: str | Path) -> Image:
    return decode_pnm(Path(path).read_bytes())


def write_image(path: str | Path, image: Image) -> None:
    Path(path).write_bytes(encode_pnm(image))


# ---------------------------------------------------------------------------
# Grayscale, integral images, box means
# ---------------------------------------------------------------------------


def to_grayscale(image: Image) -> GrayImage:
    """Map to [0, 1] intensity: value/255 for gray, integer luma for RGB.

    The luma numerator (299 R + 587 G + 114 B) is computed in exact integer
    arithmetic before the single division by 255000, so results are
    bit-identical everywhere and white maps to exactly 1.0.
    """
    s = image.samples.astype(np.int64)
    if image.channels == 1:
        values = s[:, :, 0] / 255.0
    else:
        luma = 299 * s[:, :, 0] + 587 * s[:, :, 1] + 114 * s[:, :, 2]
        values = luma / 255000.0
    return GrayImage(image.height, image.width, values)


def build_integral(gray: GrayImage) -> IntegralImage:
    table = np.zeros((gray.height + 1, gray.width + 1), dtype=np.float64)
    np.cumsum(np.cumsum(gray.values, axis=0), axis=1, out=table[1:, 1:])
    return IntegralImage(gray.height, gray.width, table)


def box_mean(integral: IntegralImage, center: PixelCoord, radius: int) -> float:
    """Mean over the (2r+1)-square window around center, clipped to the image.

    The divisor is the clipped window area, so border means never mix in
    out-of-image zeros.
    """
    if radius < 1:
        raise ValueError("radius must be >= 1")
    h, w = integral.height, integral.width
    r0 = max(center.row - radius, 0)
    r1 = min(center.row + radius, h - 1) + 1
    c0 = max(center.col - radius, 0)
    c1 = min(center.col + radius, w - 1) + 1
    area = (r1 - r0) * (c1 - c0)
    return integral.rect_sum(r0, c0, r1, c1) / area


def box_mean_map(integral: IntegralImage, radius: int) -> np.ndarray:
    """box_mean evaluated at every pixel, as an (H, W) float64 array."""
    if radius < 1:
        raise ValueError("radius must be >= 1")
    h, w = integral.height, integral.width
    rows = np.arange(h)
    cols = np.arange(w)
    r0 = np.clip(rows - radius, 0, h)
    r1 = np.clip(rows + radius + 1, 0, h)
    c0 = np.clip(cols - radius, 0, w)
    c1 = np.clip(cols + radius + 1, 0, w)
    t = integral.table
    sums = (
        t[np.ix_(r1, c1)] - t[np.ix_(r0, c1)] - t[np.ix_(r1, c0)] + t[np.ix_(r0, c0)]
    )
    area = np.outer(r1 - r0, c1 - c0)
    return sums / area


# ---------------------------------------------------------------------------
# Patch cropping
# ---------------------------------------------------------------------------


def window_origin(center: PixelCoord, patch_size: int, height: int, width: int) -> PixelCoord:
    """Top-left of the patch window: center - P//2, shifted fully inside.

    Windows near a border are clamped by shifting (never zero-padded), so
    every window is exactly P x P of real pixels.  The requested center is
    still recorded even when the window had to shift.
    """
    half = patch_size // 2
    r0 = min(max(center.row - half, 0), height - patch_size)
    c0 = min(max(center.col - half, 0), width - patch_size)
    return PixelCoord(r0, c0)


def crop_patch(image: Image, center: PixelCoord, patch_size: int) -> np.ndarray:
    """Extract the P x P x C pixel block whose window is centered (clamped).

    Raises ConfigError for even P or P exceeding the image; out-of-bounds
    centers are a caller bug and raise ValueError.
    """
    if patch_size % 2 == 0 or patch_size < 1:
        raise ConfigError(f"patch size must be odd and positive, got {patch_size}")
    if patch_size > min(image.height, image.width):
        raise ConfigError(
            f"patch size {patch_size} exceeds image "
            f"{image.height}x{image.width}"
        )
    if not (0 <= center.row < image.height and 0 <= center.col < image.width):
        raise ValueError(f"center {center} out of bounds")
    r0, c0 = window_origin(center, patch_size, image.height, image.width)
    return image.samples[r0 : r0 + patch_size, c0 : c0 + patch_size].copy()


def gray_to_image(gray: GrayImage) -> Image:
    """Quantize a [0, 1] map to an 8-bit single-channel Image (half-up)."""
    samples = round_half_up(gray.values * 255.0)[:, :, np.newaxis]
    return Image(gray.height, gray.width, 1, samples)
