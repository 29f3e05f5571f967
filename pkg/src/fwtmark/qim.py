"""Additive QIM bit codec for low-frequency wavelet coefficients.

A bit moves its coefficient by half a quantization step, up for 1 and down
for 0. Recovery is non-blind: the sign of (marked - original) is the bit, so
any disturbance smaller than ``alpha / 2`` leaves the bit intact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, WatermarkTooLargeError
from .image import RasterImage, luminance
from .wavelet import WaveletSpec

MAX_WATERMARK_SIDE = 128


@dataclass(frozen=True)
class EmbedConfig:
    alpha: float
    threshold: int = 128
    spec: WaveletSpec = field(default_factory=WaveletSpec)

    def __post_init__(self):
        if not np.isfinite(self.alpha) or self.alpha <= 0:
            raise ParameterError(f"alpha must be > 0, got {self.alpha}")
        if int(self.threshold) != self.threshold or not 1 <= self.threshold <= 255:
            raise ParameterError(f"threshold must be an integer in [1, 255], got {self.threshold}")


@dataclass(frozen=True, eq=False)
class WatermarkBits:
    """Binary watermark payload, at most 128x128."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.bits)
        if arr.ndim != 2 or min(arr.shape) < 1:
            raise ParameterError(f"watermark bits must be a non-empty 2-D matrix, got {arr.shape}")
        if arr.shape[0] > MAX_WATERMARK_SIDE or arr.shape[1] > MAX_WATERMARK_SIDE:
            raise WatermarkTooLargeError(
                f"watermark too large: {arr.shape[1]}x{arr.shape[0]} "
                f"(limit {MAX_WATERMARK_SIDE}x{MAX_WATERMARK_SIDE})"
            )
        if not np.isin(arr, (0, 1)).all():
            raise ParameterError("watermark bits must be 0 or 1")
        arr = arr.astype(np.uint8)
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.bits.shape

    def __array__(self, dtype=None, copy=None):
        return self.bits if dtype is None else self.bits.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, WatermarkBits):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.bits, other.bits))

    def render(self) -> RasterImage:
        """Grayscale image with 1 -> 255 and 0 -> 0."""
        return RasterImage(self.bits * np.uint8(255))


def binarize(watermark: RasterImage, threshold: int = 128) -> WatermarkBits:
    """Threshold a watermark image; a sample at or above ``threshold`` is a 1.

    RGB watermarks are reduced to luma first.
    """
    if not 1 <= threshold <= 255:
        raise ParameterError(f"threshold must be in [1, 255], got {threshold}")
    if watermark.height > MAX_WATERMARK_SIDE or watermark.width > MAX_WATERMARK_SIDE:
        raise WatermarkTooLargeError(
            f"watermark too large: {watermark.width}x{watermark.height} "
            f"(limit {MAX_WATERMARK_SIDE}x{MAX_WATERMARK_SIDE})"
        )
    return WatermarkBits(luminance(watermark) >= threshold)


def is_binary_image(watermark: RasterImage) -> bool:
    """True when every sample is pure black or pure white."""
    return bool(np.isin(watermark.data, (0, 255)).all())


def embed_bit(c, b, alpha: float):
    """Shift coefficient(s) ``c`` by ``+alpha/2`` for bit 1 and ``-alpha/2`` for bit 0.

    Works element-wise on arrays.
    """
    if alpha <= 0:
        raise ParameterError(f"alpha must be > 0, got {alpha}")
    sign = 2.0 * np.asarray(b, dtype=np.float64) - 1.0
    out = c + sign * (alpha / 2.0)
    return float(out) if np.ndim(out) == 0 else out


def extract_bit(c_marked, c_original):
    """Recover bit(s) from the sign of the coefficient change; zero counts as 1."""
    bits = (np.asarray(c_marked, dtype=np.float64) - c_original) >= 0
    return int(bits) if np.ndim(bits) == 0 else bits.astype(np.uint8)
