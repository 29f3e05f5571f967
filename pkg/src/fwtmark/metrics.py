"""Fidelity (PSNR, SSIM) and payload (BER, NCC) metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import ShapeMismatchError
from .image import RasterImage, luminance


@dataclass(frozen=True)
class MetricConfig:
    ssim_window: int = 11
    ssim_sigma: float = 1.5
    ssim_k1: float = 0.01
    ssim_k2: float = 0.03
    dynamic_range: float = 255.0

    @property
    def c1(self) -> float:
        return (self.ssim_k1 * self.dynamic_range) ** 2

    @property
    def c2(self) -> float:
        return (self.ssim_k2 * self.dynamic_range) ** 2


DEFAULT_METRICS = MetricConfig()


def _same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")


def psnr(a, b, dynamic_range: float = 255.0) -> float:
    """PSNR in dB over all samples and channels jointly; ``inf`` for identical inputs."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    _same_shape(x, y)
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(dynamic_range**2 / mse)


def _luma_plane(img) -> np.ndarray:
    if isinstance(img, RasterImage):
        return luminance(img)
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 3:
        return np.rint(arr @ np.array([0.299, 0.587, 0.114]))
    if arr.ndim == 3 and arr.shape[2] == 1:
        return arr[:, :, 0]
    return arr


def ssim_map(a, b, config: MetricConfig = DEFAULT_METRICS) -> np.ndarray:
    """Per-pixel SSIM on the luma planes.

    Local statistics use a Gaussian window (``ssim_window`` wide,
    ``ssim_sigma``) with reflected borders so the map covers every pixel.
    """
    x = _luma_plane(a)
    y = _luma_plane(b)
    _same_shape(x, y)
    if min(x.shape) < config.ssim_window:
        raise ShapeMismatchError(
            f"image {x.shape[1]}x{x.shape[0]} smaller than the "
            f"{config.ssim_window}x{config.ssim_window} SSIM window"
        )
    radius = config.ssim_window // 2
    blur = lambda z: gaussian_filter(z, config.ssim_sigma, mode="reflect", truncate=radius / config.ssim_sigma)  # noqa: E731
    mu_x = blur(x)
    mu_y = blur(y)
    var_x = blur(x * x) - mu_x * mu_x
    var_y = blur(y * y) - mu_y * mu_y
    cov = blur(x * y) - mu_x * mu_y
    c1, c2 = config.c1, config.c2
    num = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return num / den


def ssim(a, b, config: MetricConfig = DEFAULT_METRICS) -> float:
    return float(np.mean(ssim_map(a, b, config)))


def ber(a, b) -> float:
    """Fraction of positions where two bit matrices differ."""
    x = np.asarray(a)
    y = np.asarray(b)
    _same_shape(x, y)
    return float(np.count_nonzero(x != y)) / x.size


def ncc(a, b) -> float:
    """Normalized cross-correlation ``sum(a*b) / (|a| |b|)``.

    Two all-zero inputs correlate perfectly (1.0); a single all-zero input
    gives 0.0.
    """
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    _same_shape(x, y)
    nx = math.sqrt(float(np.sum(x * x)))
    ny = math.sqrt(float(np.sum(y * y)))
    if nx == 0.0 and ny == 0.0:
        return 1.0
    if nx == 0.0 or ny == 0.0:
        return 0.0
    return float(np.sum(x * y)) / (nx * ny)
