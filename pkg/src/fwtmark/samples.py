"""Deterministic synthetic images for demos, tests and benchmarks."""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter, zoom

from .errors import ParameterError
from .image import RasterImage, to_uint8


def qr_like(size: int = 64, modules: int = 21, seed: int = 0) -> RasterImage:
    """A binary QR-code lookalike: random modules plus the three finder squares.

    Dark modules are 0, light modules and the quiet border are 255.
    """
    if size < 15:
        raise ParameterError(f"qr_like needs size >= 15, got {size}")
    modules = min(modules, size)
    rng = np.random.default_rng(seed)
    grid = rng.random((modules, modules)) < 0.5
    finder = np.ones((7, 7), dtype=bool)
    finder[1:6, 1:6] = False
    finder[2:5, 2:5] = True
    for r, c in ((0, 0), (0, modules - 7), (modules - 7, 0)):
        grid[r : r + 8 if r == 0 else r - 1 + 8, c : c + 8 if c == 0 else c - 1 + 8] = False
        grid[r : r + 7, c : c + 7] = finder
    scale = max(size // modules, 1)
    body = np.kron(grid, np.ones((scale, scale), dtype=bool))
    canvas = np.zeros((size, size), dtype=bool)
    off = (size - body.shape[0]) // 2
    canvas[off : off + body.shape[0], off : off + body.shape[1]] = body[: size - off, : size - off]
    return RasterImage(np.where(canvas, 0, 255).astype(np.uint8))


def gray_logo(size: int = 64) -> RasterImage:
    """A smooth grayscale watermark with a disc and a diagonal ramp."""
    yy, xx = np.mgrid[0:size, 0:size] / max(size - 1, 1)
    ramp = 200 * (xx + yy) / 2
    disc = ((xx - 0.5) ** 2 + (yy - 0.5) ** 2) < 0.1
    return RasterImage(np.clip(ramp + 55 * disc, 0, 255).astype(np.uint8))


def synthetic_host(height: int = 512, width: int = 512, seed: int = 0, channels: int = 3) -> RasterImage:
    """Natural-looking host: multi-scale smooth noise, soft shapes and mild texture.

    Hosts larger than 1024 px on a side are drawn at reduced size and
    upsampled before the fine texture is added. Values stay clear of 0 and 255.
    """
    from .attacks import resample

    rng = np.random.default_rng(seed)
    factor = max(height, width) / 1024
    sh, sw = (height, width) if factor <= 1 else (max(round(height / factor), 8), max(round(width / factor), 8))
    base_h, base_w = max(sh // 8, 2), max(sw // 8, 2)
    planes = []
    for _ in range(channels):
        coarse = gaussian_filter(rng.normal(size=(base_h, base_w)), 3.0, mode="wrap")
        field = zoom(coarse, (sh / base_h, sw / base_w), order=1)[:sh, :sw]
        field = (field - field.min()) / (np.ptp(field) + 1e-12)
        planes.append(field)
    shared = np.mean(planes, axis=0)
    yy, xx = np.ogrid[0:sh, 0:sw]
    shapes = np.zeros((sh, sw))
    for _ in range(6):
        cy, cx = rng.uniform(0, sh), rng.uniform(0, sw)
        radius = rng.uniform(0.05, 0.2) * min(sh, sw)
        shapes += rng.uniform(-0.25, 0.25) * (((yy - cy) ** 2 + (xx - cx) ** 2) < radius**2)
    layers = np.stack([0.6 * shared + 0.4 * p + shapes for p in planes], axis=-1)
    lo = layers.min(axis=(0, 1))
    layers = (layers - lo) / (np.ptp(layers, axis=(0, 1)) + 1e-12)
    if (sh, sw) != (height, width):
        layers = resample(layers, height, width, "linear")
    texture = gaussian_filter(rng.normal(size=(height, width)).astype(np.float32), 0.8)
    layers += 0.15 * texture[:, :, None]
    data = to_uint8(20 + 215 * np.clip(layers, 0, 1))
    return RasterImage(data if channels == 3 else data[:, :, 0])
