"""Pixel rasters, YCbCr conversion and image file I/O."""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    ChannelMismatchError,
    ImageDecodeError,
    ImageIOError,
    ParameterError,
    ShapeMismatchError,
    UnsupportedFormatError,
)

# Luma weights; chroma rows are the full-range (JPEG) BT.601 companions.
_RGB_TO_YCC = np.array(
    [
        [0.299, 0.587, 0.114],
        [-0.168736, -0.331264, 0.5],
        [0.5, -0.418688, -0.081312],
    ]
)
_YCC_TO_RGB = np.array(
    [
        [1.0, 0.0, 1.402],
        [1.0, -0.344136, -0.714136],
        [1.0, 1.772, 0.0],
    ]
)

_FORMATS = {".png": "PNG", ".bmp": "BMP", ".jpg": "JPEG", ".jpeg": "JPEG"}


@dataclass(frozen=True, eq=False)
class RasterImage:
    """An 8-bit raster of shape ``(height, width, channels)`` with 1 or 3 channels.

    The sample array is made read-only on construction.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise ChannelMismatchError(f"expected 1 or 3 channels, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeMismatchError("image must be at least 1x1")
        if arr.dtype != np.uint8:
            if not np.issubdtype(arr.dtype, np.integer) and not np.issubdtype(arr.dtype, np.bool_):
                raise ParameterError(f"samples must be integers, got {arr.dtype}")
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise ParameterError("samples must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        arr = np.ascontiguousarray(arr)
        if arr is self.data:
            arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[:2]

    @property
    def pixels(self) -> np.ndarray:
        """Samples as ``(H, W)`` for grayscale and ``(H, W, 3)`` for RGB."""
        return self.data[:, :, 0] if self.channels == 1 else self.data

    def __array__(self, dtype=None, copy=None):
        return self.pixels if dtype is None else self.pixels.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, RasterImage):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(np.array_equal(self.data, other.data))

    def __repr__(self):
        return f"RasterImage({self.width}x{self.height}x{self.channels})"


@dataclass(frozen=True, eq=False)
class YCbCrPlanes:
    y: np.ndarray
    cb: np.ndarray
    cr: np.ndarray

    def __post_init__(self):
        if not (self.y.shape == self.cb.shape == self.cr.shape) or self.y.ndim != 2:
            raise ShapeMismatchError(
                f"plane shapes differ: {self.y.shape}, {self.cb.shape}, {self.cr.shape}"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return self.y.shape


def _channels(img: RasterImage):
    return (img.data[:, :, c].astype(np.float64) for c in range(3))


def _luma(r, g, b) -> np.ndarray:
    w = _RGB_TO_YCC[0]
    y = w[0] * r
    y += w[1] * g
    y += w[2] * b
    return np.rint(y, out=y)


def luminance(img: RasterImage) -> np.ndarray:
    """Rounded luma plane ``round(0.299 R + 0.587 G + 0.114 B)`` as float64.

    Grayscale images are returned as-is (converted to float).
    """
    if img.channels == 1:
        return img.data[:, :, 0].astype(np.float64)
    return _luma(*_channels(img))


def rgb_to_ycbcr(img: RasterImage) -> YCbCrPlanes:
    if img.channels != 3:
        raise ChannelMismatchError("channel mismatch: rgb_to_ycbcr needs a 3-channel image")
    r, g, b = _channels(img)
    (_, cb_r, cb_g, cb_b), (_, cr_r, cr_g, cr_b) = [(None, *row) for row in _RGB_TO_YCC[1:]]
    cb = 128.0 + cb_r * r + cb_g * g + cb_b * b
    cr = 128.0 + cr_r * r + cr_g * g + cr_b * b
    # pure blue/red land on 255.5; keep the planes inside the 8-bit range
    np.clip(cb, 0.0, 255.0, out=cb)
    np.clip(cr, 0.0, 255.0, out=cr)
    return YCbCrPlanes(_luma(r, g, b), cb, cr)


def ycbcr_to_rgb(planes: YCbCrPlanes) -> RasterImage:
    cb = planes.cb - 128.0
    cr = planes.cr - 128.0
    out = np.empty(planes.shape + (3,), dtype=np.uint8)
    for c, (_, k_cb, k_cr) in enumerate(_YCC_TO_RGB):
        chan = planes.y + k_cb * cb if k_cb else planes.y.copy()
        if k_cr:
            chan += k_cr * cr
        out[:, :, c] = to_uint8(chan)
    return RasterImage(out)


def to_uint8(values: np.ndarray) -> np.ndarray:
    """Round then clamp to the 8-bit range."""
    out = np.rint(values)
    np.clip(out, 0, 255, out=out)
    return out.astype(np.uint8)


def split_planes(img: RasterImage) -> YCbCrPlanes:
    """YCbCr planes for any raster; grayscale becomes Y with neutral chroma."""
    if img.channels == 3:
        return rgb_to_ycbcr(img)
    y = img.data[:, :, 0].astype(np.float64)
    neutral = np.full_like(y, 128.0)
    return YCbCrPlanes(y, neutral, neutral.copy())


def merge_planes(planes: YCbCrPlanes, channels: int) -> RasterImage:
    """Inverse of :func:`split_planes` for a target channel count."""
    if channels == 3:
        return ycbcr_to_rgb(planes)
    return RasterImage(to_uint8(planes.y))


def check_format(path: str | os.PathLike) -> str:
    """Return the Pillow format name for a path's extension or raise."""
    path = Path(path)
    try:
        return _FORMATS[path.suffix.lower()]
    except KeyError:
        raise UnsupportedFormatError(
            f"unsupported image format {path.suffix!r} (use .png, .bmp, .jpg)"
        ) from None


def load_image(path: str | os.PathLike) -> RasterImage:
    path = Path(path)
    check_format(path)
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise ImageIOError(f"cannot read {path}: {exc.strerror}") from exc
    with fh:
        try:
            im = Image.open(fh)
            im.load()
        except (UnidentifiedImageError, OSError, SyntaxError) as exc:
            raise ImageDecodeError(f"cannot decode {path}: {exc}") from exc

    mode = im.mode
    if mode in ("I", "I;16", "I;16B", "I;16L", "F"):
        raise UnsupportedFormatError(f"{path}: only 8-bit images are supported (mode {mode})")
    has_alpha = mode in ("RGBA", "LA", "PA") or (mode == "P" and "transparency" in im.info)
    if has_alpha:
        warnings.warn(f"{path}: alpha channel dropped", stacklevel=2)
    if mode in ("1", "L", "LA"):
        im = im.convert("L")
    else:
        im = im.convert("RGB")
    return RasterImage(np.asarray(im))


def save_image(img: RasterImage, path: str | os.PathLike, quality: int = 95) -> None:
    path = Path(path)
    fmt = check_format(path)
    kwargs = {}
    if fmt == "JPEG":
        if not 1 <= quality <= 100:
            raise ParameterError(f"JPEG quality must be in [1, 100], got {quality}")
        kwargs = {"quality": int(quality), "subsampling": 2}
    try:
        Image.fromarray(np.asarray(img)).save(path, format=fmt, **kwargs)
    except OSError as exc:
        raise ImageIOError(f"cannot write {path}: {exc}") from exc
