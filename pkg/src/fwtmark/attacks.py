"""Simulated attacks on watermarked images, plus rotation realignment.

Every attack is a pure function of ``(AttackSpec, image)``. The random ones
(``gaussian``, ``sandpaper``) draw from a PCG64 generator seeded with
``spec.seed`` on every call; Gaussian samples come from numpy's ziggurat
normal sampler on that stream.

Text form: ``kind=jpeg,q=30,seed=42``.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from PIL import Image
from scipy.ndimage import map_coordinates, median_filter

from .errors import BadAttackParameterError, NoRealignmentError, ShapeMismatchError
from .image import RasterImage, to_uint8

# kind -> (parameter name, default)
PARAMETERS = {
    "crop": ("r", 0.1),
    "rotate": ("theta", 30.0),
    "scale": ("s", 0.5),
    "gaussian": ("sigma", 5.0),
    "jpeg": ("q", 70),
    "median": ("k", 3),
    "resize": ("f", 0.5),
    "sandpaper": ("p", 0.01),
}
KINDS = tuple(PARAMETERS)
STOCHASTIC = frozenset({"gaussian", "sandpaper"})


def _check_value(kind: str, value: float) -> None:
    ok = {
        "crop": lambda v: 0 <= v < 0.5,
        "rotate": math.isfinite,
        "scale": lambda v: v > 0 and math.isfinite(v),
        "gaussian": lambda v: v >= 0 and math.isfinite(v),
        "jpeg": lambda v: v == int(v) and 1 <= v <= 100,
        "median": lambda v: v == int(v) and v >= 1 and int(v) % 2 == 1,
        "resize": lambda v: v > 0 and math.isfinite(v),
        "sandpaper": lambda v: 0 <= v <= 1,
    }[kind]
    if not ok(value):
        name = PARAMETERS[kind][0]
        raise BadAttackParameterError(f"bad attack parameter: {kind} {name}={value}")


@dataclass(frozen=True)
class AttackSpec:
    kind: str
    value: float = field(default=None)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in PARAMETERS:
            raise BadAttackParameterError(
                f"bad attack parameter: unknown kind {self.kind!r} (choose from {', '.join(KINDS)})"
            )
        value = PARAMETERS[self.kind][1] if self.value is None else self.value
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise BadAttackParameterError(f"bad attack parameter: {value!r} is not a number") from None
        _check_value(self.kind, value)
        if self.kind in ("jpeg", "median"):
            value = int(value)
        if not -(2**63) <= int(self.seed) < 2**64:
            raise BadAttackParameterError(f"bad attack parameter: seed {self.seed} out of 64-bit range")
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def param_name(self) -> str:
        return PARAMETERS[self.kind][0]

    def __str__(self) -> str:
        return f"kind={self.kind},{self.param_name}={_fmt(self.value)},seed={self.seed}"

    @classmethod
    def parse(cls, text: str) -> "AttackSpec":
        """Parse ``kind=NAME,<param>=V[,seed=N]``."""
        fields = {}
        for part in filter(None, (p.strip() for p in text.split(","))):
            key, sep, val = part.partition("=")
            if not sep:
                raise BadAttackParameterError(f"bad attack parameter: expected key=value, got {part!r}")
            fields[key.strip()] = val.strip()
        return cls.from_fields(fields)

    @classmethod
    def from_fields(cls, fields: dict) -> "AttackSpec":
        fields = dict(fields)
        kind = fields.pop("kind", None)
        if kind is None:
            raise BadAttackParameterError("bad attack parameter: missing kind")
        if kind not in PARAMETERS:
            raise BadAttackParameterError(f"bad attack parameter: unknown kind {kind!r}")
        seed = fields.pop("seed", 0)
        try:
            seed = int(seed)
        except (TypeError, ValueError):
            raise BadAttackParameterError(f"bad attack parameter: seed {seed!r}") from None
        name = PARAMETERS[kind][0]
        value = fields.pop(name, None)
        if fields:
            raise BadAttackParameterError(
                f"bad attack parameter: unexpected {', '.join(sorted(fields))} for {kind} (takes {name})"
            )
        return cls(kind, value, seed)


def _fmt(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed % 2**64))


def _resample_axis(x: np.ndarray, size: int, axis: int, kind: str) -> np.ndarray:
    """1-D resampling with pixel-center alignment along ``axis``."""
    n = x.shape[axis]
    if size == n:
        return x
    centers = (np.arange(size) + 0.5) * (n / size)
    if kind == "nearest":
        idx = np.minimum(np.floor(centers).astype(np.intp), n - 1)
        return np.take(x, idx, axis=axis)
    pos = np.clip(centers - 0.5, 0, n - 1)
    lo = np.floor(pos).astype(np.intp)
    hi = np.minimum(lo + 1, n - 1)
    w = pos - lo
    shape = [1] * x.ndim
    shape[axis] = size
    w = w.reshape(shape)
    return np.take(x, lo, axis=axis) * (1 - w) + np.take(x, hi, axis=axis) * w


def resample(data: np.ndarray, height: int, width: int, kind: str) -> np.ndarray:
    """Separable bilinear or nearest-neighbour resize of an ``(H, W, C)`` array."""
    if kind == "nearest":
        out = _resample_axis(_resample_axis(data, height, 0, kind), width, 1, kind)
        return out
    out = _resample_axis(data.astype(np.float64), height, 0, kind)
    return _resample_axis(out, width, 1, kind)


def _round_and_back(img: RasterImage, factor: float, kind: str) -> RasterImage:
    h, w = img.shape
    small = (max(1, round(h * factor)), max(1, round(w * factor)))
    if small == (h, w):
        return img
    mid = resample(img.data, *small, kind)
    if kind != "nearest":
        mid = to_uint8(mid).astype(np.float64)
    back = resample(mid, h, w, kind)
    return RasterImage(to_uint8(back) if kind != "nearest" else back)


def _trig(theta: float) -> tuple[float, float]:
    rad = math.radians(theta)
    c, s = math.cos(rad), math.sin(rad)
    # snap quarter turns so 90/180/270 degrees are exact permutations
    c = round(c) if abs(c - round(c)) < 1e-12 else c
    s = round(s) if abs(s - round(s)) < 1e-12 else s
    return c, s


def rotated_dims(height: int, width: int, theta: float) -> tuple[int, int]:
    """Canvas ``(height, width)`` that holds the whole image rotated by ``theta`` degrees."""
    c, s = _trig(theta)
    eps = 1e-9
    new_w = math.ceil(width * abs(c) + height * abs(s) - eps)
    new_h = math.ceil(width * abs(s) + height * abs(c) - eps)
    return new_h, new_w


def _sample_rotated(data: np.ndarray, out_dims: tuple[int, int], theta: float) -> np.ndarray:
    """Bilinear samples of ``data`` rotated counter-clockwise by ``theta`` about its center,
    on an ``out_dims`` canvas sharing that center. Outside samples are black."""
    h, w = data.shape[:2]
    oh, ow = out_dims
    c, s = _trig(theta)
    yy, xx = np.mgrid[0:oh, 0:ow].astype(np.float64)
    dx = xx - (ow - 1) / 2
    dy = yy - (oh - 1) / 2
    # inverse map: output offset rotated clockwise lands on the source offset
    src_x = c * dx - s * dy + (w - 1) / 2
    src_y = s * dx + c * dy + (h - 1) / 2
    coords = np.array([src_y, src_x])
    out = np.empty((oh, ow, data.shape[2]))
    for ch in range(data.shape[2]):
        out[:, :, ch] = map_coordinates(
            data[:, :, ch].astype(np.float64), coords, order=1, mode="constant", cval=0.0
        )
    return to_uint8(out)


def crop(img: RasterImage, r: float) -> RasterImage:
    h, w = img.shape
    kh, kw = round(h * (1 - 2 * r)), round(w * (1 - 2 * r))
    if (kh, kw) == (h, w):
        return img
    top, left = (h - kh) // 2, (w - kw) // 2
    out = np.zeros_like(img.data)
    out[top : top + kh, left : left + kw] = img.data[top : top + kh, left : left + kw]
    return RasterImage(out)


def rotate(img: RasterImage, theta: float) -> RasterImage:
    if theta % 360 == 0:
        return img
    return RasterImage(_sample_rotated(img.data, rotated_dims(*img.shape, theta), theta))


def gaussian(img: RasterImage, sigma: float, seed: int) -> RasterImage:
    if sigma == 0:
        return img
    noise = _rng(seed).normal(0.0, sigma, size=img.data.shape)
    return RasterImage(to_uint8(img.data + noise))


def jpeg(img: RasterImage, q: int) -> RasterImage:
    buf = io.BytesIO()
    Image.fromarray(np.asarray(img)).save(buf, format="JPEG", quality=int(q), subsampling=2)
    buf.seek(0)
    with Image.open(buf) as decoded:
        mode = "L" if img.channels == 1 else "RGB"
        return RasterImage(np.asarray(decoded.convert(mode)))


def median(img: RasterImage, k: int) -> RasterImage:
    if k == 1:
        return img
    return RasterImage(median_filter(img.data, size=(k, k, 1), mode="reflect"))


def sandpaper(img: RasterImage, p: float, seed: int) -> RasterImage:
    if p == 0:
        return img
    rng = _rng(seed)
    hit = rng.random(img.shape) < p
    white = rng.random(img.shape) < 0.5
    out = img.data.copy()
    out[hit & white] = 255
    out[hit & ~white] = 0
    return RasterImage(out)


def apply(spec: AttackSpec, img: RasterImage) -> RasterImage:
    kind, v = spec.kind, spec.value
    if kind == "crop":
        return crop(img, v)
    if kind == "rotate":
        return rotate(img, v)
    if kind == "scale":
        return _round_and_back(img, v, "linear")
    if kind == "gaussian":
        return gaussian(img, v, spec.seed)
    if kind == "jpeg":
        return jpeg(img, int(v))
    if kind == "median":
        return median(img, int(v))
    if kind == "resize":
        return _round_and_back(img, v, "nearest")
    return sandpaper(img, v, spec.seed)


def realign(spec: AttackSpec, attacked: RasterImage, original_dims: tuple[int, int]) -> RasterImage:
    """Undo a rotation: rotate back by ``-theta`` about the canvas center and
    center-crop to ``original_dims`` (one bilinear resampling)."""
    if spec.kind != "rotate":
        raise NoRealignmentError(f"no realignment defined for {spec.kind!r} attacks")
    expected = rotated_dims(*original_dims, spec.value)
    if attacked.shape != expected:
        raise ShapeMismatchError(
            f"shape mismatch: rotated image is {attacked.shape}, expected {expected} "
            f"for theta={spec.value} on {original_dims}"
        )
    if spec.value % 360 == 0:
        return attacked
    # Sampling the attacked canvas at original-frame pixels rotated by +theta is the
    # same as rotating it by -theta and cropping the center.
    return RasterImage(_sample_rotated(attacked.data, original_dims, -spec.value))


def attack_and_realign(spec: AttackSpec, img: RasterImage) -> RasterImage:
    """Apply an attack and, when it changes geometry, bring the result back to ``img``'s frame."""
    out = apply(spec, img)
    if spec.kind == "rotate":
        out = realign(spec, out, img.shape)
    return out
