"""End-to-end embedding and non-blind extraction."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientCapacityError, RealignRequiredError, WatermarkTooLargeError
from .image import RasterImage, YCbCrPlanes, luminance, merge_planes, split_planes
from .metrics import ber, ncc, psnr, ssim
from .mosaic import TileReport, build_mosaic, split_and_score
from .qim import MAX_WATERMARK_SIDE, EmbedConfig, WatermarkBits, binarize, embed_bit, extract_bit, is_binary_image
from .wavelet import WaveletSpec, fwt2, ifwt2

# Base quantization steps at level 2, per watermark kind.
ALPHA_GRAYSCALE = 30.0
ALPHA_BINARY = 25.0
DEFAULT_WAVELET = "db3"
DEFAULT_THRESHOLD = 128


@dataclass(frozen=True)
class EmbedResult:
    watermarked: RasterImage
    psnr_db: float
    ssim: float
    embed_seconds: float
    config_used: EmbedConfig
    watermark_bits: WatermarkBits | None = None


@dataclass(frozen=True)
class ExtractResult:
    recovered_bits: np.ndarray
    tile_report: TileReport
    ber: float | None
    ncc: float | None
    extract_seconds: float

    @property
    def best_tile(self) -> WatermarkBits:
        return self.tile_report.best_tile_bits


def resolve_defaults(
    host_dims: tuple[int, int],
    wm_dims: tuple[int, int],
    alpha: float | None = None,
    level: int | None = None,
    wavelet: str | None = None,
    threshold: int | None = None,
    binary_watermark: bool = True,
) -> EmbedConfig:
    """Fill in unspecified embedding parameters from the host and watermark sizes.

    The level is the deepest one that still leaves room for a 2x2 grid of
    watermark tiles, clamped to [1, 6]; alpha doubles with every level past 2.
    """
    if level is None:
        ratio = min(host_dims) / (2 * max(wm_dims))
        level = int(math.floor(math.log2(ratio))) if ratio > 0 else 1
        level = min(max(level, 1), 6)
    if alpha is None:
        base = ALPHA_BINARY if binary_watermark else ALPHA_GRAYSCALE
        alpha = base * 2.0 ** (level - 2)
    return EmbedConfig(
        alpha=float(alpha),
        threshold=DEFAULT_THRESHOLD if threshold is None else int(threshold),
        spec=WaveletSpec(wavelet or DEFAULT_WAVELET, int(level)),
    )


def _as_bits(watermark, threshold: int) -> WatermarkBits:
    if isinstance(watermark, WatermarkBits):
        return watermark
    return binarize(watermark, threshold)


def embed_planes(planes: YCbCrPlanes, bits: WatermarkBits, cfg: EmbedConfig) -> YCbCrPlanes:
    """Mark the Y plane; the chroma planes are passed through untouched."""
    pyr = fwt2(planes.y, cfg.spec)
    mosaic = build_mosaic(bits, pyr.ll.shape)
    marked = pyr.with_ll(embed_bit(pyr.ll, mosaic.bits, cfg.alpha))
    return YCbCrPlanes(ifwt2(marked), planes.cb, planes.cr)


def embed(host: RasterImage, watermark, cfg: EmbedConfig, measure: bool = True) -> EmbedResult:
    """Embed a watermark image (or ready-made bits) into ``host``.

    ``embed_seconds`` covers the transform work only; PSNR and SSIM are
    computed afterwards when ``measure`` is set (NaN otherwise).
    """
    bits = _as_bits(watermark, cfg.threshold)
    cfg.spec.check(host.shape)

    start = time.perf_counter()
    planes = embed_planes(split_planes(host), bits, cfg)
    marked = merge_planes(planes, host.channels)
    elapsed = time.perf_counter() - start

    if measure:
        quality = psnr(host, marked), ssim(host, marked)
    else:
        quality = math.nan, math.nan
    return EmbedResult(marked, quality[0], quality[1], elapsed, cfg, bits)


def extract(
    host: RasterImage,
    suspect: RasterImage,
    cfg: EmbedConfig,
    wm_dims: tuple[int, int],
    reference=None,
) -> ExtractResult:
    """Recover the watermark mosaic from ``suspect`` using the original ``host``.

    ``reference`` (an image or bits) enables BER/NCC scoring and reference-guided
    tile selection; without it the consensus tile is returned and BER/NCC are None.
    """
    if suspect.shape != host.shape:
        raise RealignRequiredError(
            f"realign required: suspect is {suspect.width}x{suspect.height}, "
            f"host is {host.width}x{host.height}"
        )
    th, tw = wm_dims
    if th > MAX_WATERMARK_SIDE or tw > MAX_WATERMARK_SIDE:
        raise WatermarkTooLargeError(f"watermark too large: {tw}x{th}")
    ref_bits = None if reference is None else _as_bits(reference, cfg.threshold)
    if ref_bits is not None and ref_bits.shape != (th, tw):
        raise InsufficientCapacityError(
            f"reference is {ref_bits.width}x{ref_bits.height} but --wm-size is {tw}x{th}"
        )
    cfg.spec.check(host.shape)

    start = time.perf_counter()
    ll_host = fwt2(luminance(host), cfg.spec).ll
    ll_suspect = fwt2(luminance(suspect), cfg.spec).ll
    if ll_host.shape[0] < th or ll_host.shape[1] < tw:
        raise InsufficientCapacityError(
            f"insufficient capacity: LL plane {ll_host.shape[1]}x{ll_host.shape[0]} "
            f"cannot hold a {tw}x{th} watermark"
        )
    recovered = extract_bit(ll_suspect, ll_host)
    report = split_and_score(recovered, (th, tw), ref_bits)
    elapsed = time.perf_counter() - start

    if ref_bits is None:
        return ExtractResult(recovered, report, None, None, elapsed)
    best = report.best_tile_bits
    return ExtractResult(recovered, report, ber(best, ref_bits), ncc(best, ref_bits), elapsed)


def default_config_for(host: RasterImage, watermark: RasterImage, **overrides) -> EmbedConfig:
    """:func:`resolve_defaults` with the watermark kind detected from its pixels."""
    return resolve_defaults(
        host.shape, watermark.shape, binary_watermark=is_binary_image(watermark), **overrides
    )
