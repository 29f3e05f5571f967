"""Watermark mosaics: tiling the payload over the LL plane and picking the best tile back."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientCapacityError, ShapeMismatchError
from .metrics import ncc, ssim
from .qim import WatermarkBits


@dataclass(frozen=True, eq=False)
class Mosaic:
    bits: np.ndarray
    tile_dims: tuple[int, int]
    grid: tuple[int, int]

    @property
    def complete_grid(self) -> tuple[int, int]:
        return complete_grid(self.bits.shape, self.tile_dims)


@dataclass(frozen=True, eq=False)
class TileReport:
    """Scores of every complete tile, indexed ``[row, col]`` on the tile grid.

    With a reference, ``ncc``/``ssim`` compare each tile to it. Without one,
    ``ncc`` holds each tile's mean NCC against all other complete tiles and
    ``ssim`` is all-NaN.
    """

    ncc: np.ndarray
    ssim: np.ndarray
    best_tile_index: tuple[int, int]
    best_tile_bits: WatermarkBits
    consensus: bool = False

    @property
    def tile_count(self) -> int:
        return self.ncc.size


def complete_grid(plane_dims: tuple[int, int], tile_dims: tuple[int, int]) -> tuple[int, int]:
    return plane_dims[0] // tile_dims[0], plane_dims[1] // tile_dims[1]


def build_mosaic(wm: WatermarkBits, ll_dims: tuple[int, int]) -> Mosaic:
    """Tile ``wm`` over an ``ll_dims`` plane, truncating partial tiles at the right/bottom."""
    h, w = ll_dims
    th, tw = wm.shape
    if h < th or w < tw:
        raise InsufficientCapacityError(
            f"insufficient capacity: LL plane {w}x{h} cannot hold a {tw}x{th} watermark; "
            "use a lower decomposition level or a smaller watermark"
        )
    grid = (-(-h // th), -(-w // tw))
    bits = np.tile(wm.bits, grid)[:h, :w]
    return Mosaic(bits, (th, tw), grid)


def _tiles(plane: np.ndarray, tile_dims: tuple[int, int]) -> np.ndarray:
    """Complete tiles as an array of shape ``(rows, cols, th, tw)``."""
    th, tw = tile_dims
    rows, cols = complete_grid(plane.shape, tile_dims)
    cropped = plane[: rows * th, : cols * tw]
    return cropped.reshape(rows, th, cols, tw).swapaxes(1, 2)


def _tile_ssim(tile: np.ndarray, reference: np.ndarray) -> float:
    try:
        return ssim(tile * 255.0, reference * 255.0)
    except ShapeMismatchError:
        return float("nan")


def split_and_score(recovered, tile_dims: tuple[int, int], reference: WatermarkBits | None = None) -> TileReport:
    """Score each complete tile of a recovered bit plane and select the best one.

    Selection is by NCC alone; the first maximum in row-major order wins.
    """
    plane = np.asarray(recovered, dtype=np.uint8)
    th, tw = tile_dims
    if plane.shape[0] < th or plane.shape[1] < tw:
        raise InsufficientCapacityError(
            f"insufficient capacity: recovered plane {plane.shape[1]}x{plane.shape[0]} "
            f"holds no complete {tw}x{th} tile"
        )
    tiles = _tiles(plane, tile_dims)
    rows, cols = tiles.shape[:2]
    flat = tiles.reshape(rows * cols, th * tw).astype(np.float64)

    if reference is not None:
        ref = np.asarray(reference, dtype=np.float64)
        if ref.shape != (th, tw):
            raise ShapeMismatchError(f"shape mismatch: reference {ref.shape} vs tiles {(th, tw)}")
        scores = np.array([ncc(t, ref.ravel()) for t in flat])
        ssims = np.array([_tile_ssim(t.reshape(th, tw), ref) for t in flat])
    else:
        scores = _consensus_scores(flat)
        ssims = np.full(len(flat), np.nan)

    best = int(np.argmax(scores))
    index = divmod(best, cols)
    return TileReport(
        ncc=scores.reshape(rows, cols),
        ssim=ssims.reshape(rows, cols),
        best_tile_index=index,
        best_tile_bits=WatermarkBits(tiles[index]),
        consensus=reference is None,
    )


def _consensus_scores(flat: np.ndarray) -> np.ndarray:
    n = len(flat)
    if n == 1:
        return np.ones(1)
    norms = np.sqrt(np.sum(flat * flat, axis=1))
    gram = flat @ flat.T
    with np.errstate(divide="ignore", invalid="ignore"):
        pair = gram / np.outer(norms, norms)
    zero = norms == 0
    pair[np.ix_(zero, ~zero)] = 0.0
    pair[np.ix_(~zero, zero)] = 0.0
    pair[np.ix_(zero, zero)] = 1.0
    np.fill_diagonal(pair, 0.0)
    return pair.sum(axis=1) / (n - 1)
