"""Multi-level separable 2-D fast wavelet transform with Daubechies filters.

Boundaries are periodized: a signal of length N becomes ceil(N/2) approximation
and ceil(N/2) detail coefficients. Odd-length signals are first extended by
repeating their last sample, which keeps the transform orthonormal on the
extended signal and lets the inverse truncate back to N exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from .errors import CorruptPyramidError, DecompositionTooDeepError, ParameterError

# Orthonormal Daubechies scaling (reconstruction low-pass) filters, dbK has 2K taps.
_DAUBECHIES = {
    "db1": (0.7071067811865476, 0.7071067811865476),
    "db2": (0.48296291314453416, 0.8365163037378079, 0.2241438680420134,
            -0.12940952255126037),
    "db3": (0.33267055295008263, 0.8068915093110925, 0.45987750211849154,
            -0.13501102001025458, -0.08544127388202666, 0.03522629188570953),
    "db4": (0.2303778133088965, 0.7148465705529157, 0.6308807679298589,
            -0.027983769416859854, -0.18703481171909309, 0.030841381835560764,
            0.0328830116668852, -0.010597401785069032),
    "db5": (0.16010239797419293, 0.6038292697971896, 0.7243085284377729,
            0.13842814590132074, -0.24229488706638203, -0.032244869584638375,
            0.07757149384004572, -0.006241490212798274, -0.012580751999081999,
            0.0033357252854737712),
    "db6": (0.11154074335010947, 0.49462389039845306, 0.7511339080210954,
            0.31525035170919763, -0.22626469396543983, -0.12976686756726194,
            0.09750160558732304, 0.027522865530305727, -0.03158203931748603,
            0.0005538422011614961, 0.004777257510945511, -0.0010773010853084796),
    "db7": (0.07785205408500918, 0.3965393194819173, 0.7291320908462351,
            0.4697822874051931, -0.14390600392856498, -0.22403618499387498,
            0.07130921926683026, 0.08061260915108308, -0.03802993693501441,
            -0.01657454163066688, 0.01255099855609984, 0.0004295779729213665,
            -0.0018016407040474908, 0.00035371379997452024),
    "db8": (0.05441584224310401, 0.31287159091429995, 0.6756307362972898,
            0.5853546836542067, -0.015829105256349306, -0.2840155429615469,
            0.0004724845739132828, 0.12874742662047847, -0.017369301001807547,
            -0.044088253930794755, 0.013981027917398282, 0.008746094047405777,
            -0.004870352993451574, -0.00039174037337694705, 0.0006754494064505693,
            -0.00011747678412476953),
}

FAMILIES = tuple(_DAUBECHIES)


def filter_bank(family: str) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(lowpass, highpass)`` analysis filters for a family name.

    The high-pass is the quadrature mirror ``g[n] = (-1)**n * h[L-1-n]``.
    """
    try:
        h = np.array(_DAUBECHIES[family])
    except KeyError:
        raise ParameterError(f"unknown wavelet {family!r}; choose one of {', '.join(FAMILIES)}") from None
    g = h[::-1].copy()
    g[1::2] *= -1
    return h, g


def max_level(shape: tuple[int, int]) -> int:
    return int(math.floor(math.log2(min(shape))))


@dataclass(frozen=True)
class WaveletSpec:
    family: str = "db3"
    level: int = 1

    def __post_init__(self):
        if self.family not in _DAUBECHIES:
            raise ParameterError(f"unknown wavelet {self.family!r}")
        if int(self.level) != self.level or self.level < 1:
            raise ParameterError(f"level must be an integer >= 1, got {self.level}")

    def check(self, shape: tuple[int, int]) -> None:
        if min(shape) < 1 or self.level > max_level(shape):
            raise DecompositionTooDeepError(
                f"decomposition too deep: level {self.level} on a {shape[0]}x{shape[1]} "
                f"plane (max {max_level(shape) if min(shape) >= 1 else 0})"
            )


@dataclass(frozen=True)
class SubbandPyramid:
    """Wavelet coefficients of a plane.

    ``details[i]`` is the ``(lh, hl, hh)`` triple of level ``i`` counted from the
    coarsest, and ``original_dims[i]`` the shape of the plane that level split.
    ``lh`` is low-pass across columns and high-pass down rows (horizontal edges),
    ``hl`` the reverse, ``hh`` high-pass both ways.
    """

    ll: np.ndarray
    details: tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...]
    original_dims: tuple[tuple[int, int], ...]
    spec: WaveletSpec = field(default_factory=WaveletSpec)

    def with_ll(self, ll: np.ndarray) -> "SubbandPyramid":
        ll = np.asarray(ll, dtype=np.float64)
        if ll.shape != self.ll.shape:
            raise CorruptPyramidError(f"LL shape {ll.shape} != {self.ll.shape}")
        return replace(self, ll=ll)

    def coefficients(self):
        yield self.ll
        for triple in self.details:
            yield from triple

    def energy(self) -> float:
        return float(sum(np.sum(c * c) for c in self.coefficients()))


def _positions(n: int, taps: int) -> tuple[np.ndarray, np.ndarray]:
    """Index maps for a length-``n`` signal under periodic extension.

    Entry ``j`` refers to extended-signal sample ``(j + offset) mod ne``. ``src``
    additionally folds the padding sample of an odd-length signal onto its
    last real sample.
    """
    ne = n + (n & 1)
    offset = 1 - taps // 2
    pos = np.mod(np.arange(offset, offset + ne + taps - 2), ne)
    return np.minimum(pos, n - 1), pos


@njit(cache=True)
def _analyze_rows(x, h, g, src, m):
    rows = x.shape[0]
    taps = h.shape[0]
    a = np.empty((rows, m))
    d = np.empty((rows, m))
    for i in range(rows):
        for k in range(m):
            sa = 0.0
            sd = 0.0
            for t in range(taps):
                v = x[i, src[2 * k + t]]
                sa += h[t] * v
                sd += g[t] * v
            a[i, k] = sa
            d[i, k] = sd
    return a, d


@njit(cache=True)
def _analyze_cols(x, h, g, src, m):
    cols = x.shape[1]
    taps = h.shape[0]
    a = np.zeros((m, cols))
    d = np.zeros((m, cols))
    for k in range(m):
        for t in range(taps):
            r = src[2 * k + t]
            ht = h[t]
            gt = g[t]
            for j in range(cols):
                v = x[r, j]
                a[k, j] += ht * v
                d[k, j] += gt * v
    return a, d


@njit(cache=True)
def _synthesize_rows(a, d, h, g, pos, n):
    rows, m = a.shape
    taps = h.shape[0]
    out = np.zeros((rows, n))
    for i in range(rows):
        for k in range(m):
            ak = a[i, k]
            dk = d[i, k]
            for t in range(taps):
                p = pos[2 * k + t]
                if p < n:
                    out[i, p] += h[t] * ak + g[t] * dk
    return out


@njit(cache=True)
def _synthesize_cols(a, d, h, g, pos, n):
    m, cols = a.shape
    taps = h.shape[0]
    out = np.zeros((n, cols))
    for k in range(m):
        for t in range(taps):
            p = pos[2 * k + t]
            if p >= n:
                continue
            ht = h[t]
            gt = g[t]
            for j in range(cols):
                out[p, j] += ht * a[k, j] + gt * d[k, j]
    return out


def _analyze(x: np.ndarray, h: np.ndarray, g: np.ndarray, axis: int):
    """One periodized analysis step along ``axis`` of a 2-D array.

    ``a[k] = sum_t h[t] x[2k + t + offset]`` (likewise ``d`` with ``g``) with
    ``offset = 1 - len(h) // 2``.
    """
    n = x.shape[axis]
    src, _ = _positions(n, len(h))
    m = (n + 1) // 2
    x = np.ascontiguousarray(x)
    if axis == 1:
        return _analyze_rows(x, h, g, src, m)
    return _analyze_cols(x, h, g, src, m)


def _synthesize(a: np.ndarray, d: np.ndarray, h: np.ndarray, g: np.ndarray, n: int, axis: int):
    """Transpose of :func:`_analyze`, truncated to ``n`` samples along ``axis``."""
    _, pos = _positions(n, len(h))
    a = np.ascontiguousarray(a, dtype=np.float64)
    d = np.ascontiguousarray(d, dtype=np.float64)
    if axis == 1:
        return _synthesize_rows(a, d, h, g, pos, n)
    return _synthesize_cols(a, d, h, g, pos, n)


def fwt2(plane, spec: WaveletSpec = WaveletSpec()) -> SubbandPyramid:
    """Decompose a 2-D plane into ``spec.level`` levels of subbands."""
    current = np.asarray(plane, dtype=np.float64)
    if current.ndim != 2:
        raise ParameterError(f"expected a 2-D plane, got shape {current.shape}")
    spec.check(current.shape)
    h, g = filter_bank(spec.family)
    details = []
    dims = []
    for _ in range(spec.level):
        dims.append(current.shape)
        lo, hi = _analyze(current, h, g, axis=1)
        ll, lh = _analyze(lo, h, g, axis=0)
        hl, hh = _analyze(hi, h, g, axis=0)
        details.append((lh, hl, hh))
        current = ll
    return SubbandPyramid(current, tuple(reversed(details)), tuple(reversed(dims)), spec)


def ifwt2(pyr: SubbandPyramid, spec: WaveletSpec | None = None) -> np.ndarray:
    """Reconstruct the plane a pyramid was computed from."""
    spec = spec or pyr.spec
    if len(pyr.details) != len(pyr.original_dims) or not pyr.details:
        raise CorruptPyramidError("corrupt pyramid: details and dims disagree in length")
    h, g = filter_bank(spec.family)
    current = np.asarray(pyr.ll, dtype=np.float64)
    for (lh, hl, hh), (rows, cols) in zip(pyr.details, pyr.original_dims):
        expected = ((rows + 1) // 2, (cols + 1) // 2)
        if current.shape != expected or any(b.shape != expected for b in (lh, hl, hh)):
            raise CorruptPyramidError(
                f"corrupt pyramid: subbands {current.shape}/{lh.shape}/{hl.shape}/{hh.shape} "
                f"cannot rebuild a {rows}x{cols} plane"
            )
        lo = _synthesize(current, lh, h, g, rows, axis=0)
        hi = _synthesize(hl, hh, h, g, rows, axis=0)
        current = _synthesize(lo, hi, h, g, cols, axis=1)
    return current
