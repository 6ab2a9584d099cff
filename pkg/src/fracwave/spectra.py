"""Band-limited functions on the integer frequency lattice.

A :class:`BandFunction` stores finitely many coefficients ``c_xi`` indexed by
``xi`` in ``Z^d`` and represents

    f(x) = sum_xi c_xi exp(i xi . x)

(the ``(2 pi)^{-d}`` normalisation is dropped everywhere).  The half-wave
propagator acts by ``c_xi -> exp(i t |xi|) c_xi``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ._parallel import chunk_slices, pmap

__all__ = [
    "BandFunction",
    "FrequencyRegion",
    "TimeGrid",
    "lp_bump",
    "evaluate",
    "evaluate_grid",
    "l2_norm",
    "sobolev_norm",
    "littlewood_paley",
    "half_wave",
    "maximal_field",
    "region_modes",
]

# complex entries per exponential block in direct summation
_BLOCK = 1 << 21


class BandFunction:
    """Finite Fourier series on ``Z^d``.

    Parameters
    ----------
    dim : int
        Spatial dimension.
    freqs : array_like of int, shape (N, dim)
        Distinct frequency vectors.
    coeffs : array_like of complex, shape (N,)
        Coefficients ``c_xi``.
    """

    __slots__ = ("dim", "freqs", "coeffs", "_norms")

    def __init__(self, dim: int, freqs, coeffs, *, check: bool = True):
        dim = int(dim)
        if dim < 1:
            raise ValueError("dimension must be at least 1")
        fr = np.asarray(freqs)
        if fr.size == 0:
            fr = np.zeros((0, dim), dtype=np.int64)
        fr = np.ascontiguousarray(fr.reshape(-1, dim))
        if check and fr.dtype.kind == "f":
            if not np.all(fr == np.round(fr)):
                raise ValueError("frequencies must be integer vectors")
        fr = fr.astype(np.int64, copy=False)
        c = np.ascontiguousarray(np.asarray(coeffs, dtype=np.complex128).reshape(-1))
        if c.shape[0] != fr.shape[0]:
            raise ValueError("freqs and coeffs have different lengths")
        if check:
            if not np.all(np.isfinite(c)):
                raise ValueError("coefficients must be finite")
            if fr.shape[0] > 1 and np.unique(fr, axis=0).shape[0] != fr.shape[0]:
                raise ValueError("duplicate frequencies")
        fr.setflags(write=False)
        c.setflags(write=False)
        self.dim = dim
        self.freqs = fr
        self.coeffs = c
        self._norms = None

    @classmethod
    def from_dict(cls, dim: int, modes: dict) -> "BandFunction":
        """Build from a mapping ``{frequency tuple: coefficient}``."""
        keys = list(modes)
        fr = np.array([tuple(np.atleast_1d(k)) for k in keys], dtype=np.int64).reshape(-1, dim)
        return cls(dim, fr, [modes[k] for k in keys])

    @property
    def size(self) -> int:
        return self.freqs.shape[0]

    def __len__(self) -> int:
        return self.size

    @property
    def radii(self) -> np.ndarray:
        """``|xi|`` for each mode."""
        if self._norms is None:
            self._norms = np.sqrt(np.sum(self.freqs.astype(np.float64) ** 2, axis=1))
        return self._norms

    def with_coeffs(self, coeffs) -> "BandFunction":
        """Same mode set with new coefficients."""
        out = BandFunction(self.dim, self.freqs, coeffs, check=False)
        out._norms = self._norms
        if not np.all(np.isfinite(out.coeffs)):
            raise ValueError("coefficients must be finite")
        return out

    def to_dict(self) -> dict:
        return {tuple(int(v) for v in k): complex(c) for k, c in zip(self.freqs, self.coeffs)}

    def __repr__(self) -> str:
        return f"BandFunction(dim={self.dim}, modes={self.size})"


@dataclass(frozen=True)
class FrequencyRegion:
    """Lattice region in frequency space.

    ``kind`` is one of ``"ball"`` (``|xi| <= lam``), ``"annulus"``
    (``||xi| - lam| <= width``), ``"plate"`` (``lam <= xi_1 <= 2 lam``,
    ``|xi'| <= sqrt(lam)``) and ``"cone"`` (points ``(xi, tau)`` of
    ``Z^{dim+1}`` with ``|tau - |xi|| <= width`` and ``lam/2 <= |xi| <= 2 lam``).
    """

    kind: str
    dim: int
    lam: float
    width: float = 1.0

    def __post_init__(self):
        if self.kind not in ("ball", "annulus", "plate", "cone"):
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dimension must be at least 1")
        if self.lam < 0 or self.width < 0:
            raise ValueError("region parameters must be non-negative")

    def contains(self, xi) -> np.ndarray:
        """Membership predicate for integer vectors (rows of ``xi``)."""
        xi = np.atleast_2d(np.asarray(xi, dtype=np.float64))
        if self.kind == "cone":
            r = np.sqrt(np.sum(xi[:, :-1] ** 2, axis=1))
            tau = xi[:, -1]
            return (np.abs(tau - r) <= self.width) & (r >= self.lam / 2) & (r <= 2 * self.lam)
        r2 = np.sum(xi**2, axis=1)
        if self.kind == "ball":
            return r2 <= self.lam**2
        if self.kind == "annulus":
            r = np.sqrt(r2)
            return np.abs(r - self.lam) <= self.width
        x1 = xi[:, 0]
        rest = r2 - x1**2
        return (x1 >= self.lam) & (x1 <= 2 * self.lam) & (rest <= self.lam)


def lp_bump(r) -> np.ndarray:
    """Littlewood-Paley bump ``exp(1 - 1/(1 - log2(r)^2))`` on ``(1/2, 2)``."""
    r = np.asarray(r, dtype=np.float64)
    out = np.zeros_like(r)
    pos = r > 0
    u = np.zeros_like(r)
    u[pos] = np.log2(r[pos])
    inside = pos & (np.abs(u) < 1)
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return out


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on ``[t_min, t_max]`` including both endpoints.

    The realised step is ``(t_max - t_min) / n`` with ``n`` the smallest
    integer making it at most ``step``.
    """

    t_min: float
    t_max: float
    step: float

    def __post_init__(self):
        if not self.t_min < self.t_max:
            raise ValueError("time grid needs t_min < t_max")
        if not self.step > 0:
            raise ValueError("time grid step must be positive")

    @property
    def count(self) -> int:
        return int(math.ceil((self.t_max - self.t_min) / self.step - 1e-9)) + 1

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.count)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights; they sum to ``t_max - t_min``."""
        n = self.count
        h = (self.t_max - self.t_min) / (n - 1)
        w = np.full(n, h)
        w[0] = w[-1] = h / 2
        return w

    @classmethod
    def for_band(cls, t_min: float, t_max: float, lam_max: float, per_unit: float = 16.0):
        """Grid with step ``1/(per_unit * lam_max)``."""
        return cls(t_min, t_max, 1.0 / (per_unit * max(lam_max, 1.0)))


# ---------------------------------------------------------------------------
# evaluation


def _phase_sum(points: np.ndarray, freqs: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """``sum_n coeffs[n, ...] exp(i freqs[n] . points[j])`` by blocks of points."""
    m = points.shape[0]
    n = freqs.shape[0]
    tail = coeffs.shape[1:]
    out = np.zeros((m,) + tail, dtype=np.complex128)
    if n == 0 or m == 0:
        return out
    ff = freqs.astype(np.float64)
    rows = max(1, _BLOCK // max(n, 1))

    def work(sl):
        ph = points[sl] @ ff.T
        return np.exp(1j * ph) @ coeffs

    blocks = chunk_slices(m, rows)
    for sl, val in zip(blocks, pmap(work, blocks)):
        out[sl] = val
    return out


def evaluate(f: BandFunction, x) -> complex | np.ndarray:
    """Evaluate ``f`` at one point or at an array of points of shape (M, d).

    Direct summation over modes, in fixed order for every point.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1 or (x.ndim == 0 and f.dim == 1)
    pts = x.reshape(-1, f.dim)
    val = _phase_sum(pts, f.freqs, f.coeffs)
    return complex(val[0]) if single else val


def evaluate_grid(f: BandFunction, axes) -> np.ndarray:
    """Evaluate ``f`` on the tensor grid ``axes[0] x ... x axes[d-1]``.

    The coefficients are scattered into their bounding box and contracted one
    axis at a time with the one-dimensional exponential tables, which turns
    the sum into a sequence of matrix products.
    """
    axes = [np.asarray(a, dtype=np.float64).reshape(-1) for a in axes]
    if len(axes) != f.dim:
        raise ValueError("need one coordinate array per dimension")
    if f.size == 0:
        return np.zeros(tuple(len(a) for a in axes), dtype=np.complex128)
    lo = f.freqs.min(axis=0)
    hi = f.freqs.max(axis=0)
    box = np.zeros(tuple(int(h - l + 1) for l, h in zip(lo, hi)), dtype=np.complex128)
    box[tuple((f.freqs - lo).T)] = f.coeffs
    out = box
    for k in range(f.dim):
        ks = np.arange(lo[k], hi[k] + 1, dtype=np.float64)
        table = np.exp(1j * np.outer(axes[k], ks))
        # contract axis k of out with table, keep the new axis at position k
        out = np.moveaxis(np.tensordot(table, out, axes=([1], [k])), 0, k)
    return out


def l2_norm(f: BandFunction) -> float:
    """``(sum |c_xi|^2)^(1/2)``."""
    return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2)))


def sobolev_norm(f: BandFunction, s: float) -> float:
    """``(sum (1 + |xi|^2)^s |c_xi|^2)^(1/2)``."""
    w = (1.0 + f.radii**2) ** s
    return float(np.sqrt(np.sum(w * np.abs(f.coeffs) ** 2)))


def littlewood_paley(f: BandFunction, lam: float) -> BandFunction:
    """Multiply by ``lp_bump(|xi|/lam)`` and drop modes outside the support."""
    if lam < 2:
        raise ValueError("littlewood_paley needs lam >= 2")
    m = lp_bump(f.radii / lam)
    keep = m > 0
    return BandFunction(f.dim, f.freqs[keep], f.coeffs[keep] * m[keep], check=False)


def half_wave(f: BandFunction, t: float) -> BandFunction:
    """Apply ``exp(i t sqrt(-Laplacian))``."""
    if t == 0:
        return f
    return f.with_coeffs(f.coeffs * np.exp(1j * t * f.radii))


def maximal_field(f: BandFunction, points, tgrid: TimeGrid):
    """Maximum over grid times of ``|exp(i t sqrt(-Lap)) f|`` at each point.

    Returns
    -------
    sup : ndarray, shape (M,)
    argmax_t : ndarray, shape (M,)
        Smallest grid time attaining the maximum.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, f.dim)
    times = tgrid.nodes
    cols = max(1, _BLOCK // max(f.size, 1))
    best = np.full(pts.shape[0], -1.0)
    arg = np.zeros(pts.shape[0])
    for sl in chunk_slices(times.size, cols):
        tc = times[sl]
        mult = f.coeffs[:, None] * np.exp(1j * np.outer(f.radii, tc))
        vals = np.abs(_phase_sum(pts, f.freqs, mult))
        k = np.argmax(vals, axis=1)
        v = vals[np.arange(pts.shape[0]), k]
        better = v > best
        best[better] = v[better]
        arg[better] = tc[k[better]]
    return best, arg


# ---------------------------------------------------------------------------
# lattice enumeration


def _box(dim: int, lo, hi) -> np.ndarray:
    rng = [np.arange(int(a), int(b) + 1) for a, b in zip(lo, hi)]
    if any(r.size == 0 for r in rng):
        return np.zeros((0, dim), dtype=np.int64)
    grids = np.meshgrid(*rng, indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1).astype(np.int64)


def _ball_rows(dim: int, radius: float, inner: float = -1.0) -> np.ndarray:
    """Integer vectors with ``inner <= |xi| <= radius`` (superset, unsorted).

    The first ``dim - 1`` coordinates are scanned and the admissible range of
    the last one is solved for, so memory stays proportional to the output.
    """
    if radius < 0:
        return np.zeros((0, dim), dtype=np.int64)
    R = math.floor(radius + 1e-12)
    r2 = radius * radius
    if dim == 1:
        head = np.zeros((1, 0), dtype=np.int64)
    else:
        head = _box(dim - 1, [-R] * (dim - 1), [R] * (dim - 1))
    h2 = np.sum(head.astype(np.float64) ** 2, axis=1)
    ok = h2 <= r2 + 1e-9
    head, h2 = head[ok], h2[ok]
    top = np.floor(np.sqrt(np.maximum(r2 - h2, 0.0)) + 1e-9).astype(np.int64)
    if inner > 0:
        bot = np.ceil(np.sqrt(np.maximum(inner * inner - h2, 0.0)) - 1e-9).astype(np.int64)
        bot = np.minimum(bot, top + 1)
    else:
        bot = np.zeros_like(top)
    # non-negative part [bot, top] and its mirror [-top, -bot] (without 0 twice)
    segs = []
    for sign in (-1, 1):
        lo = bot if sign == 1 else np.maximum(bot, 1)
        cnt = np.maximum(top - lo + 1, 0)
        rows = np.repeat(np.arange(head.shape[0]), cnt)
        offs = np.arange(rows.size) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        last = sign * (lo[rows] + offs)
        segs.append(np.concatenate([head[rows], last[:, None]], axis=1))
    return np.concatenate(segs, axis=0).astype(np.int64)


def region_modes(region: FrequencyRegion) -> np.ndarray:
    """Exact lattice enumeration of ``region`` in lexicographic order.

    Returns an integer array of shape (N, dim), or (N, dim + 1) for cones.
    """
    d = region.dim
    lam, w = float(region.lam), float(region.width)
    if region.kind == "ball":
        pts = _ball_rows(d, lam)
    elif region.kind == "annulus":
        pts = _ball_rows(d, lam + w, inner=max(lam - w, 0.0))
    elif region.kind == "plate":
        k = math.floor(math.sqrt(lam) + 1e-12)
        lo = [math.ceil(lam - 1e-12)] + [-k] * (d - 1)
        hi = [math.floor(2 * lam + 1e-12)] + [k] * (d - 1)
        pts = _box(d, lo, hi)
    else:
        sp = _ball_rows(d, 2 * lam, inner=lam / 2)
        r = np.sqrt(np.sum(sp.astype(np.float64) ** 2, axis=1))
        lo = np.ceil(r - w - 1e-12).astype(np.int64)
        hi = np.floor(r + w + 1e-12).astype(np.int64)
        cnt = hi - lo + 1
        rows = np.repeat(np.arange(sp.shape[0]), cnt)
        offs = np.arange(rows.size) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        pts = np.concatenate([sp[rows], (lo[rows] + offs)[:, None]], axis=1)
    if pts.shape[0] == 0:
        return pts
    # exact membership with the float predicate, then lexicographic order
    pts = pts[region.contains(pts)]
    order = np.lexsort(pts.T[::-1])
    return np.ascontiguousarray(pts[order])
