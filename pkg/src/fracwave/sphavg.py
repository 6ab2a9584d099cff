"""Fourier transforms of discrete measures and spherical decay averages.

``A(lam) = sum_k w_k |mu^(lam theta_k)|^2`` with ``mu^(xi) = sum_j m_j
exp(-i xi . x_j)`` and normalised quadrature weights on the unit sphere.

Large transforms use type-3 non-uniform FFTs (finufft), either in ``d``
dimensions or along rays ``lam -> mu^(lam theta)``, which is the 1D transform
of the projected atoms ``theta . x_j``.  Direct summation is the reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import chunk_slices, pmap
from .measures import DiscreteMeasure, unit_sphere_nodes

try:
    import finufft
except ImportError:  # pragma: no cover - finufft is a declared dependency
    finufft = None

__all__ = [
    "DecayCurve",
    "ExponentFit",
    "AverageResult",
    "measure_ft",
    "sphere_nodes",
    "spherical_average",
    "spherical_averages",
    "decay_sweep",
    "fit_exponent",
    "fit_loglog",
    "band_samples",
]

NUFFT_EPS = 1e-13
_DIRECT_LIMIT = 4_000_000
_GRID_LIMIT = 4e7


@dataclass(frozen=True)
class DecayCurve:
    lambdas: np.ndarray
    values: np.ndarray
    band_averaged: bool
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=np.float64)
        val = np.asarray(self.values, dtype=np.float64)
        if lam.shape != val.shape:
            raise ValueError("lambdas and values have different lengths")
        if lam.size > 1 and np.any(np.diff(lam) <= 0):
            raise ValueError("lambdas must be strictly increasing")
        if np.any(val < 0):
            raise ValueError("curve values must be non-negative")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "values", val)


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    stderr: float
    r2: float
    window: tuple

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "stderr": self.stderr,
            "r2": self.r2,
            "window": list(self.window),
        }


@dataclass(frozen=True)
class AverageResult:
    """Spherical average with the node count it converged at."""

    value: float
    nodes: int
    converged: bool

    def __float__(self) -> float:
        return self.value


# ---------------------------------------------------------------------------
# transforms


def _direct_ft(points, weights, freqs, sign=-1.0):
    out = np.empty(freqs.shape[0], dtype=np.complex128)
    rows = max(1, (1 << 21) // max(points.shape[0], 1))
    w = weights.astype(np.complex128)
    for sl in chunk_slices(freqs.shape[0], rows):
        out[sl] = np.exp(sign * 1j * (freqs[sl] @ points.T)) @ w
    return out


def _nufft_grid_estimate(points, freqs) -> float:
    ext_x = np.max(np.abs(points), axis=0) if points.size else np.zeros(1)
    ext_k = np.max(np.abs(freqs), axis=0) if freqs.size else np.zeros(1)
    per_dim = 4.0 * ext_x * ext_k / math.pi + 32.0
    return float(np.prod(per_dim))


def _nufft_type3(points, weights, freqs, sign=-1):
    d = points.shape[1]
    c = np.ascontiguousarray(weights, dtype=np.complex128)
    points = [np.ascontiguousarray(points[:, k]) for k in range(d)]
    freqs = [np.ascontiguousarray(freqs[:, k]) for k in range(d)]
    opts = dict(isign=int(sign), eps=NUFFT_EPS, nthreads=1)
    if d == 1:
        return finufft.nufft1d3(points[0], c, freqs[0], **opts)
    if d == 2:
        return finufft.nufft2d3(*points, c, *freqs, **opts)
    return finufft.nufft3d3(*points, c, *freqs, **opts)


def ft_at(points, weights, freqs, sign: int = -1, method: str = "auto") -> np.ndarray:
    """``sum_j weights_j exp(sign * i freqs . points_j)`` for each frequency row."""
    points = np.asarray(points, dtype=np.float64)
    freqs = np.asarray(freqs, dtype=np.float64)
    d = points.shape[1]
    freqs = freqs.reshape(-1, d)
    if method == "auto":
        work = points.shape[0] * freqs.shape[0]
        if work <= _DIRECT_LIMIT or finufft is None or d > 3:
            method = "direct"
        elif _nufft_grid_estimate(points, freqs) <= _GRID_LIMIT:
            method = "nufft"
        else:
            method = "direct"
    if method == "direct":
        return _direct_ft(points, np.asarray(weights), freqs, float(sign))
    if method == "nufft":
        return _nufft_type3(points, np.asarray(weights), freqs, sign)
    raise ValueError(f"unknown transform method {method!r}")


def measure_ft(mu: DiscreteMeasure, xi, method: str = "auto"):
    """``mu^(xi) = sum_j w_j exp(-i xi . x_j)`` at one frequency or many."""
    xi = np.asarray(xi, dtype=np.float64)
    single = xi.ndim <= 1 and xi.size == mu.dim
    vals = ft_at(mu.points, mu.weights, xi.reshape(-1, mu.dim), -1, method)
    return complex(vals[0]) if single else vals


def ray_ft(mu: DiscreteMeasure, dirs, lams, method: str = "auto") -> np.ndarray:
    """``mu^(lam theta)`` for every direction ``theta`` and radius ``lam``.

    Returns an array of shape ``(len(dirs), len(lams))``.  Along each ray the
    transform is one-dimensional in the projections ``theta . x_j``.
    """
    dirs = np.asarray(dirs, dtype=np.float64).reshape(-1, mu.dim)
    lams = np.asarray(lams, dtype=np.float64).reshape(-1)
    if method == "auto":
        work = mu.size * dirs.shape[0] * lams.size
        if work <= _DIRECT_LIMIT or finufft is None:
            method = "direct"
        else:
            full = np.max(lams) * np.ones(mu.dim)
            grid = _nufft_grid_estimate(mu.points, full[None, :])
            method = "nufft" if grid <= _GRID_LIMIT and mu.dim > 1 else "ray"
    if method in ("direct", "nufft"):
        freqs = (dirs[:, None, :] * lams[None, :, None]).reshape(-1, mu.dim)
        vals = ft_at(mu.points, mu.weights, freqs, -1, method)
        return vals.reshape(dirs.shape[0], lams.size)
    if method != "ray":
        raise ValueError(f"unknown transform method {method!r}")
    proj = mu.points @ dirs.T
    c = mu.weights.astype(np.complex128)

    def one(k):
        if finufft is None or mu.size * lams.size <= 1 << 16:
            return np.exp(-1j * np.outer(lams, proj[:, k])) @ c
        return finufft.nufft1d3(np.ascontiguousarray(proj[:, k]), c, lams, isign=-1, eps=NUFFT_EPS, nthreads=1)

    return np.array(pmap(one, range(dirs.shape[0])))


def sphere_nodes(d: int, m: int):
    """Unit vectors and equal weights summing to one.

    Equispaced angles for ``d = 2`` (exact for trigonometric polynomials of
    degree below ``m``) and a Fibonacci spiral for ``d = 3``.
    """
    if d not in (2, 3):
        raise ValueError("sphere quadrature is available for d = 2 and 3 only")
    if m < 8:
        raise ValueError("need at least 8 nodes")
    return unit_sphere_nodes(d, m), np.full(m, 1.0 / m)


# ---------------------------------------------------------------------------
# spherical averages


def _default_nodes(mu: DiscreteMeasure, lam: float) -> int:
    if mu.dim == 2:
        # |mu^(lam theta)|^2 is a trigonometric polynomial in the angle of
        # effective degree about 2 lam R, which the equispaced rule integrates
        # exactly once the node count exceeds it
        rad = float(np.max(np.sqrt(np.sum(mu.points**2, axis=1)))) if mu.size else 0.0
        need = 2 * lam * rad + 16
        return int(2 ** math.ceil(math.log2(max(need, 8))))
    return 64


def spherical_averages(mu: DiscreteMeasure, lams, nodes=None, rel_tol: float = 0.01, max_doublings: int = 4):
    """Spherical averages for many radii with per-radius node doubling.

    Parameters
    ----------
    nodes : int or None
        Starting node count; by default chosen from ``lam`` and the support
        radius.

    Returns
    -------
    list of AverageResult
    """
    if mu.dim not in (2, 3):
        raise ValueError("spherical averages are implemented for d = 2 and 3")
    lams = np.asarray(lams, dtype=np.float64).reshape(-1)
    if np.any(lams < 0):
        raise ValueError("lambda must be non-negative")
    start = np.array([nodes if nodes else _default_nodes(mu, lam) for lam in lams], dtype=np.int64)
    mass2 = mu.mass**2
    results = [None] * lams.size
    prev = np.full(lams.size, np.nan)
    current = start.copy()
    pending = np.arange(lams.size)
    for step in range(max_doublings + 2):
        vals = np.empty(pending.size)
        for m in np.unique(current[pending]):
            sel = pending[current[pending] == m]
            dirs, w = sphere_nodes(mu.dim, int(m))
            amp = ray_ft(mu, dirs, lams[sel])
            vals[np.searchsorted(pending, sel)] = w @ (np.abs(amp) ** 2)
        vals = np.minimum(vals, mass2)
        still = []
        for i, v in zip(pending, vals):
            if step > 0 and abs(v - prev[i]) <= rel_tol * max(v, prev[i]) + 1e-14 * mass2:
                results[i] = AverageResult(float(v), int(current[i]), True)
            elif step == max_doublings + 1:
                results[i] = AverageResult(float(v), int(current[i]), False)
            else:
                prev[i] = v
                current[i] *= 2
                still.append(i)
        pending = np.array(still, dtype=np.int64)
        if pending.size == 0:
            break
    return results


def spherical_average(mu: DiscreteMeasure, lam: float, nodes=None) -> AverageResult:
    """``A(lam)`` with node doubling until successive values agree within 1%."""
    return spherical_averages(mu, [lam], nodes)[0]


def band_samples(lam: float, count: int = 16) -> np.ndarray:
    """Log-uniform midpoints of ``count`` sub-bands of ``[lam, 2 lam]``."""
    return lam * 2.0 ** ((np.arange(count) + 0.5) / count)


def decay_sweep(mu: DiscreteMeasure, lam_min: float, lam_max: float, per_octave: int = 4,
                band_average: bool = True, nodes=None) -> DecayCurve:
    """Sample ``A(lam)`` on a geometric grid from ``lam_min`` to ``lam_max``.

    With ``band_average`` each value is the mean of ``A`` over 16 log-uniform
    sub-samples of ``[lam, 2 lam]``.
    """
    if lam_max < 4 * lam_min:
        raise ValueError("need lam_max >= 4 lam_min")
    if per_octave < 4:
        raise ValueError("need at least 4 points per octave")
    count = int(math.floor(per_octave * math.log2(lam_max / lam_min) + 1e-9)) + 1
    lams = lam_min * 2.0 ** (np.arange(count) / per_octave)
    sub = np.array([band_samples(l) if band_average else [l] for l in lams])
    res = spherical_averages(mu, sub.reshape(-1), nodes)
    vals = np.array([r.value for r in res]).reshape(sub.shape)
    node_counts = np.array([r.nodes for r in res]).reshape(sub.shape).max(axis=1)
    conv = np.array([r.converged for r in res]).reshape(sub.shape).all(axis=1)
    meta = {
        "label": mu.label,
        "nodes": node_counts.tolist(),
        "converged": conv.tolist(),
        "per_octave": per_octave,
    }
    return DecayCurve(lams, vals.mean(axis=1), band_average, meta)


# ---------------------------------------------------------------------------
# fitting


def fit_loglog(x, y) -> ExponentFit:
    """Ordinary least squares of ``log y`` against ``log x``.

    A curve with no variation in ``log y`` is reported with ``r2 = 1`` and
    zero standard error.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.size < 4:
        raise ValueError("a fit needs at least 4 points")
    if np.any(y <= 0) or np.any(x <= 0):
        raise ValueError("log-log fit needs positive values")
    lx, ly = np.log(x), np.log(y)
    mx, my = lx.mean(), ly.mean()
    sxx = np.sum((lx - mx) ** 2)
    if sxx == 0:
        raise ValueError("fit needs at least two distinct abscissae")
    slope = float(np.sum((lx - mx) * (ly - my)) / sxx)
    intercept = float(my - slope * mx)
    resid = ly - (intercept + slope * lx)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((ly - my) ** 2))
    scale = max(1.0, float(np.max(np.abs(ly))))
    if ss_tot <= (1e-12 * scale) ** 2 * x.size:
        r2, stderr = 1.0, 0.0
        slope = 0.0 if abs(slope) < 1e-12 else slope
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
        stderr = float(math.sqrt(ss_res / (x.size - 2) / sxx))
    return ExponentFit(slope, intercept, stderr, r2, (float(x.min()), float(x.max())))


def fit_exponent(curve: DecayCurve) -> ExponentFit:
    """Log-log fit of a decay curve; ``-slope`` estimates the decay order."""
    return fit_loglog(curve.lambdas, curve.values)
