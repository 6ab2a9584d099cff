"""Discrete measures made of weighted atoms.

Every continuous measure is replaced by atoms at cell centres carrying the
cell mass.  Constructors attach the regularity exponent they are built for in
``meta["alpha"]`` and the constructor arguments in ``meta["spec"]`` so that a
measure can be rebuilt from its JSON description.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.signal import fftconvolve
from scipy.spatial import cKDTree

__all__ = [
    "DiscreteMeasure",
    "TimeSelector",
    "RegularityReport",
    "MeasureSizeError",
    "DEFAULT_ATOM_CAP",
    "cantor_dust",
    "radial_power_measure",
    "product_delta_measure",
    "ball_union_measure",
    "sphere_surface_measure",
    "point_mass",
    "ball_masses",
    "regularity",
    "pushforward",
    "restrict",
    "weak_lorentz_norm",
    "lq_norm",
    "parse_measure_spec",
    "dump_measure_spec",
    "build_measure",
]

DEFAULT_ATOM_CAP = 2_000_000


class MeasureSizeError(ValueError):
    """Raised when a constructor would exceed the atom cap."""


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Weighted atoms ``sum_j w_j delta_{x_j}`` in ``R^dim``.

    ``grid`` is optional metadata ``(step, index)`` stating that
    ``points == step * index`` for an integer array ``index``; evaluators use
    it to switch to tensor-grid summation.
    """

    dim: int
    points: np.ndarray
    weights: np.ndarray
    label: str = ""
    meta: dict = field(default_factory=dict)
    grid: tuple | None = None

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64).reshape(-1, self.dim))
        w = np.ascontiguousarray(np.asarray(self.weights, dtype=np.float64).reshape(-1))
        if pts.shape[0] != w.shape[0]:
            raise ValueError("points and weights have different lengths")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
        if not np.all(np.isfinite(pts)):
            raise ValueError("atom locations must be finite")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    def __len__(self) -> int:
        return self.size

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights))

    @property
    def alpha(self):
        return self.meta.get("alpha")

    def in_unit_ball(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.sum(self.points**2, axis=1) <= 1.0 + tol))

    def scaled(self, c: float) -> "DiscreteMeasure":
        """Same atoms with weights multiplied by ``c``."""
        return DiscreteMeasure(self.dim, self.points, c * self.weights, self.label, dict(self.meta), self.grid)

    def __repr__(self) -> str:
        return f"DiscreteMeasure(dim={self.dim}, atoms={self.size}, mass={self.mass:.6g}, label={self.label!r})"


@dataclass(frozen=True, eq=False)
class TimeSelector:
    """Per-atom times in ``(0, 1)`` aligned with one measure's atom list."""

    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64).reshape(-1))
        if np.any(v <= 0) or np.any(v >= 1):
            raise ValueError("selector times must lie in the open interval (0, 1)")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class RegularityReport:
    """Probe-ball lower bound for ``sup rho^-alpha mu(B(x, rho))``."""

    alpha: float
    c_alpha_lower: float
    total_mass: float
    probe_count: int
    worst_ball: tuple
    thinned: bool = False


def _check_cap(n: int, cap: int | None) -> None:
    cap = DEFAULT_ATOM_CAP if cap is None else cap
    if n > cap:
        raise MeasureSizeError(f"{n} atoms exceed the cap of {cap}; pass a larger cap to override")


def _num(x):
    """JSON-friendly exact representation of a constructor argument."""
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    return x


# ---------------------------------------------------------------------------
# constructors


def point_mass(dim: int, at=None, weight: float = 1.0) -> DiscreteMeasure:
    """Single atom (at the origin by default)."""
    x = np.zeros(dim) if at is None else np.asarray(at, dtype=np.float64)
    meta = {"alpha": 0.0}
    if at is None and weight == 1.0:
        meta["spec"] = {"type": "point-mass", "dim": dim}
    return DiscreteMeasure(dim, x.reshape(1, dim), [weight], "point-mass", meta)


def _cantor_centres(r: float, depth: int, branches: int) -> np.ndarray:
    centres = np.array([0.0])
    length = 1.0
    for _ in range(depth):
        child = r * length
        if branches == 1:
            offs = np.array([0.0])
        else:
            gap = (length - child) / (branches - 1)
            offs = -length / 2 + child / 2 + gap * np.arange(branches)
        centres = (centres[:, None] + offs[None, :]).reshape(-1)
        length = child
    return centres


def cantor_dust(dim: int, r=Fraction(1, 4), depth: int = 5, branches: int = 2, cap: int | None = None) -> DiscreteMeasure:
    """Product Cantor dust in ``[-1/2, 1/2]^dim``.

    Each step keeps ``branches`` equally spaced subintervals of relative
    length ``r`` per axis, the outer ones flush with the parent's ends.  The
    result has ``branches^(depth*dim)`` equal atoms at the surviving cell
    centres and similarity dimension ``dim * log(branches) / log(1/r)``.
    """
    r = Fraction(r) if not isinstance(r, float) else r
    rf = float(r)
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if not 0 < rf <= 0.5 and branches >= 2:
        raise ValueError("keep ratio must lie in (0, 1/2]")
    if branches * rf > 1 + 1e-12:
        raise ValueError("branches * r must not exceed 1")
    n = branches ** (depth * dim)
    _check_cap(n, cap)
    c1 = _cantor_centres(rf, depth, branches)
    grids = np.meshgrid(*([c1] * dim), indexing="ij")
    pts = np.stack([g.reshape(-1) for g in grids], axis=1)
    w = np.full(pts.shape[0], 1.0 / pts.shape[0])
    alpha = dim * math.log(branches) / math.log(1.0 / rf)
    spec = {"type": "cantor", "dim": dim, "r": _num(r), "depth": depth, "branches": branches}
    return DiscreteMeasure(dim, pts, w, f"cantor(dim={dim},r={_num(r)},J={depth},b={branches})", {"alpha": alpha, "spec": spec})


def _grid_in_ball(dim: int, h: float, radius: float, cap: int | None):
    k = int(math.floor(radius / h + 1e-9))
    est = (2 * k + 1) ** dim
    ax = np.arange(-k, k + 1)
    if dim == 1:
        idx = ax.reshape(-1, 1)
    else:
        grids = np.meshgrid(*([ax] * dim), indexing="ij")
        if est > 8 * (cap or DEFAULT_ATOM_CAP):
            raise MeasureSizeError("grid too large for the atom cap")
        idx = np.stack([g.reshape(-1) for g in grids], axis=1)
    pts = h * idx
    keep = np.sum(pts**2, axis=1) <= radius**2 * (1 + 1e-12)
    idx = idx[keep]
    _check_cap(idx.shape[0], cap)
    return idx.astype(np.int64), h * idx


def radial_power_measure(dim: int, alpha, h, cap: int | None = None) -> DiscreteMeasure:
    """Discretisation of ``|x|^(alpha-dim) dx`` on the ball of radius 1/2.

    Atoms sit on the grid ``h Z^dim`` with weight ``h^dim |x|^(alpha-dim)``;
    the origin cell uses ``|x| = h/2``.
    """
    a = float(alpha)
    hf = float(h)
    if not 0 < a <= dim:
        raise ValueError("alpha must lie in (0, dim]")
    if hf > 1 / 8 + 1e-15:
        raise ValueError("grid step must be at most 1/8")
    idx, pts = _grid_in_ball(dim, hf, 0.5, cap)
    r = np.sqrt(np.sum(pts**2, axis=1))
    r[r == 0] = hf / 2
    w = hf**dim * r ** (a - dim)
    spec = {"type": "radial-power", "dim": dim, "alpha": _num(alpha), "h": _num(h)}
    return DiscreteMeasure(dim, pts, w, f"radial-power(dim={dim},alpha={_num(alpha)},h={_num(h)})",
                           {"alpha": a, "spec": spec}, grid=(hf, idx))


def product_delta_measure(dim: int, alpha, h, cap: int | None = None) -> DiscreteMeasure:
    """Measure on the slice ``{x_{l+1} = ... = x_dim = 0}`` with ``l = ceil(alpha)``.

    Inside that ``l``-dimensional slice, atoms sit on ``h Z^l`` within the
    ball of radius 1/2 with weight ``h^l |x_l|^(alpha-l)`` (``|x_l| = h/2`` on
    the hyperplane ``x_l = 0``).
    """
    a = float(alpha)
    hf = float(h)
    if not 0 < a <= dim:
        raise ValueError("alpha must lie in (0, dim]")
    ell = int(math.ceil(a - 1e-12))
    sidx, spts = _grid_in_ball(ell, hf, 0.5, cap)
    xl = np.abs(spts[:, ell - 1])
    xl[xl == 0] = hf / 2
    w = hf**ell * xl ** (a - ell)
    idx = np.zeros((sidx.shape[0], dim), dtype=np.int64)
    idx[:, :ell] = sidx
    spec = {"type": "product-delta", "dim": dim, "alpha": _num(alpha), "h": _num(h)}
    return DiscreteMeasure(dim, hf * idx, w, f"product-delta(dim={dim},alpha={_num(alpha)},h={_num(h)})",
                           {"alpha": a, "spec": spec, "slice_dim": ell}, grid=(hf, idx))


def ball_union_centres(dim: int, alpha, lam):
    """Centred lattice of spacing ``lam^(-alpha/dim)`` in ``[-1/2, 1/2]^dim``.

    Returns ``(axis, spacing)``; the centres are the tensor product of
    ``axis`` with itself.
    """
    a = float(alpha)
    s = float(lam) ** (-a / dim)
    n = max(1, int(math.floor(1.0 / s + 1e-9)))
    axis = (np.arange(n) - (n - 1) / 2) * s
    return axis, s


def ball_union_measure(dim: int, alpha, lam, cap: int | None = None) -> DiscreteMeasure:
    """One atom of weight ``lam^(-alpha)`` per ball of radius ``1/lam``.

    The ball centres form a centred lattice of spacing ``lam^(-alpha/dim)``
    filling the unit cube ``[-1/2, 1/2]^dim`` (inside the unit ball for
    ``dim <= 3``), so the number of balls is about ``lam^alpha`` and the
    total mass is about 1.
    """
    if float(lam) < 4:
        raise ValueError("ball_union_measure needs lam >= 4")
    a = float(alpha)
    if not 0 < a <= dim:
        raise ValueError("alpha must lie in (0, dim]")
    axis, s = ball_union_centres(dim, alpha, lam)
    _check_cap(axis.size**dim, cap)
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    pts = np.stack([g.reshape(-1) for g in grids], axis=1)
    w = np.full(pts.shape[0], float(lam) ** (-a))
    spec = {"type": "ball-union", "dim": dim, "alpha": _num(alpha), "lam": _num(lam)}
    return DiscreteMeasure(dim, pts, w, f"ball-union(dim={dim},alpha={_num(alpha)},lam={_num(lam)})",
                           {"alpha": a, "spec": spec, "spacing": s, "axis": axis})


def sphere_surface_measure(dim: int, radius=1.0, nodes: int = 1024, cap: int | None = None) -> DiscreteMeasure:
    """Normalised surface measure on ``{|x| = radius}`` with ``nodes`` atoms.

    Equispaced angles for ``dim = 2``; a Fibonacci spiral for ``dim = 3``.
    """
    t = float(radius)
    if dim not in (2, 3):
        raise ValueError("sphere_surface_measure supports dim 2 and 3 only")
    if not 0 < t <= 1:
        raise ValueError("radius must lie in (0, 1]")
    _check_cap(nodes, cap)
    u = unit_sphere_nodes(dim, nodes)
    spec = {"type": "sphere", "dim": dim, "radius": _num(radius), "nodes": int(nodes)}
    return DiscreteMeasure(dim, t * u, np.full(nodes, 1.0 / nodes), f"sphere(dim={dim},radius={_num(radius)},M={nodes})",
                           {"alpha": float(dim - 1), "spec": spec})


def unit_sphere_nodes(dim: int, m: int) -> np.ndarray:
    """Equal-weight nodes on the unit circle (``dim=2``) or sphere (``dim=3``)."""
    if dim == 2:
        ang = 2 * np.pi * np.arange(m) / m
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    if dim == 3:
        i = np.arange(m) + 0.5
        z = 1.0 - 2.0 * i / m
        rho = np.sqrt(np.maximum(1.0 - z * z, 0.0))
        phi = np.pi * (3.0 - math.sqrt(5.0)) * np.arange(m)
        return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    raise ValueError("sphere nodes are available for dim 2 and 3 only")


# ---------------------------------------------------------------------------
# regularity probing


def ball_masses(mu: DiscreteMeasure, centres, radius: float, tree: cKDTree | None = None) -> np.ndarray:
    """``mu(B(c, radius))`` (closed balls) for each centre."""
    c = np.asarray(centres, dtype=np.float64).reshape(-1, mu.dim)
    tree = cKDTree(mu.points) if tree is None else tree
    w = mu.weights
    if w.size and np.all(w == w[0]):
        cnt = tree.query_ball_point(c, radius, return_length=True)
        return w[0] * np.asarray(cnt, dtype=np.float64)
    lists = tree.query_ball_point(c, radius)
    lengths = np.fromiter((len(v) for v in lists), dtype=np.int64, count=len(lists))
    flat = np.fromiter(itertools.chain.from_iterable(lists), dtype=np.int64, count=int(lengths.sum()))
    vals = w[flat]
    out = np.zeros(c.shape[0])
    nz = lengths > 0
    starts = (np.cumsum(lengths) - lengths)[nz]
    if starts.size:
        out[nz] = np.add.reduceat(vals, starts)
    return out


def regularity(mu: DiscreteMeasure, alpha: float, depth: int = 8, pair_budget: float = 2e7) -> RegularityReport:
    """Probe-ball lower bound for the ``alpha``-regularity constant.

    Probe balls are centred at every atom (and at the origin for radius 1)
    with radii ``2^-j``, ``j = 0..depth``.  When the estimated number of
    atom pairs at some radius exceeds ``pair_budget``, a fixed stride of the
    atoms is used as centres for that radius and ``thinned`` is set; the
    result is still a lower bound.
    """
    if depth < 1:
        raise ValueError("probe depth must be at least 1")
    if mu.size == 0:
        return RegularityReport(float(alpha), 0.0, 0.0, 0, (None, None))
    if mu.grid is not None:
        rep = _grid_regularity(mu, alpha, depth)
        if rep is not None:
            return rep
    tree = cKDTree(mu.points)
    m = mu.size
    best = -1.0
    worst = (None, None)
    probes = 0
    thinned = False
    origin = np.zeros((1, mu.dim))
    for j in range(depth + 1):
        rho = 2.0**-j
        # estimate the neighbour count from a small fixed sample
        sample = mu.points[:: max(1, m // 64)]
        avg = float(np.mean(tree.query_ball_point(sample, rho, return_length=True)))
        stride = 1
        if avg * m > pair_budget:
            stride = int(math.ceil(avg * m / pair_budget))
            thinned = True
        centres = mu.points[::stride]
        if j == 0:
            centres = np.concatenate([origin, centres], axis=0)
        masses = ball_masses(mu, centres, rho, tree)
        ratios = masses / rho**alpha
        k = int(np.argmax(ratios))
        probes += centres.shape[0]
        if ratios[k] > best:
            best = float(ratios[k])
            worst = (tuple(float(v) for v in centres[k]), rho)
    return RegularityReport(float(alpha), best, mu.mass, probes, worst, thinned)


def _grid_regularity(mu: DiscreteMeasure, alpha: float, depth: int, max_box: int = 1 << 24):
    """Probe scan for atoms on ``step * Z^dim`` by FFT convolution with ball stencils."""
    step, idx = mu.grid
    lo = idx.min(axis=0)
    shape = tuple(int(v) for v in idx.max(axis=0) - lo + 1)
    if int(np.prod(shape)) > max_box:
        return None
    dens = np.zeros(shape)
    np.add.at(dens, tuple((idx - lo).T), mu.weights)
    at = tuple((idx - lo).T)
    zero = tuple(int(v) for v in -lo)
    has_origin = all(0 <= z < n for z, n in zip(zero, shape))
    best, worst = -1.0, (None, None)
    probes = 0
    for j in range(depth + 1):
        rho = 2.0**-j
        k = int(math.floor(rho / step + 1e-9))
        axes = [np.arange(-min(k, n - 1), min(k, n - 1) + 1) for n in shape]
        mesh = np.meshgrid(*axes, indexing="ij")
        stencil = (sum(g.astype(np.float64) ** 2 for g in mesh) * step**2 <= rho**2 * (1 + 1e-12)).astype(np.float64)
        conv = fftconvolve(dens, stencil, mode="same") if k > 0 else dens
        masses = np.maximum(conv[at], 0.0)
        if j == 0 and has_origin:
            masses = np.r_[max(conv[zero], 0.0), masses]
            centres = np.concatenate([np.zeros((1, mu.dim)), mu.points], axis=0)
        else:
            centres = mu.points
        ratios = masses / rho**alpha
        i = int(np.argmax(ratios))
        probes += ratios.size
        if ratios[i] > best:
            best = float(ratios[i])
            worst = (tuple(float(v) for v in centres[i]), rho)
    return RegularityReport(float(alpha), best, mu.mass, probes, worst, False)


# ---------------------------------------------------------------------------
# derived measures


def pushforward(mu: DiscreteMeasure, tsel: TimeSelector) -> DiscreteMeasure:
    """Lift atoms to ``(x_j, t(x_j))`` in ``R^(dim+1)`` keeping the weights."""
    if len(tsel) != mu.size:
        raise ValueError("time selector is not aligned with the measure")
    pts = np.concatenate([mu.points, tsel.values[:, None]], axis=1)
    meta = {"alpha": mu.meta.get("alpha"), "base": mu.label}
    return DiscreteMeasure(mu.dim + 1, pts, mu.weights, f"pushforward({mu.label})", meta)


def restrict(nu: DiscreteMeasure, event) -> DiscreteMeasure:
    """Normalised restriction ``nu(E)^-1 1_E nu``.

    ``event`` is a boolean mask over atoms or a callable mapping the point
    array to such a mask.
    """
    mask = event(nu.points) if callable(event) else event
    mask = np.asarray(mask, dtype=bool).reshape(-1)
    if mask.shape[0] != nu.size:
        raise ValueError("event mask is not aligned with the measure")
    mass = float(np.sum(nu.weights[mask]))
    if mass <= 0:
        raise ValueError("cannot restrict to a set of zero measure")
    meta = {"alpha": nu.meta.get("alpha"), "base": nu.label, "event_mass": mass}
    return DiscreteMeasure(nu.dim, nu.points[mask], nu.weights[mask] / mass, f"restrict({nu.label})", meta)


def weak_lorentz_norm(values, mu: DiscreteMeasure, q: float) -> float:
    """``sup_w w * mu(|g| > w)^(1/q)`` for atom values ``g``.

    As ``w`` increases to an attained value ``v`` the level set is
    ``{|g| >= v}``, so the supremum is the maximum of
    ``v_k * mu(|g| >= v_k)^(1/q)`` over the distinct values.
    """
    if q < 1:
        raise ValueError("q must be at least 1")
    g = np.abs(np.asarray(values).reshape(-1)).astype(np.float64)
    if g.shape[0] != mu.size:
        raise ValueError("values are not aligned with the measure")
    if g.size == 0:
        return 0.0
    order = np.argsort(-g, kind="stable")
    gs = g[order]
    cum = np.cumsum(mu.weights[order])
    # mass of {|g| >= v} is the cumulative weight at the last index of each tie group
    last = np.r_[gs[1:] != gs[:-1], True]
    v = gs[last]
    m = cum[last]
    return float(np.max(v * m ** (1.0 / q)))


def lq_norm(values, mu: DiscreteMeasure, q: float) -> float:
    """``(sum_j w_j |g_j|^q)^(1/q)``."""
    g = np.abs(np.asarray(values).reshape(-1)).astype(np.float64)
    return float(np.sum(mu.weights * g**q) ** (1.0 / q))


# ---------------------------------------------------------------------------
# JSON measure descriptions

_SPEC_KEYS = {
    "cantor": ("dim", "r", "depth", "branches"),
    "radial-power": ("dim", "alpha", "h"),
    "product-delta": ("dim", "alpha", "h"),
    "ball-union": ("dim", "alpha", "lam"),
    "sphere": ("dim", "radius", "nodes"),
    "point-mass": ("dim",),
}
_SPEC_DEFAULTS = {
    "cantor": {"r": "1/4", "depth": 5, "branches": 2},
    "radial-power": {"h": "1/64"},
    "product-delta": {"h": "1/64"},
    "ball-union": {},
    "sphere": {"radius": 1, "nodes": 1024},
    "point-mass": {},
}


def _parse_number(x):
    if isinstance(x, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(x, (int, float)):
        return x
    if isinstance(x, str):
        s = x.strip()
        if "/" in s:
            return Fraction(s)
        try:
            return int(s)
        except ValueError:
            return float(s)
    raise ValueError(f"cannot read number from {x!r}")


def parse_measure_spec(text) -> dict:
    """Validate a measure description given as JSON text, a path or a dict.

    Returns a normalised dict with every parameter filled in.
    """
    if isinstance(text, dict):
        raw = dict(text)
    else:
        s = str(text).strip()
        if not s.startswith("{"):
            if not os.path.isfile(s):
                raise ValueError(f"measure description is neither JSON nor a file: {s!r}")
            with open(s, encoding="utf-8") as fh:
                s = fh.read()
        try:
            raw = json.loads(s)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed measure description: {exc}") from None
        if not isinstance(raw, dict):
            raise ValueError("measure description must be a JSON object")
    kind = raw.get("type")
    if kind not in _SPEC_KEYS:
        raise ValueError(f"unknown measure type {kind!r}")
    if "dim" not in raw:
        raise ValueError("measure description needs 'dim'")
    out = {"type": kind}
    full = dict(_SPEC_DEFAULTS[kind])
    full.update({k: v for k, v in raw.items() if k != "type"})
    extra = set(full) - set(_SPEC_KEYS[kind])
    if extra:
        raise ValueError(f"unexpected keys for {kind}: {sorted(extra)}")
    for key in _SPEC_KEYS[kind]:
        if key not in full:
            raise ValueError(f"measure description for {kind} needs {key!r}")
        val = _parse_number(full[key])
        if key in ("dim", "depth", "branches", "nodes"):
            if int(val) != val:
                raise ValueError(f"{key} must be an integer")
            val = int(val)
        out[key] = _num(val)
    return out


def dump_measure_spec(spec: dict) -> str:
    """Canonical JSON text for a measure description."""
    return json.dumps(parse_measure_spec(spec), sort_keys=True)


def build_measure(spec, cap: int | None = None) -> DiscreteMeasure:
    """Construct the measure described by ``spec``."""
    s = parse_measure_spec(spec)
    num = {k: (Fraction(v) if isinstance(v, str) else v) for k, v in s.items() if k != "type"}
    kind = s["type"]
    if kind == "cantor":
        return cantor_dust(num["dim"], num["r"], num["depth"], num["branches"], cap=cap)
    if kind == "radial-power":
        return radial_power_measure(num["dim"], num["alpha"], num["h"], cap=cap)
    if kind == "product-delta":
        return product_delta_measure(num["dim"], num["alpha"], num["h"], cap=cap)
    if kind == "ball-union":
        return ball_union_measure(num["dim"], num["alpha"], num["lam"], cap=cap)
    if kind == "point-mass":
        return point_mass(num["dim"])
    return sphere_surface_measure(num["dim"], num["radius"], num["nodes"], cap=cap)
