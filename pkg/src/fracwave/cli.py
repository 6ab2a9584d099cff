"""Command-line front end: ``fracwave <command> [options]``.

Every command validates its configuration first, runs deterministically and
writes its CSV/JSON artifacts once at the end.  Exit codes: 0 success,
1 FAIL verdict, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from . import counterex, exponents, measures, normlab, sphavg
from .spectra import TimeGrid

SCHEMA = 1
CSV_COLUMNS = ("kind", "d", "alpha", "s_or_q", "scale", "value", "aux1", "aux2")

TABLE_ALIASES = {
    "thm11": "thm11",
    "conjecture": "conjecture",
    "prior": "prior",
    "s22": "thm12",
    "s2": "thm21",
    "necessary": "necessary",
}
S_TABLES = ("thm11", "conjecture", "prior")
NORM_KINDS = ("sphere", "strichartz", "cone", "fractal", "spherical-means", "maximal-lower")


class UsageError(Exception):
    """Invalid configuration; reported with exit code 2."""


# ---------------------------------------------------------------------------
# formatting


def fmt(x) -> str:
    """CSV rendering: 12 significant digits for reals, text otherwise."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, Fraction):
        x = float(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        return f"{x:.12g}"
    return str(x)


def csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow([fmt(row.get(c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, TimeGrid):
        return {"t_min": obj.t_min, "t_max": obj.t_max, "step": obj.step}
    return obj


def json_text(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"


def versions() -> dict:
    import scipy

    out = {"fracwave": __version__, "numpy": np.__version__, "scipy": scipy.__version__}
    try:
        import finufft

        out["finufft"] = getattr(finufft, "__version__", "unknown")
    except ImportError:
        out["finufft"] = None
    return out


# ---------------------------------------------------------------------------
# SVG plotting


def _ticks(lo: float, hi: float) -> list[float]:
    a, b = math.floor(lo), math.ceil(hi)
    ticks = [float(k) for k in range(a, b + 1) if lo - 1e-9 <= k <= hi + 1e-9]
    return ticks if len(ticks) >= 2 else [lo, hi]


def svg_loglog(x, y, title: str = "", xlabel: str = "scale", ylabel: str = "value") -> str:
    """Static 800x600 log-log plot with the data polyline and the fitted line.

    The output depends only on the inputs, so identical data give identical
    bytes.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size == 0:
        raise ValueError("nothing to plot")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log plot needs positive data")
    lx, ly = np.log10(x), np.log10(y)
    fit = sphavg.fit_loglog(x, y) if x.size >= 4 else None
    W, H = 800, 600
    left, right, top, bottom = 90, 40, 50, 70
    xlo, xhi = float(lx.min()), float(lx.max())
    ylo, yhi = float(ly.min()), float(ly.max())
    if xhi - xlo < 1e-12:
        xlo, xhi = xlo - 0.5, xhi + 0.5
    if yhi - ylo < 1e-12:
        ylo, yhi = ylo - 0.5, yhi + 0.5
    padx, pady = 0.05 * (xhi - xlo), 0.05 * (yhi - ylo)
    xlo, xhi, ylo, yhi = xlo - padx, xhi + padx, ylo - pady, yhi + pady

    def px(v):
        return left + (v - xlo) / (xhi - xlo) * (W - left - right)

    def py(v):
        return H - bottom - (v - ylo) / (yhi - ylo) * (H - top - bottom)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<g font-family="monospace" font-size="12" fill="black">',
        f'<line x1="{left}" y1="{H - bottom}" x2="{W - right}" y2="{H - bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{H - bottom}" stroke="black"/>',
    ]
    for t in _ticks(xlo, xhi):
        X = px(t)
        out.append(f'<line x1="{X:.2f}" y1="{H - bottom}" x2="{X:.2f}" y2="{H - bottom + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{H - bottom + 20}" text-anchor="middle">1e{t:.2f}</text>')
    for t in _ticks(ylo, yhi):
        Y = py(t)
        out.append(f'<line x1="{left - 5}" y1="{Y:.2f}" x2="{left}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{Y + 4:.2f}" text-anchor="end">1e{t:.2f}</text>')
    out.append(f'<text x="{(left + W - right) / 2:.2f}" y="{H - 20}" text-anchor="middle">log10 {_esc(xlabel)}</text>')
    out.append(f'<text x="20" y="{(top + H - bottom) / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 20 {(top + H - bottom) / 2:.2f})">log10 {_esc(ylabel)}</text>')
    if title:
        out.append(f'<text x="{W / 2:.2f}" y="25" text-anchor="middle">{_esc(title)}</text>')
    pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(lx, ly))
    out.append(f'<polyline points="{pts}" fill="none" stroke="#1f4e9c" stroke-width="2"/>')
    for a, b in zip(lx, ly):
        out.append(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="3" fill="#1f4e9c"/>')
    if fit is not None:
        a0, a1 = float(lx.min()), float(lx.max())
        # fit is in natural logs: log y = c + m log x, same slope in log10
        b0 = (fit.intercept + fit.slope * a0 * math.log(10)) / math.log(10)
        b1 = (fit.intercept + fit.slope * a1 * math.log(10)) / math.log(10)
        out.append(f'<line x1="{px(a0):.2f}" y1="{py(b0):.2f}" x2="{px(a1):.2f}" y2="{py(b1):.2f}" '
                   f'stroke="#c0392b" stroke-dasharray="6 4"/>')
        out.append(f'<text x="{W - right - 10}" y="{top + 15}" text-anchor="end">slope = {fit.slope:.3f}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def read_series_csv(path: str, xcol: str = "scale", ycol: str = "value"):
    """Read ``(x, y)`` columns from a CSV file; errors name the offending line."""
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty CSV")
    reader = csv.reader(lines)
    header = next(reader)
    if xcol not in header or ycol not in header:
        raise ValueError(f"{path}: line 1: header lacks columns {xcol!r} and {ycol!r}")
    ix, iy = header.index(xcol), header.index(ycol)
    xs, ys = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ValueError(f"{path}: line {lineno}: expected {len(header)} fields, found {len(row)}")
        try:
            xs.append(float(row[ix]))
            ys.append(float(row[iy]))
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: non-numeric {xcol}/{ycol}") from None
    if not xs:
        raise ValueError(f"{path}: no data rows")
    return np.array(xs), np.array(ys)


# ---------------------------------------------------------------------------
# helpers


def _frac(text: str, name: str) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"{name}: cannot parse {text!r} as a number") from None


def _scales(args, dyadic_only: bool = False) -> np.ndarray:
    if args.lmin is None or args.lmax is None:
        raise UsageError("--lmin and --lmax are required")
    lo, hi = float(args.lmin), float(args.lmax)
    if not 0 < lo <= hi:
        raise UsageError("need 0 < lmin <= lmax")
    per = 1 if dyadic_only else args.per_octave
    if per < 1:
        raise UsageError("--per-octave must be positive")
    n = int(math.floor(per * math.log2(hi / lo) + 1e-9))
    return lo * 2.0 ** (np.arange(n + 1) / per)


def _measure(args):
    if not args.measure:
        raise UsageError("--measure is required")
    try:
        spec = measures.parse_measure_spec(args.measure)
    except (OSError, ValueError) as exc:
        raise UsageError(f"--measure: {exc}") from None
    return spec, measures.build_measure(spec)


def _base_report(args, command: str) -> dict:
    # output locations do not influence results and are left out so artifacts compare equal
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "svg")}
    return {"schema": SCHEMA, "command": command, "config": cfg, "versions": versions()}


def _fit_or_none(x, y):
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    ok = y > 0
    if np.count_nonzero(ok) < 4:
        return None
    return sphavg.fit_loglog(x[ok], y[ok]).to_dict()


# ---------------------------------------------------------------------------
# commands


def cmd_exponents(args):
    table = TABLE_ALIASES.get(args.table)
    if table is None:
        raise UsageError(f"unknown table {args.table!r}; choose from {', '.join(TABLE_ALIASES)}")
    d = args.d
    if d is None or d < 3:
        raise UsageError("--d must be an integer >= 3")
    step = _frac(args.grid, "--grid")
    if step <= 0:
        raise UsageError("--grid must be positive")
    q = _frac(args.q, "--q")
    rows = []
    if table in S_TABLES:
        fn = exponents.TABLES[table]
        k = math.floor(Fraction(1, 2) / step) + 1
        while k * step <= Fraction(d, 2):
            s = k * step
            v = fn(d, s)
            rows.append({"kind": args.table, "d": d, "s_or_q": s, "value": v.value, "aux1": v.branch})
            k += 1
    else:
        upper = Fraction(d + 1) if table == "thm21" else Fraction(d)
        k = 1
        while k * step <= upper:
            a = k * step
            if table == "necessary":
                v = exponents.necessary_s(d, a, q)
                rows.append({"kind": args.table, "d": d, "alpha": a, "s_or_q": q, "value": v.value,
                             "aux1": v.branch, "aux2": "+".join(v.terms)})
            else:
                v = exponents.TABLES[table](d, a)
                rows.append({"kind": args.table, "d": d, "alpha": a, "value": v.value, "aux1": v.branch})
            k += 1
    report = _base_report(args, "exponents")
    report["rows"] = len(rows)
    return rows, report, None


def cmd_decay(args):
    spec, mu = _measure(args)
    lo, hi = args.lmin, args.lmax
    if lo is None or hi is None or not (0 < lo and hi >= 4 * lo):
        raise UsageError("decay needs --lmin > 0 and --lmax >= 4 lmin")
    per = max(4, args.per_octave)
    curve = sphavg.decay_sweep(mu, lo, hi, per_octave=per)
    fit = sphavg.fit_exponent(curve)
    rows = [{"kind": "decay", "d": mu.dim, "alpha": mu.alpha, "scale": l, "value": v,
             "aux1": curve.meta["nodes"][i], "aux2": curve.meta["converged"][i]}
            for i, (l, v) in enumerate(zip(curve.lambdas, curve.values))]
    report = _base_report(args, "decay")
    report.update({"measure": spec, "per_octave_used": per, "fit": fit.to_dict(), "beta_hat": -fit.slope})
    return rows, report, (curve.lambdas, curve.values, f"decay {mu.label}")


def cmd_regularity(args):
    spec, mu = _measure(args)
    alpha = float(_frac(args.alpha, "--alpha")) if args.alpha is not None else mu.alpha
    if alpha is None:
        raise UsageError("--alpha is required for this measure")
    rep = measures.regularity(mu, alpha, depth=args.depth)
    rows = [{"kind": "regularity", "d": mu.dim, "alpha": alpha, "value": rep.c_alpha_lower,
             "aux1": rep.total_mass, "aux2": rep.probe_count}]
    report = _base_report(args, "regularity")
    report.update({"measure": spec, "c_alpha_lower": rep.c_alpha_lower, "total_mass": rep.total_mass,
                   "probe_count": rep.probe_count, "worst_ball": list(rep.worst_ball), "thinned": rep.thinned})
    return rows, report, None


def _time_selector(mu, mode: str):
    if mode == "const":
        return measures.TimeSelector(np.full(mu.size, 0.5))
    if mode == "radial":
        return measures.TimeSelector(0.25 + 0.5 * np.sqrt(np.sum(mu.points**2, axis=1)))
    raise UsageError(f"unknown time selector {mode!r}")


def cmd_norms(args):
    if args.kind not in NORM_KINDS:
        raise UsageError(f"unknown kind {args.kind!r}")
    spec, mu = _measure(args)
    lams = _scales(args)
    rows = []
    for lam in lams:
        if args.kind == "sphere":
            est = normlab.sphere_ext_constant(mu, lam, seed=args.seed)
        elif args.kind == "strichartz":
            est = normlab.strichartz_constant(mu, lam, seed=args.seed)
        elif args.kind == "cone":
            est = normlab.cone_slice_constant(mu, lam)
        elif args.kind == "fractal":
            nu = measures.pushforward(mu, _time_selector(mu, args.tsel))
            est = normlab.frac_strichartz_constant(nu, lam, seed=args.seed)
        elif args.kind == "spherical-means":
            est = normlab.spherical_means_constant(mu, lam, seed=args.seed)
        else:
            est = normlab.maximal_constant_lower(mu, lam, seed=args.seed)
        rows.append({"kind": args.kind, "d": mu.dim, "alpha": mu.alpha, "s_or_q": 2, "scale": lam,
                     "value": est.value, "aux1": est.kind, "aux2": est.iterations})
    report = _base_report(args, "norms")
    report.update({"measure": spec, "values": [r["value"] for r in rows], "kinds": [r["aux1"] for r in rows],
                   "fit": _fit_or_none(lams, [r["value"] for r in rows])})
    return rows, report, (lams, np.array([r["value"] for r in rows]), f"{args.kind} {mu.label}")


def cmd_equivalence(args):
    spec, mu = _measure(args)
    lams = _scales(args, dyadic_only=True)
    if lams.size < 5:
        raise UsageError("equivalence needs at least 5 dyadic scales")
    rep = normlab.equivalence_report(mu, lams, seed=args.seed)
    rows = []
    for r in rep["rows"]:
        rows.append({"kind": "sphere", "d": mu.dim, "alpha": mu.alpha, "s_or_q": 2, "scale": r["lambda"],
                     "value": r["sphere"], "aux1": r.get("witness")})
        rows.append({"kind": "cone", "d": mu.dim, "alpha": mu.alpha, "s_or_q": 2, "scale": r["lambda"],
                     "value": r["cone"], "aux1": r.get("cone_engine")})
    report = _base_report(args, "equivalence")
    report.update({"measure": spec, "report": rep, "verdict": rep["verdict"]})
    return rows, report, (np.array([r["lambda"] for r in rep["rows"]]), np.array([r["cone"] for r in rep["rows"]]),
                          f"cone {mu.label}")


def cmd_counterexample(args):
    if args.family not in counterex.FAMILIES:
        raise UsageError(f"unknown family {args.family!r}; choose from {', '.join(counterex.FAMILIES)}")
    report = _base_report(args, "counterexample")
    if args.family == "log-divergence":
        ks = list(range(args.kmin, args.kmax + 1))
        if len(ks) < 5:
            raise UsageError("log-divergence needs at least 5 values of K")
        rep = counterex.run_log_divergence(float(_frac(args.r, "--r")), ks)
        rows = [{"kind": "log-divergence", "d": 3, "alpha": 1, "s_or_q": 2, "scale": row["K"],
                 "value": row["G"], "aux1": row["hhalf_sq"], "aux2": row.get("G_grid")} for row in rep["rows"]]
        report.update({"result": rep, "verdict": rep["verdict"]})
        return rows, report, None
    d = args.d if args.d is not None else 2
    if args.alpha is None:
        raise UsageError("--alpha is required")
    alpha = _frac(args.alpha, "--alpha")
    q = _frac(args.q, "--q")
    scales = _scales(args)
    res = counterex.run_sweep(args.family, d, alpha, q, scales, sup=args.sup)
    rows = [{"kind": args.family, "d": d, "alpha": alpha, "s_or_q": q, "scale": s, "value": r}
            for s, r in zip(res.scales, res.ratios)]
    out = res.to_dict()
    out["matching_term"] = None
    term = counterex.matching_term(args.family, d, alpha, q)
    if term is not None:
        out["matching_term"] = str(term)
        out["matches_term"] = term == res.predicted
    report.update({"result": out, "verdict": res.verdict})
    return rows, report, (res.scales, res.ratios, f"{args.family} d={d} alpha={alpha}")


def cmd_plot(args):
    if not args.csv:
        raise UsageError("--csv is required")
    try:
        x, y = read_series_csv(args.csv, args.x, args.y)
    except OSError as exc:
        raise UsageError(str(exc)) from None
    svg = svg_loglog(x, y, title=os.path.basename(args.csv), xlabel=args.x, ylabel=args.y)
    target = args.svg or os.path.splitext(args.csv)[0] + ".svg"
    with open(target, "w", encoding="utf-8") as fh:
        fh.write(svg)
    report = _base_report(args, "plot")
    report.update({"svg": target, "points": int(x.size), "fit": _fit_or_none(x, y)})
    return None, report, None


COMMANDS = {
    "exponents": cmd_exponents,
    "decay": cmd_decay,
    "regularity": cmd_regularity,
    "norms": cmd_norms,
    "equivalence": cmd_equivalence,
    "counterexample": cmd_counterexample,
    "plot": cmd_plot,
}


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracwave", description="Half-wave propagator laboratory for fractal measures.")
    p.add_argument("--version", action="version", version=f"fracwave {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, measure=True, scales=True):
        if measure:
            sp.add_argument("--measure", help="measure description: inline JSON or a path to a JSON file")
        if scales:
            sp.add_argument("--lmin", type=float, default=None, help="smallest frequency scale")
            sp.add_argument("--lmax", type=float, default=None, help="largest frequency scale")
            sp.add_argument("--per-octave", type=int, default=2, help="scales per octave")
        sp.add_argument("--seed", type=int, default=0, help="seed for iterative solvers")
        sp.add_argument("--out", default=None, help="directory for CSV/JSON output")
        sp.add_argument("--svg", default=None, help="write a log-log SVG plot to this path")

    sp = sub.add_parser("exponents", help="closed-form exponent tables")
    sp.add_argument("--table", required=True, help="thm11, conjecture, prior, s22, s2 or necessary")
    sp.add_argument("--d", type=int, default=3)
    sp.add_argument("--grid", default="1/32", help="sampling step for s or alpha")
    sp.add_argument("--q", default="2", help="exponent q for the necessary table")
    common(sp, measure=False, scales=False)

    sp = sub.add_parser("decay", help="spherical-average Fourier decay of a measure")
    common(sp)

    sp = sub.add_parser("regularity", help="probe-ball lower bound for the regularity constant")
    sp.add_argument("--alpha", default=None)
    sp.add_argument("--depth", type=int, default=8)
    common(sp, scales=False)

    sp = sub.add_parser("norms", help="best constants of extension and Strichartz-type estimates")
    sp.add_argument("--kind", required=True, help=", ".join(NORM_KINDS))
    sp.add_argument("--tsel", default="const", help="time selector for kind=fractal: const or radial")
    common(sp)

    sp = sub.add_parser("equivalence", help="sphere versus cone constants across dyadic scales")
    common(sp)

    sp = sub.add_parser("counterexample", help="exponent sweeps of the extremal constructions")
    sp.add_argument("--family", required=True, help=", ".join(counterex.FAMILIES))
    sp.add_argument("--d", type=int, default=None)
    sp.add_argument("--alpha", default=None)
    sp.add_argument("--q", default="2")
    sp.add_argument("--sup", default="distinguished", choices=("distinguished", "grid"))
    sp.add_argument("--r", default="1/4", help="inner radius for log-divergence")
    sp.add_argument("--kmin", type=int, default=4)
    sp.add_argument("--kmax", type=int, default=14)
    common(sp, measure=False)

    sp = sub.add_parser("plot", help="log-log SVG from a CSV file")
    sp.add_argument("--csv", required=True)
    sp.add_argument("--x", default="scale")
    sp.add_argument("--y", default="value")
    sp.add_argument("--svg", default=None)
    sp.add_argument("--out", default=None)
    return p


def _write_outputs(args, command: str, rows, report: dict, series) -> None:
    csv_out = csv_text(rows) if rows is not None else None
    js = json_text(report)
    svg_path = getattr(args, "svg", None) if command != "plot" else None
    if svg_path and series is not None:
        os.makedirs(os.path.dirname(os.path.abspath(svg_path)), exist_ok=True)
        with open(svg_path, "w", encoding="utf-8") as fh:
            fh.write(svg_loglog(series[0], series[1], title=series[2]))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        if csv_out is not None:
            with open(os.path.join(args.out, f"{command}.csv"), "w", encoding="utf-8", newline="") as fh:
                fh.write(csv_out)
        with open(os.path.join(args.out, f"{command}.json"), "w", encoding="utf-8") as fh:
            fh.write(js)
    elif command == "exponents":
        sys.stdout.write(csv_out)
    else:
        sys.stdout.write(js)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        rows, report, series = COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"fracwave {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, exponents.ExponentRangeError) as exc:
        print(f"fracwave {args.command}: error: {exc}", file=sys.stderr)
        return 2
    _write_outputs(args, args.command, rows, report, series)
    # wall-clock goes to stderr so the artifacts stay byte-identical
    print(f"fracwave {args.command}: done in {time.perf_counter() - t0:.2f} s", file=sys.stderr)
    return 1 if report.get("verdict") == "FAIL" else 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
