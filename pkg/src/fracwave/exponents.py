"""Exact piecewise-rational exponent tables.

Every table is evaluated in :class:`fractions.Fraction` arithmetic so that
branch junctions can be compared for exact equality.  Inputs may be given as
ints, Fractions, decimal strings (``"3/2"``, ``"0.75"``) or floats; floats are
converted with :meth:`Fraction.limit_denominator` only when they are not exact
binary fractions with a small denominator.

Piecewise tables label the branch of the lower interval at a junction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

__all__ = [
    "ExponentValue",
    "ExponentRangeError",
    "as_fraction",
    "thm11_divergence_bound",
    "conjecture_bound",
    "prior_bound",
    "thm12_sufficient_s",
    "thm21_gamma",
    "necessary_s",
    "necessary_terms",
    "junction_values",
    "TABLES",
]


class ExponentRangeError(ValueError):
    """Raised when a query lies outside the domain of a table."""


@dataclass(frozen=True)
class ExponentValue:
    """Value of a piecewise table together with the active branch.

    ``terms`` is only filled by :func:`necessary_s`, where it lists every
    term of the maximum that attains the value.
    """

    value: Fraction
    branch: str
    terms: tuple[str, ...] = field(default=())

    def __float__(self) -> float:
        return float(self.value)


def as_fraction(x) -> Fraction:
    """Convert ``x`` to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        fr = Fraction(x)
        if fr.denominator <= 2**20:
            return fr
        return fr.limit_denominator(10**9)
    raise TypeError(f"cannot interpret {x!r} as a rational number")


def _check_dim(d: int) -> int:
    if int(d) != d or d < 3:
        raise ExponentRangeError(f"dimension d={d} must be an integer >= 3")
    return int(d)


def _check_s(d: int, s: Fraction, allow_above: bool = False) -> None:
    if s <= Fraction(1, 2):
        raise ExponentRangeError(f"s={s} must exceed 1/2")
    if not allow_above and s > Fraction(d, 2):
        raise ExponentRangeError(f"s={s} must be at most d/2={Fraction(d, 2)}")


def _check_alpha(alpha: Fraction, upper: Fraction) -> None:
    if not 0 < alpha <= upper:
        raise ExponentRangeError(f"alpha={alpha} must lie in (0, {upper}]")


# ---------------------------------------------------------------------------
# divergence-set bounds as functions of s


def _thm11_branches(d: int, s: Fraction) -> dict[str, Fraction]:
    return {
        "low": Fraction(d * d - d - 1, d - 2) - Fraction(2 * (d - 1), d - 2) * s,
        "middle": Fraction(3 * d + 1, 2) - 4 * s,
        "high": d - 2 * s,
    }


def thm11_divergence_bound(d: int, s) -> ExponentValue:
    """Upper bound for the dimension of the divergence set of the half-wave flow.

    Parameters
    ----------
    d : int
        Dimension, at least 3.
    s : rational
        Sobolev exponent, strictly larger than 1/2.

    Returns
    -------
    ExponentValue
        ``d - 2s`` on ``[(d+1)/4, d/2]`` (branch ``"high"``),
        ``(3d+1)/2 - 4s`` on ``[d/4, (d+1)/4]`` (``"middle"``) and
        ``(d^2-d-1)/(d-2) - 2(d-1)s/(d-2)`` on ``(1/2, d/4]`` (``"low"``).
        For ``s > d/2`` the divergence set is empty and 0 is returned with
        branch ``"trivial"``.

    Raises
    ------
    ExponentRangeError
        If ``s <= 1/2``; the bound there is ``d`` and must be used explicitly.
    """
    d = _check_dim(d)
    s = as_fraction(s)
    _check_s(d, s, allow_above=True)
    if s > Fraction(d, 2):
        return ExponentValue(Fraction(0), "trivial")
    br = _thm11_branches(d, s)
    if s <= Fraction(d, 4):
        return ExponentValue(br["low"], "low")
    if s <= Fraction(d + 1, 4):
        return ExponentValue(br["middle"], "middle")
    return ExponentValue(br["high"], "high")


def _conjecture_branches(d: int, s: Fraction) -> dict[str, Fraction]:
    return {"low": d + 2 - 4 * s, "high": d - 2 * s}


def conjecture_bound(d: int, s) -> ExponentValue:
    """Conjectured optimal divergence-set dimension, for ``1/2 < s <= d/2``."""
    d = _check_dim(d)
    s = as_fraction(s)
    _check_s(d, s)
    br = _conjecture_branches(d, s)
    if s <= 1:
        return ExponentValue(br["low"], "low")
    return ExponentValue(br["high"], "high")


def _prior_branches(d: int, s: Fraction) -> dict[str, Fraction]:
    return {"low": Fraction(d * d, d - 1) - Fraction(2 * d, d - 1) * s, "high": d - 2 * s}


def prior_bound(d: int, s) -> ExponentValue:
    """Best divergence-set bound available before the improved estimate."""
    d = _check_dim(d)
    s = as_fraction(s)
    _check_s(d, s)
    br = _prior_branches(d, s)
    if s <= Fraction(d + 1, 4):
        return ExponentValue(br["low"], "low")
    return ExponentValue(br["high"], "high")


# ---------------------------------------------------------------------------
# regularity thresholds as functions of alpha


def _s22_branches(d: int, a: Fraction) -> dict[str, Fraction]:
    return {
        "first": (d - a) / 2,
        "second": Fraction(3 * d + 1, 8) - a / 4,
        "third": (d - a) / 2 + (a - 1) / (2 * (d - 1)),
    }


def thm12_sufficient_s(d: int, alpha) -> ExponentValue:
    """Threshold ``s(alpha, d)`` above which the fractal maximal estimate holds.

    The estimate is valid for ``s > s(alpha, d)``; the returned value is the
    threshold itself.
    """
    d = _check_dim(d)
    a = as_fraction(alpha)
    _check_alpha(a, Fraction(d))
    br = _s22_branches(d, a)
    if a <= Fraction(d - 1, 2):
        return ExponentValue(br["first"], "first")
    if a <= Fraction(d + 1, 2):
        return ExponentValue(br["second"], "second")
    return ExponentValue(br["third"], "third")


def _gamma_branches(d: int, a: Fraction) -> dict[str, Fraction]:
    br = _s22_branches(d, a)
    br["fourth"] = (d + 1 - a) / 2
    return br


def thm21_gamma(d: int, alpha) -> ExponentValue:
    """Decay exponent ``gamma(alpha, d)`` of the fractal Strichartz estimate."""
    d = _check_dim(d)
    a = as_fraction(alpha)
    _check_alpha(a, Fraction(d + 1))
    br = _gamma_branches(d, a)
    if a <= Fraction(d - 1, 2):
        return ExponentValue(br["first"], "first")
    if a <= Fraction(d + 1, 2):
        return ExponentValue(br["second"], "second")
    if a <= d:
        return ExponentValue(br["third"], "third")
    return ExponentValue(br["fourth"], "fourth")


# ---------------------------------------------------------------------------
# necessary conditions from the counterexamples

_TERM_NAMES = ("one", "two", "three", "four")


def necessary_terms(d: int, alpha, q=2) -> dict[str, Fraction]:
    """Individual terms of the necessary condition on ``s``.

    No restriction on ``d`` is imposed here so the counterexample families
    can compare against the same closed forms in ``d = 2``.  Terms three and
    four only enter for ``alpha > 1``.
    """
    a = as_fraction(alpha)
    q = as_fraction(q)
    if q < 2:
        raise ExponentRangeError(f"q={q} must be at least 2")
    _check_alpha(a, Fraction(d))
    if a <= 1:
        return {"one": Fraction(d, 2) - a / q, "two": Fraction(d + 1, 4)}
    return {
        "one": Fraction(d, 2) - a / q,
        "two": Fraction(d + 1, 4) - (a - 1) / (2 * q),
        "three": (d + 2 - a) / 4,
        "four": (d - a) / 2,
    }


def necessary_s(d: int, alpha, q=2) -> ExponentValue:
    """Smallest ``s`` allowed by the counterexample constructions.

    Returns the maximum of the terms of :func:`necessary_terms`; ``terms``
    lists every term attaining it and ``branch`` is the first of them.
    """
    d = _check_dim(d)
    terms = necessary_terms(d, alpha, q)
    top = max(terms.values())
    hit = tuple(name for name in _TERM_NAMES if terms.get(name) == top)
    return ExponentValue(top, hit[0], hit)


# ---------------------------------------------------------------------------
# junction data, used by consistency checks and the CLI


def _junctions(name: str, d: int) -> list[tuple[Fraction, str, str]]:
    if name == "thm11":
        return [(Fraction(d, 4), "low", "middle"), (Fraction(d + 1, 4), "middle", "high")]
    if name == "conjecture":
        return [(Fraction(1), "low", "high")]
    if name == "prior":
        return [(Fraction(d + 1, 4), "low", "high")]
    if name == "thm12":
        return [(Fraction(d - 1, 2), "first", "second"), (Fraction(d + 1, 2), "second", "third")]
    if name == "thm21":
        return _junctions("thm12", d) + [(Fraction(d), "third", "fourth")]
    raise KeyError(name)


_BRANCHES = {
    "thm11": _thm11_branches,
    "conjecture": _conjecture_branches,
    "prior": _prior_branches,
    "thm12": _s22_branches,
    "thm21": _gamma_branches,
}


def junction_values(name: str, d: int) -> list[tuple[Fraction, Fraction, Fraction]]:
    """Evaluate both adjacent branch formulas at each junction of a table.

    Returns a list of ``(point, left_value, right_value)``.
    """
    d = _check_dim(d)
    out = []
    for x, left, right in _junctions(name, d):
        br = _BRANCHES[name](d, x)
        out.append((x, br[left], br[right]))
    return out


TABLES = {
    "thm11": thm11_divergence_bound,
    "conjecture": conjecture_bound,
    "prior": prior_bound,
    "thm12": thm12_sufficient_s,
    "thm21": thm21_gamma,
}
