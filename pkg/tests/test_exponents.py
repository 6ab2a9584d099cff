from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracwave.exponents import (
    TABLES,
    ExponentRangeError,
    as_fraction,
    conjecture_bound,
    junction_values,
    necessary_s,
    necessary_terms,
    prior_bound,
    thm11_divergence_bound,
    thm12_sufficient_s,
    thm21_gamma,
)

F = Fraction


def s_grid(d, step=F(1, 16)):
    s = F(1, 2) + step
    while s <= F(d, 2):
        yield s
        s += step


def alpha_grid(top, step=F(1, 16)):
    a = step
    while a <= top:
        yield a
        a += step


class TestDivergenceTables:
    def test_thm11_middle_branch(self):
        v = thm11_divergence_bound(3, 1)
        assert v.value == 1 and v.branch == "middle"

    def test_thm11_above_half_dimension_is_zero(self):
        assert thm11_divergence_bound(3, 2).value == 0

    @pytest.mark.parametrize("s", [F(1, 2), F(1, 4), 0])
    def test_thm11_rejects_small_s(self, s):
        with pytest.raises(ExponentRangeError):
            thm11_divergence_bound(3, s)

    def test_thm11_junction_d6(self):
        rows = dict((j, (a, b)) for j, a, b in junction_values("thm11", 6))
        assert rows[F(7, 4)] == (F(5, 2), F(5, 2))

    def test_conjecture_values(self):
        assert conjecture_bound(3, 1).value == 1
        assert conjecture_bound(4, 2).value == 0
        rows = dict((j, (a, b)) for j, a, b in junction_values("conjecture", 5))
        assert rows[F(1)] == (3, 3)

    @pytest.mark.parametrize("s", [F(1, 2), F(3)])
    def test_conjecture_range(self, s):
        with pytest.raises(ExponentRangeError):
            conjecture_bound(4, s)

    def test_prior_values(self):
        assert prior_bound(3, 1).value == F(3, 2)
        assert prior_bound(3, F(3, 2)).value == 0

    @pytest.mark.parametrize("d", range(3, 11))
    def test_prior_jumps_at_junction(self, d):
        # the two printed branches come from different decay estimates and
        # do not meet: left limit d/2, right value (d-1)/2
        ((s, left, right),) = junction_values("prior", d)
        assert s == F(d + 1, 4)
        assert (left, right) == (F(d, 2), F(d - 1, 2))
        assert prior_bound(d, s).value == left

    @pytest.mark.parametrize("d", range(3, 11))
    def test_improvement_chain(self, d):
        for s in s_grid(d):
            c = conjecture_bound(d, s).value
            t = thm11_divergence_bound(d, s).value
            p = prior_bound(d, s).value
            assert c <= t <= p


class TestSmoothnessTables:
    def test_thm12_examples(self):
        assert thm12_sufficient_s(3, 3).value == F(1, 2)
        assert thm12_sufficient_s(3, 1).value == 1
        rows = dict((j, (a, b)) for j, a, b in junction_values("thm12", 5))
        assert rows[F(2)] == (F(3, 2), F(3, 2))

    def test_thm21_examples(self):
        assert thm21_gamma(3, F(7, 2)).value == F(1, 4)
        assert thm21_gamma(3, 1).value == 1
        rows = dict((j, (a, b)) for j, a, b in junction_values("thm21", 4))
        assert rows[F(4)] == (F(1, 2), F(1, 2))

    @pytest.mark.parametrize("alpha", [0, -1, F(7, 2)])
    def test_thm12_range(self, alpha):
        with pytest.raises(ExponentRangeError):
            thm12_sufficient_s(3, alpha)

    def test_thm21_range(self):
        with pytest.raises(ExponentRangeError):
            thm21_gamma(3, 5)

    def test_dimension_floor(self):
        with pytest.raises(ExponentRangeError):
            thm12_sufficient_s(2, 1)


class TestNecessary:
    def test_joint_attainment(self):
        v = necessary_s(3, 2, 2)
        assert v.value == F(3, 4)
        assert set(v.terms) == {"two", "three"}

    def test_small_alpha(self):
        assert necessary_s(3, F(1, 2), 2).value == F(5, 4)

    def test_full_dimension(self):
        terms = necessary_terms(4, 4, 2)
        assert terms == {"one": 0, "two": F(1, 2), "three": F(1, 2), "four": 0}
        assert necessary_s(4, 4, 2).value == F(1, 2)

    @pytest.mark.parametrize("d", range(3, 9))
    def test_sufficiency_dominates(self, d):
        for a in alpha_grid(d):
            assert thm12_sufficient_s(d, a).value >= necessary_s(d, a, 2).value

    def test_sharp_in_three_dimensions(self):
        for a in alpha_grid(3, F(1, 32)):
            if a <= 1:
                continue
            assert thm12_sufficient_s(3, a).value == necessary_s(3, a, 2).value == (5 - a) / 4

    def test_q_must_be_at_least_two(self):
        with pytest.raises(ExponentRangeError):
            necessary_s(3, 1, 1)


@pytest.mark.parametrize("name", sorted(set(TABLES) - {"prior"}))
@pytest.mark.parametrize("d", range(3, 11))
def test_junctions_continuous(name, d):
    rows = junction_values(name, d)
    assert rows
    for _, left, right in rows:
        assert isinstance(left, Fraction) and left == right


@pytest.mark.parametrize("name", ["thm11", "conjecture", "prior"])
@pytest.mark.parametrize("d", range(3, 9))
def test_divergence_tables_nonincreasing(name, d):
    fn = TABLES[name]
    values = [fn(d, s).value for s in s_grid(d)]
    assert all(a >= b for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("name", ["thm12", "thm21"])
@pytest.mark.parametrize("d", range(3, 9))
def test_smoothness_tables_nonincreasing(name, d):
    fn = TABLES[name]
    top = d if name == "thm12" else d + 1
    values = [fn(d, a).value for a in alpha_grid(top)]
    assert all(a >= b for a, b in zip(values, values[1:]))


@settings(max_examples=200, deadline=None)
@given(
    d=st.integers(3, 10),
    num=st.integers(1, 10_000),
)
def test_necessary_is_max_of_terms(d, num):
    alpha = F(num, 10_000) * d
    terms = necessary_terms(d, alpha, 2)
    v = necessary_s(d, alpha, 2)
    assert v.value == max(terms.values())
    assert all(terms[t] == v.value for t in v.terms)


def test_as_fraction_parses_strings_and_floats():
    assert as_fraction("3/4") == F(3, 4)
    assert as_fraction(0.5) == F(1, 2)
    assert as_fraction(2) == 2
