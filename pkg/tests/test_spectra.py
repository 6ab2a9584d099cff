import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracwave.spectra import (
    BandFunction,
    FrequencyRegion,
    TimeGrid,
    evaluate,
    evaluate_grid,
    half_wave,
    l2_norm,
    littlewood_paley,
    lp_bump,
    maximal_field,
    region_modes,
    sobolev_norm,
)


def random_band(rng, dim, n, box=40):
    freqs = np.unique(rng.integers(-box, box + 1, size=(n, dim)), axis=0)
    coeffs = rng.standard_normal(len(freqs)) + 1j * rng.standard_normal(len(freqs))
    return BandFunction(dim, freqs, coeffs)


def direct_sum(f, x):
    x = np.asarray(x, dtype=float)
    return sum(c * np.exp(1j * np.dot(xi, x)) for xi, c in zip(f.freqs, f.coeffs))


class TestBandFunction:
    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            BandFunction(1, [[1], [1]], [1, 2])

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            BandFunction(1, [[1]], [np.nan])

    def test_rejects_noninteger(self):
        with pytest.raises(ValueError):
            BandFunction(1, [[0.5]], [1])

    def test_dict_roundtrip(self):
        f = BandFunction.from_dict(2, {(1, 0): 1.0, (0, -3): 2j})
        g = BandFunction.from_dict(2, f.to_dict())
        assert f.to_dict() == g.to_dict()

    def test_empty(self):
        f = BandFunction(2, np.zeros((0, 2), dtype=int), [])
        assert f.size == 0
        assert l2_norm(f) == 0
        assert sobolev_norm(f, 1.0) == 0


class TestEvaluate:
    def test_single_mode(self):
        f = BandFunction(2, [[1, 0]], [1.0])
        assert evaluate(f, [0, 0]) == pytest.approx(1)
        assert evaluate(f, [np.pi, 0]) == pytest.approx(-1)

    def test_cosine(self):
        f = BandFunction(1, [[1], [-1]], [1, 1])
        assert evaluate(f, [0.7]) == pytest.approx(2 * math.cos(0.7), abs=1e-14)

    def test_matches_direct_sum(self):
        rng = np.random.default_rng(3)
        f = random_band(rng, 3, 300)
        pts = rng.uniform(-1, 1, size=(20, 3))
        got = evaluate(f, pts)
        want = np.array([direct_sum(f, p) for p in pts])
        np.testing.assert_allclose(got, want, rtol=1e-11, atol=1e-11)

    def test_grid_matches_pointwise(self):
        rng = np.random.default_rng(4)
        f = random_band(rng, 2, 100)
        axes = [np.linspace(-1, 1, 7), np.linspace(-0.5, 0.5, 5)]
        grid = evaluate_grid(f, axes)
        pts = np.array(list(itertools.product(*axes)))
        np.testing.assert_allclose(grid.reshape(-1), evaluate(f, pts), rtol=1e-11, atol=1e-11)


class TestNorms:
    def test_single_mode_sobolev(self):
        f = BandFunction(2, [[3, 4]], [1.0])
        assert sobolev_norm(f, 0.5) == pytest.approx(26**0.25, rel=1e-14)

    def test_two_mode_sobolev(self):
        f = BandFunction(1, [[1], [-1]], [1, 1])
        assert sobolev_norm(f, 1.0) == pytest.approx(2.0, rel=1e-14)

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**31), s=st.floats(0, 3), ds=st.floats(0, 2))
    def test_sobolev_monotone(self, seed, s, ds):
        f = random_band(np.random.default_rng(seed), 2, 50)
        a, b = sobolev_norm(f, s), sobolev_norm(f, s + ds)
        assert a >= l2_norm(f) * (1 - 1e-14)
        assert b >= a * (1 - 1e-14)


class TestLittlewoodPaley:
    def test_bump_values(self):
        assert lp_bump(1.0) == pytest.approx(1.0)
        assert lp_bump(0.5) == 0
        assert lp_bump(2 ** 0.5) == pytest.approx(math.exp(-1 / 3), rel=1e-14)
        assert abs(lp_bump(2 ** 0.5) - 0.7165) < 1e-4

    def test_projection_support(self):
        rng = np.random.default_rng(5)
        f = random_band(rng, 2, 1500, box=60)
        for lam in (4, 8, 16, 32):
            g = littlewood_paley(f, lam)
            r = g.radii
            nz = np.abs(g.coeffs) > 0
            assert np.all((r[nz] > lam / 2) & (r[nz] < 2 * lam))

    def test_peak_and_edge(self):
        f = BandFunction(1, [[8], [4]], [1.0, 1.0])
        g = littlewood_paley(f, 8)
        c = dict(zip(map(tuple, g.freqs), g.coeffs))
        assert c[(8,)] == pytest.approx(1.0)
        assert c.get((4,), 0) == 0

    def test_small_lambda_rejected(self):
        with pytest.raises(ValueError):
            littlewood_paley(BandFunction(1, [[1]], [1]), 1.0)


class TestHalfWave:
    def test_identity_at_zero(self):
        f = random_band(np.random.default_rng(0), 2, 10)
        assert half_wave(f, 0.0) is f

    def test_single_mode_phase(self):
        f = BandFunction(2, [[3, 4]], [1.0])
        assert half_wave(f, 0.2).coeffs[0] == pytest.approx(np.exp(1j), abs=1e-15)

    @settings(max_examples=100, deadline=None)
    @given(
        seed=st.integers(0, 2**31),
        dim=st.integers(1, 3),
        s=st.floats(-10, 10),
        t=st.floats(-10, 10),
    )
    def test_unitarity_and_group_law(self, seed, dim, s, t):
        f = random_band(np.random.default_rng(seed), dim, 200)
        g = half_wave(f, t)
        assert l2_norm(g) == pytest.approx(l2_norm(f), rel=1e-12)
        a = half_wave(half_wave(f, s), t).coeffs
        b = half_wave(f, s + t).coeffs
        assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(f.coeffs)) * 10

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**31), x=st.floats(-3, 3), t=st.floats(-3, 3))
    def test_one_dimensional_translation(self, seed, x, t):
        rng = np.random.default_rng(seed)
        freqs = np.arange(0, 64).reshape(-1, 1)
        f = BandFunction(1, freqs, rng.standard_normal(64) + 1j * rng.standard_normal(64))
        lhs = evaluate(half_wave(f, t), [x])
        rhs = evaluate(f, [x + t])
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))


class TestTimeGrid:
    def test_inclusive_nodes(self):
        g = TimeGrid(0.0, 1.0, 0.25)
        np.testing.assert_allclose(g.nodes, [0, 0.25, 0.5, 0.75, 1.0])
        assert g.weights.sum() == pytest.approx(1.0)

    def test_invalid(self):
        with pytest.raises(ValueError):
            TimeGrid(1.0, 1.0, 0.1)
        with pytest.raises(ValueError):
            TimeGrid(0.0, 1.0, 0.0)


class TestMaximalField:
    def test_single_mode_is_constant(self):
        f = BandFunction(2, [[2, 1]], [0.5 - 0.5j])
        pts = np.random.default_rng(1).uniform(-1, 1, (10, 2))
        sup, _ = maximal_field(f, pts, TimeGrid(0, 1, 0.1))
        np.testing.assert_allclose(sup, abs(0.5 - 0.5j), rtol=1e-14)

    def test_translation_scan(self):
        rng = np.random.default_rng(9)
        freqs = np.arange(1, 40).reshape(-1, 1)
        f = BandFunction(1, freqs, rng.standard_normal(39))
        g = TimeGrid(0.0, 1.0, 1 / 64)
        x = 0.3
        sup, arg = maximal_field(f, [[x]], g)
        scan = np.abs([evaluate(f, [x + t]) for t in g.nodes])
        assert sup[0] == pytest.approx(scan.max(), rel=1e-12)
        assert arg[0] == g.nodes[np.argmax(scan)]

    def test_dominates_each_time(self):
        rng = np.random.default_rng(2)
        f = random_band(rng, 2, 80)
        g = TimeGrid(0, 1, 1 / 16)
        pts = rng.uniform(-1, 1, (12, 2))
        sup, _ = maximal_field(f, pts, g)
        for t in g.nodes:
            assert np.all(sup >= np.abs(evaluate(half_wave(f, t), pts)) * (1 - 1e-13))

    def test_ball_focus(self):
        lam = 32
        modes = region_modes(FrequencyRegion("ball", 2, lam))
        f = BandFunction(2, modes, np.ones(len(modes)))
        g = TimeGrid(0, 1, 1 / (16 * lam))
        assert np.any(np.isclose(g.nodes, 1 / lam))
        sup, _ = maximal_field(f, [[0, 0]], g)
        direct = abs(np.sum(np.exp(1j * f.radii / lam)))
        assert sup[0] >= direct * (1 - 1e-12)
        assert direct >= math.cos(1) * len(modes)


class TestRegions:
    def test_annulus_brute_force(self):
        got = {tuple(p) for p in region_modes(FrequencyRegion("annulus", 2, 5, 1))}
        want = {
            (a, b)
            for a in range(-7, 8)
            for b in range(-7, 8)
            if 4 <= math.hypot(a, b) <= 6
        }
        assert got == want
        assert {(3, 4), (4, 3), (5, 0)} <= got

    def test_plate_count(self):
        assert len(region_modes(FrequencyRegion("plate", 2, 16))) == 153
        assert len(region_modes(FrequencyRegion("plate", 2, 64))) == 65 * 17

    def test_small_ball(self):
        np.testing.assert_array_equal(region_modes(FrequencyRegion("ball", 2, 0.5)), [[0, 0]])

    @pytest.mark.parametrize("kind", ["ball", "annulus", "plate", "cone"])
    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_enumeration_matches_predicate(self, kind, dim):
        reg = FrequencyRegion(kind, dim, 6.0, 1.0)
        pts = region_modes(reg)
        n = dim + (kind == "cone")
        box = np.array(list(itertools.product(range(-14, 15), repeat=n)))
        want = box[reg.contains(box)]
        assert {tuple(p) for p in pts} == {tuple(p) for p in want}

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            FrequencyRegion("torus", 2, 3)
