import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from fracwave.counterex import (
    FAMILIES,
    RadialShells,
    asymptotic_constant,
    beta_constant,
    beta_profile,
    build,
    build_ball_focus,
    build_ball_union,
    build_knapp,
    build_lattice_knapp,
    build_log_divergence,
    half_octave_scales,
    hhalf_norm_sq,
    instance_ratio,
    matching_term,
    predicted_exponent,
    run_log_divergence,
    run_sweep,
    shell_field,
    shell_field_quad,
    translate_orthogonality,
)
from fracwave.measures import regularity
from fracwave.spectra import evaluate, half_wave, l2_norm

F = Fraction
SWEEP_FAMILIES = ("ball-focus", "knapp", "lattice-knapp", "ball-union")


def field_at_selected_times(inst):
    """``|e^{i t(x) sqrt(-Lap)} f(x)|`` at each atom, grouped by time."""
    times = inst.times()
    out = np.empty(inst.mu.size)
    for t in np.unique(times):
        sel = times == t
        out[sel] = np.abs(evaluate(half_wave(inst.f, t), inst.mu.points[sel]))
    return out


class TestPredictions:
    def test_examples(self):
        assert predicted_exponent("ball-focus", 2, 2, 2) == 0
        assert predicted_exponent("ball-focus", 2, 1, 2) == F(1, 2)
        assert predicted_exponent("knapp", 3, 1, 2) == 1
        assert predicted_exponent("knapp", 2, 1, 2) == F(3, 4)
        assert predicted_exponent("lattice-knapp", 3, 3, 4) == F(1, 2)
        assert predicted_exponent("lattice-knapp", 2, 2, 2) == F(1, 2)
        assert predicted_exponent("ball-union", 3, 3, 2) == 0
        assert predicted_exponent("ball-union", 2, 1, 2) == F(1, 2)

    @settings(max_examples=200, deadline=None)
    @given(
        family=st.sampled_from(SWEEP_FAMILIES),
        d=st.integers(2, 6),
        num=st.integers(1, 64),
        q=st.sampled_from([2, 3, 4, F(5, 2), 8]),
    )
    def test_matches_necessary_term(self, family, d, num, q):
        alpha = F(num, 64) * d
        if family == "lattice-knapp" and alpha <= 1:
            with pytest.raises(ValueError):
                predicted_exponent(family, d, alpha, q)
            return
        pred = predicted_exponent(family, d, alpha, q)
        term = matching_term(family, d, alpha, q)
        if term is None:
            # ball-union for alpha <= 1 has no separate term; its closed form stands alone
            assert family == "ball-union" and alpha <= 1
            assert pred == (d - alpha) / 2
        else:
            assert pred == term

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            predicted_exponent("spiral", 2, 1, 2)


class TestBallFocus:
    def test_mode_count(self):
        inst = build_ball_focus(2, 1, 16)
        assert inst.f.size == pytest.approx(math.pi * 16**2, rel=0.02)

    @pytest.mark.parametrize("d,lam", [(2, 32), (2, 128), (3, 16)])
    def test_focusing_bound(self, d, lam):
        inst = build_ball_focus(d, 1, lam)
        val = abs(evaluate(half_wave(inst.f, 1 / lam), np.zeros(d)))
        assert val >= math.cos(1) * inst.f.size
        assert val >= 0.5 * inst.f.size

    def test_time_choice(self):
        inst = build_ball_focus(2, 1, 64)
        np.testing.assert_array_equal(inst.times(), 1 / 64)


class TestKnapp:
    def test_plate_count(self):
        assert build_knapp(2, 1, 64).f.size == 65 * 17

    @pytest.mark.parametrize("d,lam", [(2, 64), (2, 256), (3, 64)])
    def test_coherence_on_slab(self, d, lam):
        # lit atoms: x_1 = -t within the time grid, |x'| <= lam^(-1/2) / 4
        inst = build_knapp(d, 1, lam)
        x = inst.mu.points
        grid = inst.meta["tgrid"]
        lit = (-x[:, 0] >= grid.t_min) & (-x[:, 0] <= grid.t_max)
        lit &= np.linalg.norm(x[:, 1:], axis=1) <= 0.25 / math.sqrt(lam)
        assert lit.sum() >= 16
        assert np.all(np.abs(x[lit, 0] + inst.times()[lit]) <= 1 / (32 * lam) + 1e-15)
        vals = field_at_selected_times(inst)
        assert np.all(vals[lit] >= 0.5 * inst.f.size)

    def test_times_in_unit_interval(self):
        t = build_knapp(3, 1, 64).times()
        assert np.all((t > 0) & (t < 1))


class TestLatticeKnapp:
    def test_translate_count_and_spacing(self):
        inst = build_lattice_knapp(2, 2, 256, separation=1.0)
        assert inst.meta["translates"] == 16
        assert inst.meta["spacing"] == pytest.approx(1 / 16)

    @pytest.mark.parametrize("d,alpha,lam", [(2, 2, 64), (2, 2, 256), (2, 1.5, 256), (3, 2, 64)])
    def test_near_orthogonality(self, d, alpha, lam):
        inst = build_lattice_knapp(d, alpha, lam)
        ratio = translate_orthogonality(inst)
        assert 0.5 <= ratio <= 2.0

    def test_requires_alpha_above_one(self):
        with pytest.raises(ValueError):
            build_lattice_knapp(2, 1, 64)


class TestBallUnion:
    @pytest.mark.parametrize("alpha,lam", [(1, 32), (1.5, 32), (2, 16)])
    def test_centre_count(self, alpha, lam):
        inst = build_ball_union(2, alpha, lam)
        m = inst.meta["centres"]
        assert lam**alpha / 2 <= m <= 2 * lam**alpha

    def test_stationary_term_dominates(self):
        lam = 32
        inst = build_ball_union(2, 1, lam)
        vals = np.abs(evaluate(half_wave(inst.f, 1 / lam), inst.mu.points))
        m = inst.meta["centres"]
        floor = 0.5 * inst.f.size / math.sqrt(m) * math.cos(1)
        assert np.all(vals >= floor * 0.5)


class TestRegularityOfBuilders:
    @pytest.mark.parametrize(
        "family,d,alpha,lam",
        [
            ("ball-focus", 2, 1, 64),
            ("ball-focus", 3, 2, 64),
            ("knapp", 2, 1, 64),
            ("lattice-knapp", 2, 2, 64),
            ("ball-union", 2, 1, 64),
            ("ball-union", 2, 1.5, 32),
        ],
    )
    def test_moderate_constant(self, family, d, alpha, lam):
        inst = build(family, d, alpha, lam)
        rep = regularity(inst.mu, alpha, depth=8)
        assert rep.c_alpha_lower <= 64


class TestSweeps:
    def test_half_octaves(self):
        s = half_octave_scales(32, 1024)
        assert len(s) == 11
        np.testing.assert_allclose(np.diff(np.log2(s)), 0.5)

    def test_needs_five_scales(self):
        with pytest.raises(ValueError):
            run_sweep("ball-focus", 2, 1, 2, [16, 32, 64, 128])

    def test_ball_focus_small_sweep(self):
        res = run_sweep("ball-focus", 2, 1, 2, half_octave_scales(16, 128))
        assert res.verdict == "PASS"
        assert res.fit.slope == pytest.approx(0.5, abs=0.1)
        d = res.to_dict()
        assert d["predicted_exact"] == "1/2"

    def test_distinguished_below_grid_sup(self):
        inst = build_ball_focus(2, 1, 32)
        a = instance_ratio(inst, "distinguished")
        b = instance_ratio(inst, "grid")
        assert b >= a * (1 - 1e-12)

    def test_ratio_definition(self):
        inst = build_ball_focus(2, 1, 16)
        vals = np.abs(evaluate(half_wave(inst.f, 1 / 16), inst.mu.points))
        want = math.sqrt(np.sum(inst.mu.weights * vals**2)) / l2_norm(inst.f)
        assert instance_ratio(inst) == pytest.approx(want, rel=1e-10)


class TestRadialShells:
    def test_profile_support(self):
        s = np.linspace(0, 3, 301)
        b = beta_profile(s)
        assert np.all(b[(s <= 0.5) | (s >= 2)] == 0)
        assert np.all(b[(s > 0.5) & (s < 2)] > 0)

    def test_energy_normalisation(self):
        c = beta_constant("energy")
        val = integrate.quad(lambda s: 4 * math.pi * s**3 * (c * beta_profile(s)) ** 2, 0.5, 2)[0]
        assert val == pytest.approx(1.0, rel=1e-8)

    @pytest.mark.parametrize("a,t", [(0.8, 0.8), (0.3, 0.5), (0.9, 0.1), (0.5, 0.95)])
    def test_field_matches_quadrature(self, a, t):
        sh = RadialShells((16, 64), 1.0)
        fast = shell_field(sh, np.array([a]), np.array([t]))[0]
        slow = shell_field_quad(sh, a, t)
        assert abs(fast - slow) <= 1e-8 * max(1.0, abs(slow))

    @pytest.mark.parametrize("n", [64, 128, 256, 512])
    def test_bessel_asymptotics(self, n):
        sh = RadialShells((n,), 1.0)
        x = 0.8
        val = shell_field(sh, np.array([x]), np.array([x]))[0]
        pred = asymptotic_constant(sh) / x
        assert abs(val - pred) <= 10 / n

    def test_shell_energy_flat(self):
        e = [hhalf_norm_sq(RadialShells((2**k,), 1.0)) for k in range(3, 10)]
        assert max(e) / min(e) < 1.05

    def test_guards(self):
        with pytest.raises(ValueError):
            build_log_divergence(r=2.0**-21)
        with pytest.raises(ValueError):
            build_log_divergence(K=31)
        with pytest.raises(ValueError):
            build_log_divergence(d=2)

    def test_single_shell_bounded(self):
        inst = build_log_divergence(K=0)
        a = np.linspace(0.25, 1, 200)
        vals = np.abs(shell_field(inst.f, a, a))
        assert np.all(np.isfinite(vals))
        assert vals.max() <= 2 * abs(asymptotic_constant(inst.f)) / 0.25

    def test_needs_five_k(self):
        with pytest.raises(ValueError):
            run_log_divergence(ks=[4])

    def test_short_run(self):
        rep = run_log_divergence(ks=range(2, 8), grid_upto=4)
        assert rep["fit"]["slope"] > 0
        for row in rep["rows"]:
            if "distinguished_over_grid" in row:
                assert row["distinguished_over_grid"] >= 0.8


def test_families_listed():
    assert set(SWEEP_FAMILIES) | {"log-divergence"} == set(FAMILIES)
