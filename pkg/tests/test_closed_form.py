import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbnet import closed_form, errors, network, spectral
from tests.conftest import heterogeneous_nonreciprocal

KAPPA, EPS = 0.003, 0.01


# ---------------------------------------------------------------------------
# literal reference expressions for the explicit two- and three-battery
# chains and the star, kept independent of the general evaluator
# ---------------------------------------------------------------------------

def ref_charger(lam0, eps, t, w=1.0):
    return 4 * w * eps**2 * (1 - np.exp(-0.5 * lam0 * t)) ** 2 / lam0**2


def ref_chain_b1(lam, g1, eps, t, w=1.0):
    l0, l1 = lam[0], lam[1]
    amp = 16 * w * eps**2 * g1**2 / (l0**2 * l1**2 * (l0 - l1) ** 2)
    return amp * ((l0 - l1) - (l0 * np.exp(-0.5 * l1 * t)
                               - l1 * np.exp(-0.5 * l0 * t))) ** 2


def ref_chain_b2(lam, g, eps, t, w=1.0):
    l0, l1, l2 = lam[:3]
    amp = 64 * w * eps**2 * g[0]**2 * g[1]**2 / (
        l0**2 * l1**2 * l2**2
        * (l0 - l1) ** 2 * (l1 - l2) ** 2 * (l0 - l2) ** 2)
    bracket = ((l0 - l1) * (l1 - l2) * (l0 - l2)
               - l0 * l1 * (l0 - l1) * np.exp(-0.5 * l2 * t)
               + l0 * l2 * (l0 - l2) * np.exp(-0.5 * l1 * t)
               - l1 * l2 * (l1 - l2) * np.exp(-0.5 * l0 * t))
    return amp * bracket**2


def ref_chain_b3(lam, g, eps, t, w=1.0):
    l0, l1, l2, l3 = lam[:4]
    amp = 256 * w * eps**2 * g[0]**2 * g[1]**2 * g[2]**2 / (
        l0**2 * l1**2 * l2**2 * l3**2
        * (l0 - l1) ** 2 * (l0 - l2) ** 2 * (l0 - l3) ** 2
        * (l1 - l2) ** 2 * (l1 - l3) ** 2 * (l2 - l3) ** 2)
    bracket = ((l0 - l1) * (l0 - l2) * (l0 - l3)
               * (l1 - l2) * (l1 - l3) * (l2 - l3)
               - l0 * l1 * l2 * (l0 - l1) * (l0 - l2) * (l1 - l2) * np.exp(-0.5 * l3 * t)
               + l0 * l1 * l3 * (l0 - l1) * (l0 - l3) * (l1 - l3) * np.exp(-0.5 * l2 * t)
               - l0 * l2 * l3 * (l0 - l2) * (l0 - l3) * (l2 - l3) * np.exp(-0.5 * l1 * t)
               + l1 * l2 * l3 * (l1 - l2) * (l1 - l3) * (l2 - l3) * np.exp(-0.5 * l0 * t))
    return amp * bracket**2


def ref_star_bn(lam0, lam_n, g_n, eps, t, w=1.0):
    amp = 16 * w * eps**2 * g_n**2 / (lam0**2 * lam_n**2 * (lam0 - lam_n) ** 2)
    return amp * ((lam0 - lam_n) - (lam0 * np.exp(-0.5 * lam_n * t)
                                    - lam_n * np.exp(-0.5 * lam0 * t))) ** 2


@given(st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_cascaded_transient_matches_explicit_chain_formulas(seed):
    rng = np.random.default_rng(seed)
    spec = heterogeneous_nonreciprocal("cascaded", 3, rng)
    lam = spec.effective_rates().damping
    g = spec.coupling.coop_rates
    ts = rng.uniform(0.0, 4000.0, size=5)
    for t in ts:
        assert closed_form.energy_cascaded_t(spec, 0, t) == pytest.approx(
            ref_charger(lam[0], EPS, t), rel=1e-12, abs=1e-300)
        assert closed_form.energy_cascaded_t(spec, 1, t) == pytest.approx(
            ref_chain_b1(lam, g[0], EPS, t), rel=1e-12, abs=1e-30)
        assert closed_form.energy_cascaded_t(spec, 2, t) == pytest.approx(
            ref_chain_b2(lam, g, EPS, t), rel=1e-11, abs=1e-30)
        assert closed_form.energy_cascaded_t(spec, 3, t) == pytest.approx(
            ref_chain_b3(lam, g, EPS, t), rel=1e-11, abs=1e-30)


@given(st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_parallel_transient_matches_explicit_star_formula(seed):
    rng = np.random.default_rng(seed)
    spec = heterogeneous_nonreciprocal("parallel", 3, rng)
    lam = spec.effective_rates().damping
    g = spec.coupling.coop_rates
    for t in rng.uniform(0.0, 4000.0, size=5):
        for n in (1, 2, 3):
            assert closed_form.energy_parallel_t(spec, n, t) == pytest.approx(
                ref_star_bn(lam[0], lam[n], g[n - 1], EPS, t), rel=1e-12, abs=1e-30)


def test_transient_starts_at_zero(rng):
    for kind, fn in (("cascaded", closed_form.energy_cascaded_t),
                     ("parallel", closed_form.energy_parallel_t)):
        spec = heterogeneous_nonreciprocal(kind, 3, rng)
        for n in range(4):
            assert fn(spec, n, 0.0) == pytest.approx(0.0, abs=1e-18)


def test_transient_converges_to_steady(rng):
    spec = heterogeneous_nonreciprocal("cascaded", 3, rng)
    late = closed_form.energy_cascaded_t(spec, 3, 1e7)
    assert late == pytest.approx(closed_form.energy_cascaded_ss(spec, 3), rel=1e-10)
    spec_p = heterogeneous_nonreciprocal("parallel", 3, rng)
    late_p = closed_form.energy_parallel_t(spec_p, 2, 1e7)
    assert late_p == pytest.approx(closed_form.energy_parallel_ss(spec_p, 2), rel=1e-10)


def test_steady_anchor_single_battery():
    # gamma = kappa makes the terminal steady energy exactly (eps/kappa)^2
    spec = network.nonreciprocal_spec("cascaded", 1, KAPPA / 2, KAPPA, EPS)
    assert closed_form.energy_cascaded_ss(spec, 1) == pytest.approx(
        (EPS / KAPPA) ** 2, rel=1e-12)


def test_no_drive_means_no_energy(rng):
    spec = heterogeneous_nonreciprocal("cascaded", 2, rng, drive=0.0)
    assert closed_form.energy_cascaded_ss(spec, 2) == 0.0


def test_zero_damping_raises():
    spec = network.build_spec("cascaded", 1, 0.0015, math.pi / 2, 0.003,
                              0.0, 0.0, EPS)
    with pytest.raises(errors.ZeroRate):
        closed_form.energy_cascaded_ss(spec, 0)


def test_uniform_chain_interior_battery_is_degenerate():
    # uniform rates give the first and last mode identical dampings
    spec = network.nonreciprocal_spec("cascaded", 2, 0.0024, KAPPA, EPS)
    with pytest.raises(errors.DegenerateRates):
        closed_form.energy_cascaded_t(spec, 2, 100.0)
    # the steady value is still well defined
    assert closed_form.energy_cascaded_ss(spec, 2) > 0


def test_reciprocal_spec_rejected_by_closed_forms():
    spec = network.reciprocal_spec("cascaded", 2, 0.002, KAPPA, EPS)
    with pytest.raises(ValueError):
        closed_form.energy_cascaded_ss(spec, 2)


class TestScalingLaws:
    def test_terminal_scaling_equals_per_mode_steady(self):
        for n in (1, 2, 3, 4):
            j = closed_form.optimal_coupling("cascaded", n, KAPPA)
            spec = network.nonreciprocal_spec("cascaded", n, j, KAPPA, EPS)
            assert closed_form.energy_cascaded_ss(spec, n) == pytest.approx(
                closed_form.terminal_scaling_cascaded(n, 2 * j, KAPPA, EPS), rel=1e-12)
            jp = closed_form.optimal_coupling("parallel", n, KAPPA)
            spec_p = network.nonreciprocal_spec("parallel", n, jp, KAPPA, EPS)
            assert closed_form.energy_parallel_ss(spec_p, n) == pytest.approx(
                closed_form.terminal_scaling_parallel(n, 2 * jp, KAPPA, EPS), rel=1e-12)

    def test_single_battery_chain_and_star_coincide(self):
        for gamma in (0.001, 0.004, 0.01):
            assert closed_form.terminal_scaling_cascaded(1, gamma, KAPPA, EPS) \
                == pytest.approx(
                    closed_form.terminal_scaling_parallel(1, gamma, KAPPA, EPS),
                    rel=1e-14)

    def test_log_space_path_is_continuous(self):
        # n = 8 runs through the direct product, n = 9 through log space
        direct = closed_form.terminal_scaling_cascaded(8, 0.005, KAPPA, EPS)
        assert direct > 0
        seam = (closed_form.terminal_scaling_cascaded(9, 0.005, KAPPA, EPS)
                / closed_form.terminal_scaling_cascaded(8, 0.005, KAPPA, EPS))
        explicit = 16 * 0.005**2 / (2 * 0.005 + KAPPA) ** 2
        assert seam == pytest.approx(explicit, rel=1e-12)

    def test_deep_chain_stays_finite(self):
        val = closed_form.terminal_scaling_cascaded(150, 0.1, KAPPA, EPS)
        assert np.isfinite(val) and val >= 0


class TestOptimalCoupling:
    def test_single_battery_chain_value(self):
        assert closed_form.optimal_coupling("cascaded", 1, KAPPA) \
            == pytest.approx(KAPPA / 2, rel=1e-14)

    def test_two_battery_chain_value(self):
        expect = KAPPA * (2 + math.sqrt(20)) / 8
        assert closed_form.optimal_coupling("cascaded", 2, KAPPA) \
            == pytest.approx(expect, rel=1e-14)
        assert expect == pytest.approx(0.809016994 * KAPPA, rel=1e-9)

    def test_four_battery_star_value(self):
        assert closed_form.optimal_coupling("parallel", 4, KAPPA) \
            == pytest.approx(KAPPA / 4, rel=1e-14)

    def test_star_scaling_identity_exact(self):
        for n in range(1, 400):
            assert closed_form.optimal_coupling("parallel", n, KAPPA) \
                * math.sqrt(n) == pytest.approx(KAPPA / 2, rel=1e-14)

    def test_chain_scaling_ratio_approaches_quarter(self):
        ratio = closed_form.optimal_coupling("cascaded", 10**6, KAPPA) / 10**6
        assert ratio == pytest.approx(KAPPA / 4, rel=1e-5)

    @pytest.mark.parametrize("kind", ["cascaded", "parallel"])
    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
    def test_closed_form_argmax_matches(self, kind, n):
        scale_fn = (closed_form.terminal_scaling_cascaded if kind == "cascaded"
                    else closed_form.terminal_scaling_parallel)

        def energy(j):
            return scale_fn(n, 2 * j, KAPPA, EPS)

        lo, hi = 1e-6, 5 * KAPPA
        phi = (math.sqrt(5) - 1) / 2
        for _ in range(90):
            m1 = hi - phi * (hi - lo)
            m2 = lo + phi * (hi - lo)
            if energy(m1) < energy(m2):
                lo = m1
            else:
                hi = m2
        j_scan = 0.5 * (lo + hi)
        assert j_scan == pytest.approx(
            closed_form.optimal_coupling(kind, n, KAPPA), rel=1e-3)


@given(st.integers(0, 10_000), st.integers(1, 3))
@settings(max_examples=40, deadline=None)
def test_terminal_energy_never_flows_backwards(seed, n):
    rng = np.random.default_rng(seed)
    spec = heterogeneous_nonreciprocal("cascaded", n, rng)
    ts = np.linspace(0.0, 6000.0, 60)
    e = closed_form.energy_cascaded_t(spec, n, ts)
    assert np.all(np.diff(e) >= -1e-12 * max(e.max(), 1e-30))


class TestReciprocalStar:
    def test_matches_direct_linear_solve(self):
        for n in (1, 2, 3, 5):
            for j in (0.2 * KAPPA, 0.5 * KAPPA, 2.0 * KAPPA):
                b = spectral.steady_amplitudes(j, KAPPA, EPS, "parallel", n)
                assert closed_form.reciprocal_parallel_ss(n, j, KAPPA, EPS) \
                    == pytest.approx(abs(b[-1]) ** 2, rel=1e-8)

    def test_single_battery_resonant_value(self):
        val = closed_form.reciprocal_parallel_ss(1, KAPPA / 2, KAPPA, EPS)
        assert val == pytest.approx((EPS / KAPPA) ** 2, rel=1e-12)

    def test_window_point_favors_reciprocal(self):
        j = 0.4 * KAPPA  # inside (kappa/4, kappa/2) for the two-battery star
        rec = closed_form.reciprocal_parallel_ss(2, j, KAPPA, EPS)
        nonrec = closed_form.terminal_scaling_parallel(2, 2 * j, KAPPA, EPS)
        assert rec > nonrec

    def test_outside_window_favors_nonreciprocal(self):
        for j in (0.05 * KAPPA, 2.0 * KAPPA):
            rec = closed_form.reciprocal_parallel_ss(2, j, KAPPA, EPS)
            nonrec = closed_form.terminal_scaling_parallel(2, 2 * j, KAPPA, EPS)
            assert rec < nonrec
