"""Closed forms against frozen references, Monte Carlo oracles, and asymptotic
self-consistency."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from ris2way import analytic as an
from ris2way.channel import Scheme

K_REF = 1.6099457599185225      # pi^2/(16-pi^2)
THETA_REF = 0.4878413813377144  # (16-pi^2)/(4 pi), sigma2=1
OUT_L1_REF = 0.7202682363669551  # 1 - 2 K1(2)
CROSSOVER_DBM = {2: 17.495567352187408, 16: -1.8144996364813814,
                 64: -13.983170678166517}
DELTA_P_2_16 = 19.310066988668790
DELTA_P_16_64 = 12.168671041685136
KL_SIGMA1 = 2.2989918962881927e-4


def cascade_sums(L, rho, trials, seed, sigma2=1.0):
    """Independent oracle: optimal-phase SINR draws, straight from Rayleigh draws."""
    rng = np.random.default_rng(seed)
    scale = math.sqrt(sigma2 / 2.0)
    s = np.zeros(trials)
    for _ in range(L):
        s += rng.rayleigh(scale, trials) * rng.rayleigh(scale, trials)
    return rho * s**2


def test_gamma_params_reference():
    p = an.gamma_approx_params(1.0)
    assert p.k == pytest.approx(K_REF, rel=1e-12)
    assert p.theta == pytest.approx(THETA_REF, rel=1e-12)


@given(st.floats(min_value=1e-3, max_value=1e3))
def test_gamma_params_moment_identities(sigma2):
    p = an.gamma_approx_params(sigma2)
    assert p.k * p.theta == pytest.approx(math.pi * sigma2 / 4.0, rel=1e-12)
    assert p.k * p.theta**2 == pytest.approx((16 - math.pi**2) * sigma2**2 / 16.0,
                                             rel=1e-12)


def test_outage_exact_l1_reference_points():
    assert an.outage_exact_L1(1.0, 1.0, 1.0) == pytest.approx(OUT_L1_REF, rel=1e-12)
    assert an.outage_exact_L1(0.0, 5.0, 1.0) == 0.0
    assert an.outage_exact_L1(1e9, 1.0, 1.0) == pytest.approx(1.0, abs=1e-12)


@given(st.floats(min_value=1e-4, max_value=1e4),
       st.floats(min_value=1e-2, max_value=1e6),
       st.floats(min_value=1.01, max_value=4.0))
def test_outage_exact_l1_monotonicity(gamma_th, rho, factor):
    base = an.outage_exact_L1(gamma_th, rho)
    assert 0.0 <= base <= 1.0
    assert an.outage_exact_L1(gamma_th * factor, rho) >= base
    assert an.outage_exact_L1(gamma_th, rho * factor) <= base


def test_outage_gamma_reduces_to_elementwise_gamma_cdf():
    p = an.gamma_approx_params(1.0)
    # same formula evaluated through an independent scipy path
    for l, gth, rho in [(2, 1.0, 50.0), (4, 0.3, 10.0), (16, 2.0, 1e3)]:
        mine = an.outage_gamma_Lge2(l, gth, rho, p)
        ref = special.gammainc(l * p.k, math.sqrt(gth / rho) / p.theta)
        assert mine == pytest.approx(ref, rel=1e-12)
    assert an.outage_gamma_Lge2(4, 0.0, 10.0, p) == 0.0


def test_outage_gamma_matches_simulation_at_spec_point():
    # deep-tail point: both the formula and the empirical rate are ~0 at this rho
    p = an.gamma_approx_params(1.0)
    gamma = cascade_sums(4, 1e4, 10_000_000, seed=42)
    mc = np.mean(gamma <= 1.0)
    ana = an.outage_gamma_Lge2(4, 1.0, 1e4, p)
    se = math.sqrt(max(ana * (1 - ana), 1e-12 / 3) / gamma.size)
    assert abs(mc - ana) <= 3 * se


def test_outage_gamma_matches_simulation_waterfall_region():
    p = an.gamma_approx_params(1.0)
    gamma = cascade_sums(16, 100.0, 400_000, seed=7)
    for gth in (10.0, 40.0, 100.0):
        mc = np.mean(gamma <= gth)
        ana = an.outage_gamma_Lge2(16, gth, 100.0, p)
        # moment-matched fit: accurate to a few 1e-3 absolute in the waterfall
        assert ana == pytest.approx(mc, abs=max(5e-3, 0.1 * mc))


@given(st.floats(min_value=1.0, max_value=100.0))
def test_outage_gamma_monotone_in_rho(rho):
    p = an.gamma_approx_params(1.0)
    assert (an.outage_gamma_Lge2(4, 1.0, rho * 2.0, p)
            <= an.outage_gamma_Lge2(4, 1.0, rho, p))


def test_outage_clt_zero_threshold():
    c = an.clt_params(16, 1.0)
    assert an.outage_clt(16, 0.0, 10.0, c) == pytest.approx(0.0, abs=1e-15)


def test_outage_clt_tracks_simulation_large_l():
    # the Gaussian limit carries ~1.3e-2 absolute error at the waterfall center
    # for 64 elements (and less on the flanks); assert the measured truth
    c = an.clt_params(64, 1.0)
    gamma = cascade_sums(64, 1.0, 200_000, seed=11)
    for gth, tol in ((1600.0, 0.01), (2500.0, 0.015), (3600.0, 0.01)):
        mc = np.mean(gamma <= gth)
        if mc >= 1e-3:
            assert an.outage_clt(64, gth, 1.0, c) == pytest.approx(mc, abs=tol)


def test_phase_error_law_reduces_to_single_element():
    for gth, rho in [(0.5, 10.0), (1.0, 123.0), (4.0, 7.0)]:
        assert (an.outage_phase_error_uniform_pi(1, gth, rho)
                == pytest.approx(float(an.outage_exact_L1(gth, rho)), rel=1e-9))
    assert an.outage_phase_error_uniform_pi(4, 0.0, 10.0) == 0.0


def test_phase_error_law_matches_scrambled_simulation():
    rng = np.random.default_rng(13)
    L, rho, trials = 4, 1e3, 400_000
    amp = rng.rayleigh(math.sqrt(0.5), (trials, L)) * rng.rayleigh(math.sqrt(0.5), (trials, L))
    eps = rng.uniform(-math.pi, math.pi, (trials, L))
    gamma = rho * np.abs(np.sum(amp * np.exp(1j * eps), axis=1)) ** 2
    for gth in (0.5, 1.0, 5.0):
        mc = float(np.mean(gamma <= gth))
        ana = an.outage_phase_error_uniform_pi(L, gth, rho)
        se = math.sqrt(mc * (1 - mc) / trials)
        assert abs(mc - ana) <= 3 * se


def test_spectral_efficiency_zero_sinr():
    assert an.spectral_efficiency(lambda x: 1.0) == pytest.approx(0.0, abs=1e-9)


def test_spectral_efficiency_exact_l1_matches_simulation():
    rho = 100.0
    se_quad = an.se_exact_L1(rho)
    gamma = cascade_sums(1, rho, 1_000_000, seed=17)
    se_mc = np.mean(np.log2(1.0 + gamma))
    assert se_quad == pytest.approx(se_mc, rel=5e-3)


def test_spectral_efficiency_gamma_matches_simulation():
    rho = 1e3
    p = an.gamma_approx_params(1.0)
    se_quad = an.se_gamma(16, rho, p)
    gamma = cascade_sums(16, rho, 200_000, seed=19)
    se_mc = np.mean(np.log2(1.0 + gamma))
    assert se_quad == pytest.approx(se_mc, rel=0.01)


def test_spectral_efficiency_equals_generic_cdf_route():
    rho = 50.0
    p = an.gamma_approx_params(1.0)
    via_cdf = an.spectral_efficiency(
        lambda x: float(special.gammainc(2 * p.k, math.sqrt(x / rho) / p.theta)))
    assert via_cdf == pytest.approx(an.se_gamma(2, rho, p), rel=1e-8)
    assert an.se_gamma(2, rho, p, half_rate=True) == pytest.approx(via_cdf / 2, rel=1e-8)


def test_asymptotic_outage_floor_is_exact_value_at_interference_limit():
    assert (an.asymptotic_outage(1, 1.0, 1e5, 1e-4, 1.0, 1e-7)
            == pytest.approx(float(an.outage_exact_L1(1.0, 1e4)), rel=1e-12))
    p = an.gamma_approx_params(1.0)
    assert (an.asymptotic_outage(4, 1.0, 1e5, 1e-4, 1.0, 1e-7)
            == pytest.approx(float(an.outage_gamma_Lge2(4, 1.0, 1e4, p)), rel=1e-12))


def test_asymptotic_outage_ratio_stabilizes():
    vals = []
    for p_mw in (1e6, 1e8):
        exact = float(an.outage_exact_L1(1.0, p_mw / (1e-4 + 1e-7)))
        vals.append(exact / an.asymptotic_outage(1, 1.0, p_mw, 1e-4, 0.0, 1e-7))
    assert abs(vals[0] / vals[1] - 1.0) < 0.10


def test_sandwich_bounds_bracket_simulation():
    for L, rho in [(2, 100.0), (4, 3.0)]:
        gamma = cascade_sums(L, rho, 2_000_000, seed=23)
        mc = float(np.mean(gamma <= 1.0))
        assert mc > 0  # measurable points only
        lo, up = an.sandwich_bounds_Lge2(L, 1.0, rho)
        se = math.sqrt(mc * (1 - mc) / gamma.size)
        assert lo <= mc + 3 * se
        assert mc - 3 * se <= up


def test_asymptotic_se_reference_value():
    assert (an.asymptotic_se(1, 1e6, 1e-4, 0.0, 1e-7)
            == pytest.approx(31.552346620145983, rel=1e-12))
    quad = an.se_exact_L1(1e6 / (1e-4 + 1e-7))
    assert abs(an.asymptotic_se(1, 1e6, 1e-4, 0.0, 1e-7) - quad) < 0.05


def test_asymptotic_se_floor_equals_quadrature_floor():
    p = an.gamma_approx_params(1.0)
    assert (an.asymptotic_se(4, 1e5, 1e-4, 1.0, 1e-7)
            == pytest.approx(an.se_gamma(4, 1e4, p), rel=1e-12))


def test_se_asymptote_gap_shrinks_with_power():
    # quadrature rate and its large-power expansion differ by o(1)
    def gap(rho):
        asymptote = (math.log(rho) - 2 * 0.5772156649015329) / math.log(2)
        return abs(an.se_exact_L1(rho) - asymptote)

    assert gap(1e8) < gap(1e6)


def test_se_grows_one_log2_decade_per_power_decade():
    p = an.gamma_approx_params(1.0)
    for L in (1, 2, 4):
        if L == 1:
            gap = an.se_exact_L1(1e8) - an.se_exact_L1(1e6)
        else:
            gap = an.se_gamma(L, 1e8, p) - an.se_gamma(L, 1e6, p)
        assert gap == pytest.approx(math.log2(100.0), rel=0.02)


def test_delta_values():
    k = an.gamma_approx_params(1.0).k
    assert an.delta_p(2, 2, k) == 0.0
    assert an.delta_r(4, 4, k) == 0.0
    assert an.delta_p(2, 16, k) == pytest.approx(DELTA_P_2_16, abs=1e-9)
    assert an.delta_p(16, 64, k) == pytest.approx(DELTA_P_16_64, abs=1e-9)
    assert an.delta_r(2, 16, k) == pytest.approx(2 * DELTA_P_2_16 / (20 * math.log10(math.e))
                                                 / math.log(2), rel=1e-12)


def test_crossover_power_reference_values():
    for L, ref in CROSSOVER_DBM.items():
        got = 10 * math.log10(an.scheme_crossover_power(L, 1e-4, 0.0, 1e-10))
        assert got == pytest.approx(ref, abs=1e-9)


def test_crossover_power_noise_floor_scaling():
    # omega -> 0: boundary proportional to the noise power
    lo = an.scheme_crossover_power(2, 1e-18, 0.0, 1e-10)
    hi = an.scheme_crossover_power(2, 1e-18, 0.0, 1e-8)
    assert hi / lo == pytest.approx(100.0, rel=1e-6)


def test_crossover_is_intersection_of_asymptotic_se():
    # the closed form must equal the power where the two schemes' asymptotic
    # rates intersect
    for L in (1, 2, 16):
        boundary = an.scheme_crossover_power(L, 1e-4, 0.0, 1e-10)

        def gap(p_mw):
            return (an.asymptotic_se(L, p_mw, 1e-4, 0.0, 1e-10, scheme=Scheme.ONE)
                    - an.asymptotic_se(L, p_mw, 1e-4, 0.0, 1e-10, scheme=Scheme.TWO))

        assert abs(gap(boundary)) < 1e-9
        assert gap(boundary * 1.5) > 0 > gap(boundary / 1.5)


def test_crossover_interference_limited_branch():
    # nu=1: upper power bound below which the one-slot scheme still wins
    p1 = an.scheme_crossover_power(1, 1e-4, 1.0, 1e-10)
    p4 = an.scheme_crossover_power(4, 1e-4, 1.0, 1e-10)
    assert p1 > 0 and p4 > 0
    # the bound solves R_two(P) = R_floor: check by direct evaluation
    r_floor = an.se_exact_L1(1e4)
    r_two = an.asymptotic_se(1, p1, 1e-4, 1.0, 1e-10, scheme=Scheme.TWO)
    assert r_two == pytest.approx(r_floor, rel=1e-9)


def test_kl_divergence_reference_and_scale_invariance():
    v1 = an.kl_divergence_gamma_fit(1.0)
    assert v1 == pytest.approx(KL_SIGMA1, rel=1e-6)
    assert v1 >= 0.0
    values = [an.kl_divergence_gamma_fit(s2) for s2 in (0.01, 1.0, 100.0)]
    assert max(values) / min(values) < 1.3


def test_gamma_formula_internal_consistency_at_l1():
    from ris2way.numerics import regularized_gamma_p
    p = an.gamma_approx_params(1.0)
    direct = regularized_gamma_p(p.k, math.sqrt(0.7 / 30.0) / p.theta)
    # formula extended to a single element (internal consistency only)
    assert special.gammainc(1 * p.k, math.sqrt(0.7 / 30.0) / p.theta) == pytest.approx(direct)
