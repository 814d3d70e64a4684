"""Phase design: closed-form optimum, quadratic-form lifting, the relaxation
solver with both search paths, randomized rank-one recovery, greedy search,
and baselines."""

import math

import numpy as np
import pytest

from ris2way.channel import (NonReciprocalChannel, Reciprocity, SinrBudget,
                             SystemConfig, sample_channels, sinr_nonreciprocal,
                             sinr_reciprocal)
from ris2way.numerics import eig_symmetric
from ris2way.optim import (OptimMethod, baseline_phases,
                           build_quadratic_forms, gaussian_randomization,
                           greedy_iterative, lifted_to_phases,
                           optimal_phase_reciprocal, phases_to_lifted,
                           sdp_maxmin, solve_maxmin)

BUDGET = SinrBudget(1.0, 1.0)


def nonrec(L, seed, sigma2=1.0):
    cfg = SystemConfig(L=L, sigma2=sigma2, reciprocity=Reciprocity.NON_RECIPROCAL)
    return sample_channels(cfg, np.random.default_rng(seed))


def test_optimal_phase_zero_channel_phases():
    h = np.array([1.0 + 0j, 2.0 + 0j])
    ch_rec = sample_channels(SystemConfig(L=2), np.random.default_rng(0))
    ch = type(ch_rec)(h=h, g=np.array([0.5 + 0j, 3.0 + 0j]))
    assert np.allclose(optimal_phase_reciprocal(ch), 0.0)


def test_optimal_phase_beats_exhaustive_grid():
    ch = sample_channels(SystemConfig(L=2), np.random.default_rng(1))
    best = sinr_reciprocal(ch, optimal_phase_reciprocal(ch), BUDGET)[0]
    grid = np.linspace(0.0, 2.0 * math.pi, 360, endpoint=False)
    z = ch.h * ch.g
    vals = np.abs(z[0] * np.exp(1j * grid)[:, None]
                  + z[1] * np.exp(1j * grid)[None, :]) ** 2
    assert best >= np.max(vals) - 1e-12 * best


def test_optimal_phase_closed_form_identity():
    ch = sample_channels(SystemConfig(L=6), np.random.default_rng(2))
    got = sinr_reciprocal(ch, optimal_phase_reciprocal(ch), BUDGET)[0]
    assert got == pytest.approx(float(np.sum(np.abs(ch.h) * np.abs(ch.g)) ** 2),
                                rel=1e-12)


def test_quadratic_forms_reproduce_sinr_many_instances():
    rng = np.random.default_rng(3)
    budget = SinrBudget(3.0, 0.6)
    worst = 0.0
    for _ in range(200):
        ch = nonrec(4, rng.integers(2**31))
        forms = build_quadratic_forms(ch, budget)
        for _ in range(50):
            phases = rng.uniform(0, 2 * math.pi, 4)
            alpha = phases_to_lifted(phases)
            q1 = alpha @ forms.f1.array @ alpha
            q2 = alpha @ forms.f2.array @ alpha
            g1, g2 = sinr_nonreciprocal(ch, phases, budget)
            worst = max(worst, abs(q1 - g1) / g1, abs(q2 - g2) / g2)
    assert worst < 1e-9


def test_quadratic_forms_single_element_constant():
    ch = nonrec(1, 5)
    budget = SinrBudget(2.0, 5.0)
    forms = build_quadratic_forms(ch, budget)
    for p in (0.0, 1.0, 4.4):
        alpha = phases_to_lifted(np.array([p]))
        assert alpha @ forms.f1.array @ alpha == pytest.approx(
            2.0 * (np.abs(ch.h_r[0]) * np.abs(ch.g_t[0])) ** 2, rel=1e-12)


def test_quadratic_forms_rank_two():
    ch = nonrec(5, 6)
    forms = build_quadratic_forms(ch, SinrBudget(1.0, 2.0))
    for f in (forms.f1.array, forms.f2.array):
        w, _ = eig_symmetric(f)
        assert w[0] > 0 and w[1] > 0
        assert w[0] == pytest.approx(w[1], rel=1e-9)  # both nonzero eigenvalues equal
        assert np.all(np.abs(w[2:]) <= 1e-9 * w[0])


def test_sdp_single_element_value():
    ch = nonrec(1, 7)
    budget = SinrBudget(2.0, 3.0)
    forms = build_quadratic_forms(ch, budget)
    expected = min(2.0 * (np.abs(ch.h_r[0]) * np.abs(ch.g_t[0])) ** 2,
                   3.0 * (np.abs(ch.g_r[0]) * np.abs(ch.h_t[0])) ** 2)
    sol = sdp_maxmin(forms, tol=1e-6)
    assert sol.t_star == pytest.approx(expected, rel=1e-4)


def test_sdp_upper_bounds_random_phase_search():
    rng = np.random.default_rng(8)
    ch = nonrec(3, 9)
    budget = SinrBudget(1.0, 1.0)
    forms = build_quadratic_forms(ch, budget)
    sol = sdp_maxmin(forms, tol=1e-4)
    phases = rng.uniform(0, 2 * math.pi, (100_000, 3))
    rot = np.exp(1j * phases)
    g1 = np.abs(rot @ (ch.h_r * ch.g_t)) ** 2
    g2 = np.abs(rot @ (ch.g_r * ch.h_t)) ** 2
    best_random = np.max(np.minimum(g1, g2))
    assert sol.t_star >= best_random - 1e-4 * sol.t_star


def test_sdp_symmetric_forms_match_dense_grid():
    # identical terms for both users make F1 == F2; the relaxation value is then
    # the single-form maximum (sum of moduli)^2, cross-checked on a dense grid
    ch = nonrec(2, 10)
    z = ch.h_r * ch.g_t
    ch_sym = NonReciprocalChannel(h_t=np.ones(2, dtype=complex), h_r=z,
                                  g_t=np.ones(2, dtype=complex), g_r=z)
    sol = sdp_maxmin(build_quadratic_forms(ch_sym, BUDGET), tol=1e-6)
    grid = np.linspace(0.0, 2.0 * math.pi, 360, endpoint=False)
    vals = np.abs(z[0] * np.exp(1j * grid)[:, None]
                  + z[1] * np.exp(1j * grid)[None, :]) ** 2
    assert sol.t_star == pytest.approx(float(np.sum(np.abs(z))) ** 2, rel=1e-4)
    assert np.max(vals) <= sol.t_star * (1 + 1e-4)


def test_sdp_joint_and_bisect_agree():
    for seed in (11, 12, 13):
        forms = build_quadratic_forms(nonrec(4, seed), SinrBudget(1.5, 0.8))
        a = sdp_maxmin(forms, tol=1e-4, method="bisect")
        b = sdp_maxmin(forms, tol=1e-4, method="joint")
        assert a.t_star == pytest.approx(b.t_star, rel=3e-4)


def test_sdp_solution_feasibility_certificates():
    forms = build_quadratic_forms(nonrec(4, 14), SinrBudget(1.0, 1.0))
    sol = sdp_maxmin(forms, tol=1e-4)
    a = sol.a_star.array
    n = a.shape[0]
    for l in range(n // 2):
        assert a[2 * l, 2 * l] + a[2 * l + 1, 2 * l + 1] == pytest.approx(1.0, abs=1e-7)
    w, _ = eig_symmetric(a)
    assert w[-1] >= -1e-8
    assert np.sum(forms.f1.array * a) >= sol.t_star * (1 - 1e-9)
    assert np.sum(forms.f2.array * a) >= sol.t_star * (1 - 1e-9)


def test_randomization_rank_one_recovers_exactly():
    rng = np.random.default_rng(15)
    phases_true = rng.uniform(0, 2 * math.pi, 4)
    alpha = phases_to_lifted(phases_true)
    forms = build_quadratic_forms(nonrec(4, 16), SinrBudget(1.0, 1.0))
    from ris2way.numerics import SymmetricMatrix
    a_star = SymmetricMatrix(np.outer(alpha, alpha))
    got, val = gaussian_randomization(a_star, forms, 5, rng)
    assert np.allclose(got, phases_true, atol=1e-7)
    q1 = alpha @ forms.f1.array @ alpha
    q2 = alpha @ forms.f2.array @ alpha
    assert val == pytest.approx(min(q1, q2), rel=1e-7)


def test_randomization_bounded_by_relaxation_and_consistent():
    rng = np.random.default_rng(17)
    budget = SinrBudget(1.0, 1.0)
    ch = nonrec(8, 18)
    forms = build_quadratic_forms(ch, budget)
    sol = sdp_maxmin(forms, tol=1e-5)
    phases, scored = gaussian_randomization(sol.a_star, forms, 100, rng)
    g1, g2 = sinr_nonreciprocal(ch, phases, budget)
    assert min(g1, g2) == pytest.approx(scored, rel=1e-9)
    assert scored <= sol.t_star * (1 + 1e-4)
    assert scored >= 0.5 * sol.t_star  # randomization is not far off on typical draws


def test_randomization_near_bound_on_median_instance():
    rng = np.random.default_rng(29)
    ratios = []
    for seed in range(10):
        ch = nonrec(8, 400 + seed)
        forms = build_quadratic_forms(ch, BUDGET)
        sol = sdp_maxmin(forms, tol=1e-5, method="joint")
        _, val = gaussian_randomization(sol.a_star, forms, 200, rng)
        ratios.append(val / sol.t_star)
    assert float(np.median(ratios)) >= 0.9


def test_greedy_single_element_terminates_immediately():
    ch = nonrec(1, 19)
    res = greedy_iterative(ch, SinrBudget(1.0, 2.0))
    assert res.iterations == 1
    g1, g2 = sinr_nonreciprocal(ch, res.phases, SinrBudget(1.0, 2.0))
    assert min(g1, g2) == pytest.approx(min(res.achieved), rel=1e-12)


def test_greedy_on_degenerate_reciprocal_instance_hits_closed_form():
    cfg = SystemConfig(L=6)
    rec = sample_channels(cfg, np.random.default_rng(20))
    ch = NonReciprocalChannel(h_t=rec.h, h_r=rec.h, g_t=rec.g, g_r=rec.g)
    res = greedy_iterative(ch, BUDGET, k=360)
    target = float(np.sum(np.abs(rec.h) * np.abs(rec.g)) ** 2)
    assert min(res.achieved) >= target * (1 - 1e-3)


def test_greedy_monotone_objective():
    ch = nonrec(8, 21)
    res = greedy_iterative(ch, BUDGET)
    hist = res.sweep_objectives
    assert all(b >= a - 1e-12 for a, b in zip(hist, hist[1:]))
    assert res.iterations == len(hist)


def test_greedy_respects_relaxation_bound():
    ch = nonrec(6, 22)
    forms = build_quadratic_forms(ch, BUDGET)
    sol = sdp_maxmin(forms, tol=1e-5)
    res = greedy_iterative(ch, BUDGET)
    assert min(res.achieved) <= sol.t_star * (1 + 1e-4)


def test_baseline_u1_maximizes_user1():
    rng = np.random.default_rng(23)
    ch = nonrec(5, 24)
    u1 = baseline_phases(ch, OptimMethod.U1_PHASE)
    g1_best, _ = sinr_nonreciprocal(ch, u1, BUDGET)
    assert g1_best == pytest.approx(float(np.sum(np.abs(ch.h_r * ch.g_t)) ** 2),
                                    rel=1e-12)
    for _ in range(50):
        g1, _ = sinr_nonreciprocal(ch, rng.uniform(0, 2 * math.pi, 5), BUDGET)
        assert g1 <= g1_best * (1 + 1e-12)


def test_single_element_all_methods_identical():
    ch = nonrec(1, 25)
    budget = SinrBudget(1.0, 1.0)
    rng = np.random.default_rng(26)
    achieved = [solve_maxmin(ch, budget, method=m, rng=rng).achieved
                for m in OptimMethod]
    for g in achieved[1:]:
        assert g[0] == pytest.approx(achieved[0][0], rel=1e-9)
        assert g[1] == pytest.approx(achieved[0][1], rel=1e-9)


def test_quadratic_identity_holds_for_every_method_output():
    ch = nonrec(5, 31)
    budget = SinrBudget(2.0, 0.7)
    forms = build_quadratic_forms(ch, budget)
    rng = np.random.default_rng(32)
    for method in OptimMethod:
        res = solve_maxmin(ch, budget, method=method, rng=rng)
        alpha = phases_to_lifted(res.phases)
        q1 = alpha @ forms.f1.array @ alpha
        q2 = alpha @ forms.f2.array @ alpha
        g1, g2 = sinr_nonreciprocal(ch, res.phases, budget)
        assert q1 == pytest.approx(g1, rel=1e-9)
        assert q2 == pytest.approx(g2, rel=1e-9)
        assert res.achieved[0] == pytest.approx(g1, rel=1e-12)


def test_lifted_round_trip():
    phases = np.array([0.0, 1.2, math.pi, 5.9])
    assert np.allclose(lifted_to_phases(phases_to_lifted(phases)), phases)
    alpha = phases_to_lifted(phases)
    pairs = alpha.reshape(-1, 2)
    assert np.allclose(np.linalg.norm(pairs, axis=1), 1.0)


def test_solve_maxmin_sdp_populates_result():
    ch = nonrec(4, 27)
    res = solve_maxmin(ch, BUDGET, method=OptimMethod.SDP_RELAX,
                       rng=np.random.default_rng(28))
    assert res.t_star is not None and res.a_star is not None
    assert res.method is OptimMethod.SDP_RELAX
    assert min(res.achieved) <= res.t_star * (1 + 1e-4)
    assert res.feasibility_gap >= 0.0
