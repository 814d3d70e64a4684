"""Monte Carlo estimators: outage probability, average spectral efficiency,
scheme comparison, and crossover detection.

Per-trial channel gains are a pure function of (seed, trial index); trials are
processed in fixed-size blocks whose partial results are merged in block
order, so estimates are bit-for-bit reproducible for any worker count.  Gains
do not depend on the transmit power, which gives common random numbers across
power sweeps and across schemes for free.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .channel import (NonReciprocalChannel, Reciprocity, Scheme, SinrBudget,
                      SystemConfig, sample_channel_block, sample_phase_errors,
                      sinr_budget)
from .optim import OptimMethod, solve_maxmin


class NoCrossoverError(RuntimeError):
    """The scheme spectral-efficiency difference never changes sign on the grid."""


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    trials: int
    seed: int
    metric: str  # "outage" or "se"


PHASE_POLICIES = ("optimal", "u1", "random", "greedy", "sdp")


@dataclass(frozen=True)
class TrialGains:
    """Power-independent per-trial channel gains g_p: gamma_p = rho_p * g_p."""

    g1: np.ndarray
    g2: np.ndarray

    def user(self, user) -> np.ndarray:
        if user == 1:
            return self.g1
        if user == 2:
            return self.g2
        if user == "min":
            return np.minimum(self.g1, self.g2)
        raise ValueError("user must be 1, 2, or 'min'")


def _reciprocal_gain_block(cfg: SystemConfig, seed: int, block: int, count: int) -> TrialGains:
    ch = sample_channel_block(cfg, rngmod.block_generator(seed, rngmod.STREAM_CHANNEL, block), count)
    amp = np.abs(ch.h) * np.abs(ch.g)
    if cfg.phase_error is None:
        # optimal phases co-phase every term (per slot for the two-slot scheme)
        g = np.sum(amp, axis=1) ** 2
    else:
        # adjustment jitter hits the applied phases in either scheme
        err_rng = rngmod.block_generator(seed, rngmod.STREAM_PHASE_ERROR, block)
        eps = sample_phase_errors(cfg.phase_error, err_rng, amp.shape)
        g = np.abs(np.sum(amp * np.exp(1j * eps), axis=1)) ** 2
    return TrialGains(g, g)


def _nonreciprocal_gain_block(cfg: SystemConfig, policy: str, seed: int, block: int,
                              count: int, optim_kwargs: dict) -> TrialGains:
    ch = sample_channel_block(cfg, rngmod.block_generator(seed, rngmod.STREAM_CHANNEL, block), count)
    z1 = ch.h_r * ch.g_t
    z2 = ch.g_r * ch.h_t
    if cfg.scheme is Scheme.TWO:
        # each slot gets its own co-phasing, independent of the policy
        return TrialGains(np.sum(np.abs(z1), axis=1) ** 2,
                          np.sum(np.abs(z2), axis=1) ** 2)
    if policy == "u1":
        return TrialGains(np.sum(np.abs(z1), axis=1) ** 2,
                          np.abs(np.sum(z2 * np.exp(-1j * np.angle(z1)), axis=1)) ** 2)
    if policy == "random":
        brng = rngmod.block_generator(seed, rngmod.STREAM_BASELINE, block)
        phases = brng.uniform(0.0, 2.0 * math.pi, size=z1.shape)
        rot = np.exp(1j * phases)
        return TrialGains(np.abs(np.sum(z1 * rot, axis=1)) ** 2,
                          np.abs(np.sum(z2 * rot, axis=1)) ** 2)
    if policy in ("greedy", "sdp"):
        # per-trial max-min optimization at unit rho; valid for power sweeps
        # because scaling (rho1, rho2) together does not move the argmax
        budget_unit = _unit_ratio_budget(cfg)
        method = OptimMethod.GREEDY_ITERATIVE if policy == "greedy" else OptimMethod.SDP_RELAX
        g1 = np.empty(count)
        g2 = np.empty(count)
        for i in range(count):
            trial_index = block * rngmod.BLOCK_SIZE + i
            trial = NonReciprocalChannel(ch.h_t[i], ch.h_r[i], ch.g_t[i], ch.g_r[i])
            trial_rng = rngmod.trial_generator(seed, rngmod.STREAM_OPTIM, trial_index)
            res = solve_maxmin(trial, budget_unit, method=method, rng=trial_rng,
                               **optim_kwargs)
            rot = np.exp(1j * res.phases)
            g1[i] = np.abs(np.sum(z1[i] * rot)) ** 2
            g2[i] = np.abs(np.sum(z2[i] * rot)) ** 2
        return TrialGains(g1, g2)
    raise ValueError(f"unknown phase policy {policy!r}")


def _unit_ratio_budget(cfg: SystemConfig) -> SinrBudget:
    # keep the rho1:rho2 ratio (it shapes the max-min solution), drop the scale
    budget = sinr_budget(cfg)
    scale = max(budget.rho1, budget.rho2)
    if scale == 0.0:
        return budget
    return SinrBudget(budget.rho1 / scale, budget.rho2 / scale)


def _gain_block_task(args):
    cfg, policy, seed, block, count, optim_kwargs = args
    if cfg.reciprocity is Reciprocity.RECIPROCAL:
        return _reciprocal_gain_block(cfg, seed, block, count)
    return _nonreciprocal_gain_block(cfg, policy, seed, block, count, optim_kwargs)


def collect_gains(cfg: SystemConfig, policy: str, trials: int, seed: int,
                  workers: int = 1, optim_kwargs: dict | None = None) -> TrialGains:
    """Per-trial gains for `trials` trials, identical for any worker count."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if policy not in PHASE_POLICIES:
        raise ValueError(f"unknown phase policy {policy!r}")
    if cfg.reciprocity is Reciprocity.RECIPROCAL and policy != "optimal":
        raise ValueError("reciprocal channels support the 'optimal' policy only")
    if cfg.reciprocity is Reciprocity.NON_RECIPROCAL:
        if policy == "optimal":
            raise ValueError("non-reciprocal channels need a max-min or baseline policy")
        if cfg.phase_error is not None:
            raise ValueError("the phase-error model applies to reciprocal channels")
    tasks = [(cfg, policy, seed, block, count, optim_kwargs or {})
             for block, count in rngmod.iter_blocks(trials)]
    if workers <= 1 or len(tasks) == 1:
        parts = [_gain_block_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_gain_block_task, tasks, chunksize=1))
    return TrialGains(np.concatenate([p.g1 for p in parts]),
                      np.concatenate([p.g2 for p in parts]))


def _per_trial_sinr(cfg: SystemConfig, gains: TrialGains, user) -> np.ndarray:
    budget = sinr_budget(cfg)
    if user == "min":
        return np.minimum(budget.rho1 * gains.g1, budget.rho2 * gains.g2)
    rho = budget.rho1 if user == 1 else budget.rho2
    return rho * gains.user(user)


def outage_from_gains(cfg: SystemConfig, gains: TrialGains, seed: int,
                      user=1) -> McEstimate:
    gamma = _per_trial_sinr(cfg, gains, user)
    n = gamma.size
    p = float(np.count_nonzero(gamma <= cfg.gamma_th)) / n
    return McEstimate(p, math.sqrt(p * (1.0 - p) / n), n, seed, "outage")


def se_from_gains(cfg: SystemConfig, gains: TrialGains, seed: int,
                  user=1) -> McEstimate:
    gamma = _per_trial_sinr(cfg, gains, user)
    rate = np.log2(1.0 + gamma)
    if cfg.scheme is Scheme.TWO:
        rate = rate / 2.0
    n = rate.size
    mean = float(np.mean(rate))
    std = float(np.std(rate, ddof=1)) if n > 1 else 0.0
    return McEstimate(mean, std / math.sqrt(n), n, seed, "se")


def estimate_outage(cfg: SystemConfig, policy: str = "optimal", trials: int = 10**6,
                    seed: int = 0, user=1, workers: int = 1,
                    optim_kwargs: dict | None = None) -> McEstimate:
    gains = collect_gains(cfg, policy, trials, seed, workers, optim_kwargs)
    return outage_from_gains(cfg, gains, seed, user)


def estimate_se(cfg: SystemConfig, policy: str = "optimal", trials: int = 10**3,
                seed: int = 0, user=1, workers: int = 1,
                optim_kwargs: dict | None = None) -> McEstimate:
    gains = collect_gains(cfg, policy, trials, seed, workers, optim_kwargs)
    return se_from_gains(cfg, gains, seed, user)


def outage_curve(cfg: SystemConfig, p_dbm_grid, policy: str = "optimal",
                 trials: int = 10**6, seed: int = 0, user=1, workers: int = 1,
                 optim_kwargs: dict | None = None) -> list[McEstimate]:
    """Outage across a power sweep with common random numbers."""
    gains = collect_gains(cfg, policy, trials, seed, workers, optim_kwargs)
    return [outage_from_gains(cfg.with_power(10.0 ** (p / 10.0)), gains, seed, user)
            for p in p_dbm_grid]


def se_curve(cfg: SystemConfig, p_dbm_grid, policy: str = "optimal",
             trials: int = 10**3, seed: int = 0, user=1, workers: int = 1,
             optim_kwargs: dict | None = None) -> list[McEstimate]:
    """Spectral efficiency across a power sweep with common random numbers."""
    gains = collect_gains(cfg, policy, trials, seed, workers, optim_kwargs)
    return [se_from_gains(cfg.with_power(10.0 ** (p / 10.0)), gains, seed, user)
            for p in p_dbm_grid]


def find_crossover(cfg: SystemConfig, p_dbm_grid, policy: str = "optimal",
                   trials: int = 10**3, seed: int = 0, user=1, workers: int = 1,
                   tol_db: float = 0.01, optim_kwargs: dict | None = None) -> float:
    """Power (dBm) where the one-slot scheme's spectral efficiency overtakes the
    two-slot scheme's, refined by bisection under common random numbers."""
    gains = collect_gains(cfg, policy, trials, seed, workers, optim_kwargs)
    grid = np.asarray(list(p_dbm_grid), dtype=float)
    if grid.size < 2:
        raise ValueError("need at least two grid points")

    def diff(p_dbm: float) -> float:
        p_mw = 10.0 ** (p_dbm / 10.0)
        one = dataclasses.replace(cfg, scheme=Scheme.ONE).with_power(p_mw)
        two = dataclasses.replace(cfg, scheme=Scheme.TWO).with_power(p_mw)
        return (se_from_gains(one, gains, seed, user).value
                - se_from_gains(two, gains, seed, user).value)

    values = [diff(p) for p in grid]
    bracket = None
    for i in range(len(grid) - 1):
        if values[i] == 0.0:
            return float(grid[i])
        if values[i] * values[i + 1] < 0.0:
            bracket = (grid[i], grid[i + 1])
            break
    if bracket is None:
        raise NoCrossoverError(
            f"no sign change of SE(one-slot) - SE(two-slot) on [{grid[0]}, {grid[-1]}] dBm")
    lo, hi = bracket
    flo = diff(lo)
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        fm = diff(mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)
