"""Closed-form and asymptotic outage / spectral-efficiency results for the
reciprocal two-way link with optimal surface phases.

The per-element cascade amplitude is a product of two independent Rayleigh
variables; its exact CDF carries a Bessel-K kernel, and sums over elements are
handled through a moment-matched Gamma approximation (shape k, scale theta).
Closed forms quoted in terms of Meijer-G / generalized hypergeometric
functions are evaluated numerically as the CCDF rate integral they come from,
which is the defining identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import special

from .channel import Scheme
from .numerics import (QuadratureSpec, digamma, erf, integrate_semi_infinite,
                       log_bessel_k, regularized_gamma_p, regularized_gamma_q)

EULER_GAMMA = float(np.euler_gamma)  # expansion constant, not the phase jitter
LOG2 = math.log(2.0)


@dataclass(frozen=True)
class GammaApproxParams:
    """Moment-matched Gamma fit of one cascade amplitude: shape k, scale theta."""

    k: float
    theta: float


@dataclass(frozen=True)
class CltParams:
    """Gaussian-limit mean/variance of the summed cascade amplitude."""

    mu: float
    eta: float

    def __post_init__(self):
        if self.mu <= 0 or self.eta <= 0:
            raise ValueError("mu and eta must be > 0")


def gamma_approx_params(sigma2: float) -> GammaApproxParams:
    """k = pi^2/(16 - pi^2), theta = (16 - pi^2) sigma^2 / (4 pi)."""
    if sigma2 <= 0:
        raise ValueError("sigma2 must be > 0")
    pi2 = math.pi**2
    return GammaApproxParams(k=pi2 / (16.0 - pi2),
                             theta=(16.0 - pi2) * sigma2 / (4.0 * math.pi))


def clt_params(L: int, sigma2: float) -> CltParams:
    return CltParams(mu=L * math.pi * sigma2 / 4.0,
                     eta=L * (16.0 - math.pi**2) * sigma2**2 / 16.0)


def _cascade_argument(gamma_th, rho, sigma2):
    """z = (2/sigma^2) sqrt(gamma_th / rho), the Bessel argument of the exact law."""
    return (2.0 / sigma2) * np.sqrt(np.asarray(gamma_th, dtype=float) / rho)


def outage_exact_L1(gamma_th, rho: float, sigma2: float = 1.0):
    """Exact single-element outage 1 - z K_1(z); clamped to [0, 1]."""
    if rho <= 0:
        raise ValueError("rho must be > 0")
    z = _cascade_argument(gamma_th, rho, sigma2)
    with np.errstate(invalid="ignore", over="ignore"):
        out = np.where(z == 0.0, 0.0, 1.0 - z * special.kv(1, z))
    return np.clip(out, 0.0, 1.0)


def outage_gamma_Lge2(L: int, gamma_th, rho: float,
                      params: GammaApproxParams) -> float:
    """Gamma-approximation outage P(L k, sqrt(gamma_th/rho) / theta)."""
    if L < 2:
        raise ValueError("gamma-approximation outage is for L >= 2")
    if rho <= 0:
        raise ValueError("rho must be > 0")
    x = np.sqrt(np.asarray(gamma_th, dtype=float) / rho) / params.theta
    return regularized_gamma_p(L * params.k, x)


def outage_clt(L: int, gamma_th, rho: float, params: CltParams):
    """Gaussian-limit outage in its error-function form."""
    if rho <= 0:
        raise ValueError("rho must be > 0")
    u = np.sqrt(np.asarray(gamma_th, dtype=float) / rho)
    s = math.sqrt(2.0 * params.eta)
    out = 0.5 * (erf((u - params.mu) / s) + erf((u + params.mu) / s))
    return np.clip(out, 0.0, 1.0)


def _log_cascade_ccdf_uniform_phase(L: int, z: float) -> float:
    """log of the tail 2 (z/2)^L K_L(z) / Gamma(L), stable for any order."""
    return (math.log(2.0) + L * math.log(z / 2.0) + log_bessel_k(L, z)
            - special.gammaln(L))


def cascade_ccdf_uniform_phase(L: int, z) -> np.ndarray:
    """Tail 2 (z/2)^L K_L(z) / Gamma(L) of the fully phase-scrambled cascade sum.

    Evaluated in the log domain: the individual factors overflow long before
    the product (which lies in [0, 1]) does.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty_like(z)
    for i, zi in enumerate(z):
        out[i] = 1.0 if zi == 0.0 else math.exp(_log_cascade_ccdf_uniform_phase(L, zi))
    return np.clip(out, 0.0, 1.0)


def outage_phase_error_uniform_pi(L: int, gamma_th, rho: float, sigma2: float = 1.0):
    """Exact outage when every element phase is scrambled uniformly over (-pi, pi]."""
    if rho <= 0:
        raise ValueError("rho must be > 0")
    z = np.atleast_1d(_cascade_argument(gamma_th, rho, sigma2))
    out = np.empty_like(z)
    for i, zi in enumerate(z):
        out[i] = 0.0 if zi == 0.0 else -math.expm1(
            min(_log_cascade_ccdf_uniform_phase(L, zi), 0.0))
    out = np.clip(out, 0.0, 1.0)
    return out if out.size > 1 else float(out[0])


def spectral_efficiency(cdf: Callable[[float], float],
                        spec: QuadratureSpec = QuadratureSpec(),
                        half_rate: bool = False) -> float:
    """Average rate (1/ln 2) * int_0^inf (1 - F(x)) / (1 + x) dx in bits/sec/Hz.

    half_rate halves the result for the two-slot scheme.
    """
    value, _ = integrate_semi_infinite(lambda x: (1.0 - cdf(x)) / (1.0 + x), spec)
    return value / LOG2 * (0.5 if half_rate else 1.0)


def _se_from_ccdf(ccdf, spec, half_rate):
    value, _ = integrate_semi_infinite(lambda x: ccdf(x) / (1.0 + x), spec)
    return value / LOG2 * (0.5 if half_rate else 1.0)


def se_exact_L1(rho: float, sigma2: float = 1.0,
                spec: QuadratureSpec = QuadratureSpec(),
                half_rate: bool = False) -> float:
    """Single-element spectral efficiency (the Bessel-kernel rate integral)."""
    def ccdf(x):
        z = _cascade_argument(x, rho, sigma2)
        return 1.0 if z == 0.0 else min(z * special.kv(1, z), 1.0)
    return _se_from_ccdf(ccdf, spec, half_rate)


def se_gamma(L: int, rho: float, params: GammaApproxParams,
             spec: QuadratureSpec = QuadratureSpec(),
             half_rate: bool = False) -> float:
    """Gamma-approximation spectral efficiency for L >= 2."""
    a = L * params.k

    def ccdf(x):
        return regularized_gamma_q(a, math.sqrt(x / rho) / params.theta)
    return _se_from_ccdf(ccdf, spec, half_rate)


def se_phase_error_uniform_pi(L: int, rho: float, sigma2: float = 1.0,
                              spec: QuadratureSpec = QuadratureSpec(),
                              half_rate: bool = False) -> float:
    """Spectral efficiency under fully scrambled phases (exact law)."""
    def ccdf(x):
        z = _cascade_argument(x, rho, sigma2)
        return float(cascade_ccdf_uniform_phase(L, z)[0])
    return _se_from_ccdf(ccdf, spec, half_rate)


def sandwich_bounds_Lge2(L: int, gamma_th: float, rho: float,
                         sigma2: float = 1.0) -> tuple[float, float]:
    """[P1(gamma_th/L^2)]^L <= P_out(L) <= [P1(gamma_th)]^L, built from the exact
    single-element law (a true statement about the exact sum distribution)."""
    if L < 2:
        raise ValueError("bounds apply for L >= 2")
    lower = float(outage_exact_L1(gamma_th / L**2, rho, sigma2)) ** L
    upper = float(outage_exact_L1(gamma_th, rho, sigma2)) ** L
    return lower, upper


def asymptotic_outage(L: int, gamma_th: float, p_mw: float, omega: float,
                      nu: float, noise_mw: float, sigma2: float = 1.0) -> float:
    """Large-power outage: (log rho / rho)^L decay for nu=0, floor at rho=1/omega
    for nu=1.  The L >= 2 array-gain constant is an approximation; only the decay
    rate is contractual."""
    if nu == 0.0:
        rho = p_mw / (omega + noise_mw)
        if L == 1:
            return (gamma_th / sigma2**2) * math.log(rho) / rho
        params = gamma_approx_params(sigma2)
        a = params.k * L
        # log domain: the gain's factors overflow double range long before
        # the (tiny) product does
        log_gain = ((a / 2.0) * math.log(gamma_th * (noise_mw + omega))
                    - math.log(a) - a * math.log(params.theta)
                    - special.gammaln(a))
        log_decay = L * (math.log(math.log(p_mw)) - math.log(p_mw))
        try:
            return math.exp(log_gain + log_decay)
        except OverflowError:
            return math.inf
    if nu == 1.0:
        rho_floor = 1.0 / omega
        if L == 1:
            return float(outage_exact_L1(gamma_th, rho_floor, sigma2))
        return float(outage_gamma_Lge2(L, gamma_th, rho_floor, gamma_approx_params(sigma2)))
    raise ValueError("asymptotic outage handled for nu in {0, 1} only")


def asymptotic_se(L: int, p_mw: float, omega: float, nu: float, noise_mw: float,
                  sigma2: float = 1.0, scheme: Scheme = Scheme.ONE,
                  spec: QuadratureSpec = QuadratureSpec()) -> float:
    """Large-power spectral efficiency: log(P) growth (nu=0) or the rho=1/omega
    floor (nu=1); the two-slot scheme is interference-free and half rate."""
    params = gamma_approx_params(sigma2)
    if scheme is Scheme.TWO:
        if L == 1:
            return (math.log(p_mw) - math.log(noise_mw / sigma2**2)
                    - 2.0 * EULER_GAMMA) / (2.0 * LOG2)
        return (math.log(p_mw) + 2.0 * digamma(L * params.k)
                - math.log(noise_mw / params.theta**2)) / (2.0 * LOG2)
    if nu == 0.0:
        if L == 1:
            return (math.log(p_mw) - math.log((omega + noise_mw) / sigma2**2)
                    - 2.0 * EULER_GAMMA) / LOG2
        return (math.log(p_mw) + 2.0 * digamma(L * params.k)
                - math.log((noise_mw + omega) / params.theta**2)) / LOG2
    if nu == 1.0:
        rho_floor = 1.0 / omega
        if L == 1:
            return se_exact_L1(rho_floor, sigma2, spec)
        return se_gamma(L, rho_floor, params, spec)
    raise ValueError("asymptotic spectral efficiency handled for nu in {0, 1} only")


def delta_r(L1: int, L2: int, k: float) -> float:
    """Rate gained by growing the surface from L1 to L2 elements [bits/sec/Hz]."""
    if not 1 <= L1 <= L2:
        raise ValueError("need L2 >= L1 >= 1")
    return 2.0 * (digamma(L2 * k) - digamma(L1 * k)) / LOG2


def delta_p(L1: int, L2: int, k: float) -> float:
    """Transmit power saved at equal rate by growing L1 -> L2 elements [dB]."""
    if not 1 <= L1 <= L2:
        raise ValueError("need L2 >= L1 >= 1")
    return 20.0 * math.log10(math.e) * (digamma(L2 * k) - digamma(L1 * k))


def scheme_crossover_power(L: int, omega: float, nu: float, noise_mw: float,
                           sigma2: float = 1.0,
                           spec: QuadratureSpec = QuadratureSpec()) -> float:
    """Transmit power (mW) where the one-slot scheme starts to outperform the
    two-slot scheme (nu=0), or the upper power bound below which it still does
    (nu=1)."""
    params = gamma_approx_params(sigma2)
    sw = math.sqrt(noise_mw)
    if nu == 0.0:
        if L == 1:
            return ((omega + noise_mw) / (sw * sigma2)) ** 2 * math.exp(2.0 * EULER_GAMMA)
        return (((omega + noise_mw) / (sw * params.theta)) ** 2
                * math.exp(-2.0 * digamma(L * params.k)))
    if nu == 1.0:
        rho_floor = 1.0 / omega
        if L == 1:
            r_floor = se_exact_L1(rho_floor, sigma2, spec)
            return math.exp(2.0 * LOG2 * r_floor + math.log(noise_mw / sigma2**2)
                            + 2.0 * EULER_GAMMA)
        r_floor = se_gamma(L, rho_floor, params, spec)
        return math.exp(2.0 * LOG2 * r_floor + math.log(noise_mw / params.theta**2)
                        - 2.0 * digamma(L * params.k))
    raise ValueError("crossover power handled for nu in {0, 1} only")


def kl_divergence_gamma_fit(sigma2: float,
                            spec: Optional[QuadratureSpec] = None) -> float:
    """Divergence between the exact cascade-amplitude density and its Gamma fit.

    The expectation of log K_0 is taken by quadrature against the exact density
    f(t) = 4 t K_0(2 t / sigma^2) / sigma^4.
    """
    if sigma2 <= 0:
        raise ValueError("sigma2 must be > 0")
    params = gamma_approx_params(sigma2)
    k, theta = params.k, params.theta
    if spec is None:
        spec = QuadratureSpec(relative_tolerance=1e-10, absolute_tolerance=1e-13,
                              max_subdivisions=400)

    def integrand(t):
        z = 2.0 * t / sigma2
        log_k0 = math.log(special.kve(0, z)) - z
        return 4.0 * t * math.exp(log_k0) / sigma2**2 * log_k0

    expect_log_k0, _ = integrate_semi_infinite(integrand, spec)
    return (math.pi * sigma2 / (4.0 * theta) + k * math.log(theta / sigma2)
            + EULER_GAMMA * (k - 2.0) + math.log(4.0 * math.gamma(k))
            + expect_log_k0)
