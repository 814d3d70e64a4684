"""Special functions, semi-infinite quadrature, and dense symmetric linear algebra.

Everything here is pure and reentrant; RNG state is always caller-owned.
The special functions delegate to scipy's well-tested kernels behind
domain-checked wrappers, plus a log-domain Bessel-K evaluator for large
orders where the direct value overflows a double.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate, special


class NonConvergenceError(RuntimeError):
    """Quadrature exhausted its subdivision budget above tolerance."""

    def __init__(self, message, value=None, error_estimate=None):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


class NotPsdError(ValueError):
    """Matrix has an eigenvalue below the PSD tolerance."""


@dataclass(frozen=True)
class QuadratureSpec:
    relative_tolerance: float = 1e-9
    absolute_tolerance: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self):
        if self.relative_tolerance <= 0 or self.absolute_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class SymmetricMatrix:
    """Dense symmetric matrix; construction symmetrizes so entry(i,j) == entry(j,i)."""

    array: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.array, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("matrix must be square")
        object.__setattr__(self, "array", (a + a.T) / 2.0)

    @property
    def dimension(self) -> int:
        return self.array.shape[0]


def _as_matrix(m) -> np.ndarray:
    if isinstance(m, SymmetricMatrix):
        return m.array
    a = np.asarray(m, dtype=float)
    return (a + a.T) / 2.0


def bessel_k(order: int, x: float) -> float:
    """Modified Bessel function of the second kind K_order(x) for x > 0.

    Underflows to exactly 0 once the result is below the smallest double.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    if not np.all(np.asarray(x) > 0):
        raise ValueError("bessel_k requires x > 0")
    return special.kv(order, x)


def log_bessel_k(order: int, x: float) -> float:
    """log K_order(x) for integer order >= 0, stable where K itself overflows.

    Uses the exponentially scaled K_0/K_1 and the upward recurrence
    K_{m+1} = K_{m-1} + (2m/x) K_m with periodic renormalization; the
    recurrence is stable in the increasing-order direction.
    """
    if order < 0 or int(order) != order:
        raise ValueError("order must be a nonnegative integer")
    if x <= 0:
        raise ValueError("log_bessel_k requires x > 0")
    k0 = special.kve(0, x)
    k1 = special.kve(1, x)
    if order == 0:
        return math.log(k0) - x
    logscale = -x
    a, b = k0, k1
    for m in range(1, int(order)):
        a, b = b, a + (2.0 * m / x) * b
        if b > 1e280:
            a /= b
            logscale += math.log(b)
            b = 1.0
    return math.log(b) + logscale


def regularized_gamma_p(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a)."""
    if not np.all(np.asarray(a) > 0):
        raise ValueError("shape parameter a must be > 0")
    if not np.all(np.asarray(x) >= 0):
        raise ValueError("x must be >= 0")
    return special.gammainc(a, x)


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper counterpart Q(a, x) = 1 - P(a, x), computed without cancellation."""
    if not np.all(np.asarray(a) > 0):
        raise ValueError("shape parameter a must be > 0")
    if not np.all(np.asarray(x) >= 0):
        raise ValueError("x must be >= 0")
    return special.gammaincc(a, x)


def digamma(x: float) -> float:
    if not np.all(np.asarray(x) > 0):
        raise ValueError("digamma requires x > 0")
    return special.digamma(x)


def erf(x: float) -> float:
    return special.erf(x)


class QuadratureResult(NamedTuple):
    value: float
    error_estimate: float


def integrate_semi_infinite(f: Callable[[float], float],
                            spec: QuadratureSpec = QuadratureSpec()) -> QuadratureResult:
    """Integrate f over (0, inf) to the requested tolerance.

    The infinite range is mapped onto a finite interval and refined by
    adaptive Gauss-Kronrod subdivision (QUADPACK QAGI); raises
    NonConvergenceError when the subdivision budget is exhausted with the
    error estimate still above tolerance.
    """
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        value, abserr, info, *tail = integrate.quad(
            f, 0.0, np.inf,
            epsabs=spec.absolute_tolerance,
            epsrel=spec.relative_tolerance,
            limit=spec.max_subdivisions,
            full_output=1,
        )
    if not math.isfinite(value):
        raise NonConvergenceError(
            f"semi-infinite quadrature returned non-finite value {value!r}",
            value=value, error_estimate=abserr)
    if tail:  # quadpack attached a warning message
        tol = max(spec.absolute_tolerance, spec.relative_tolerance * abs(value))
        if abserr > tol:
            raise NonConvergenceError(
                f"semi-infinite quadrature did not converge: estimate {value!r}, "
                f"error {abserr!r} above tolerance {tol!r}",
                value=value, error_estimate=abserr)
    return QuadratureResult(float(value), float(abserr))


def eig_symmetric(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (sorted descending) and orthonormal eigenvectors (columns)."""
    a = _as_matrix(m)
    w, v = np.linalg.eigh(a)
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def sample_gaussian_psd(a, rng: np.random.Generator) -> np.ndarray:
    """Draw one zero-mean Gaussian vector with covariance `a` (PSD up to tolerance).

    Eigenvalues in [-1e-9 * lambda_max, 0) are clamped to zero; anything more
    negative raises NotPsdError.
    """
    mat = _as_matrix(a)
    w, v = np.linalg.eigh(mat)
    lam_max = max(float(w[-1]), 0.0)
    if np.any(w < -1e-9 * lam_max):
        raise NotPsdError(
            f"matrix has eigenvalue {w.min()!r} below -1e-9 * lambda_max ({lam_max!r})")
    # eigenvalues at roundoff scale are null-space noise, not signal
    w = np.where(w < 1e-12 * lam_max, 0.0, w)
    return (v * np.sqrt(w)) @ rng.standard_normal(mat.shape[0])
