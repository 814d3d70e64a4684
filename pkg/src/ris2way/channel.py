"""Channel generation and exact SINR evaluation for two-way links via a passive
reflecting surface.

Conventions: powers are linear milliwatts, SINR thresholds linear, phases in
[0, 2*pi).  A fading coefficient h = a * exp(-j*phi) is stored as the complex
number itself; the coherent combining kernel works directly on products of
coefficients, so amplitude/phase splits never have to round-trip through
trigonometry.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np


class Scheme(enum.Enum):
    ONE = "one"  # single-slot bidirectional exchange, loop interference present
    TWO = "two"  # two orthogonal one-way slots, interference-free, half rate


class Reciprocity(enum.Enum):
    RECIPROCAL = "reciprocal"
    NON_RECIPROCAL = "non-reciprocal"


@dataclass(frozen=True)
class UniformPhaseError:
    """Per-element phase jitter, i.i.d. uniform on (-delta, delta]."""

    delta: float

    def __post_init__(self):
        if not 0 < self.delta <= math.pi:
            raise ValueError("delta must lie in (0, pi]")


@dataclass(frozen=True)
class VonMisesPhaseError:
    """Per-element phase jitter, i.i.d. von Mises with location mu, concentration kappa."""

    mu: float
    kappa: float

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be > 0")


PhaseErrorModel = Union[UniformPhaseError, VonMisesPhaseError]


@dataclass(frozen=True)
class SystemConfig:
    """Full experiment description."""

    L: int
    sigma2: float = 1.0
    p1_mw: float = 1.0
    p2_mw: float = 1.0
    noise_mw: float = 1e-7
    omega: float = 1e-4
    nu: float = 0.0
    scheme: Scheme = Scheme.ONE
    reciprocity: Reciprocity = Reciprocity.RECIPROCAL
    gamma_th: float = 1.0
    phase_error: Optional[PhaseErrorModel] = None

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be >= 1")
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be > 0")
        if self.p1_mw < 0 or self.p2_mw < 0 or self.noise_mw < 0:
            raise ValueError("powers must be >= 0")
        if self.omega < 0:
            raise ValueError("omega must be >= 0")
        if not 0 <= self.nu <= 1:
            raise ValueError("nu must lie in [0, 1]")
        if self.gamma_th < 0:
            raise ValueError("gamma_th must be >= 0")

    def with_power(self, p_mw: float) -> "SystemConfig":
        """Both users at the same transmit power (the usual sweep variable)."""
        return replace(self, p1_mw=p_mw, p2_mw=p_mw)


@dataclass(frozen=True)
class SinrBudget:
    """Average SINR coefficients: gamma_p = rho_p * |coherent sum|^2."""

    rho1: float
    rho2: float

    def __post_init__(self):
        if self.rho1 < 0 or self.rho2 < 0:
            raise ValueError("rho must be >= 0")


def loop_interference_mw(p_mw: float, omega: float, nu: float) -> float:
    """Residual loop-interference variance omega * P^nu (P in mW)."""
    return omega * p_mw**nu


def sinr_budget(cfg: SystemConfig) -> SinrBudget:
    if cfg.scheme is Scheme.TWO:
        # orthogonal slots: no loop interference, plain SNR
        return SinrBudget(cfg.p2_mw / cfg.noise_mw, cfg.p1_mw / cfg.noise_mw)
    i1 = loop_interference_mw(cfg.p1_mw, cfg.omega, cfg.nu)
    i2 = loop_interference_mw(cfg.p2_mw, cfg.omega, cfg.nu)
    return SinrBudget(cfg.p2_mw / (i1 + cfg.noise_mw), cfg.p1_mw / (i2 + cfg.noise_mw))


@dataclass(frozen=True)
class ReciprocalChannel:
    """Draws of the forward==backward coefficients h (user 1) and g (user 2).

    Arrays are (L,) for a single realization or (n, L) for a block.
    """

    h: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        if self.h.shape != self.g.shape or self.h.ndim not in (1, 2):
            raise ValueError("h and g must be matching (L,) or (n, L) arrays")

    @property
    def L(self) -> int:
        return self.h.shape[-1]


@dataclass(frozen=True)
class NonReciprocalChannel:
    """Draws of the four independent coefficient vectors, shaped like ReciprocalChannel."""

    h_t: np.ndarray
    h_r: np.ndarray
    g_t: np.ndarray
    g_r: np.ndarray

    def __post_init__(self):
        shapes = {v.shape for v in (self.h_t, self.h_r, self.g_t, self.g_r)}
        if len(shapes) != 1 or self.h_t.ndim not in (1, 2):
            raise ValueError("all four vectors must be matching (L,) or (n, L) arrays")

    @property
    def L(self) -> int:
        return self.h_t.shape[-1]


ChannelRealization = Union[ReciprocalChannel, NonReciprocalChannel]


def _cn_matrix(z: np.ndarray, sigma2: float) -> np.ndarray:
    half = z.shape[-1] // 2
    return math.sqrt(sigma2 / 2.0) * (z[..., :half] + 1j * z[..., half:])


def sample_channels(cfg: SystemConfig, rng: np.random.Generator) -> ChannelRealization:
    """Draw one realization; every coefficient ~ CN(0, sigma2)."""
    block = sample_channel_block(cfg, rng, 1)
    if isinstance(block, ReciprocalChannel):
        return ReciprocalChannel(block.h[0], block.g[0])
    return NonReciprocalChannel(block.h_t[0], block.h_r[0], block.g_t[0], block.g_r[0])


def sample_channel_block(cfg: SystemConfig, rng: np.random.Generator, n: int) -> ChannelRealization:
    """Draw n realizations at once; fields become (n, L) arrays.

    The draw layout (one standard_normal call per block, vectors in a fixed
    column order) is part of the reproducibility contract: trial i of a block
    is row i no matter how many trials the block holds.
    """
    L = cfg.L
    if cfg.reciprocity is Reciprocity.RECIPROCAL:
        z = rng.standard_normal((n, 4 * L))
        return ReciprocalChannel(
            h=_cn_matrix(z[:, 0:2 * L], cfg.sigma2),
            g=_cn_matrix(z[:, 2 * L:4 * L], cfg.sigma2),
        )
    z = rng.standard_normal((n, 8 * L))
    return NonReciprocalChannel(
        h_t=_cn_matrix(z[:, 0:2 * L], cfg.sigma2),
        h_r=_cn_matrix(z[:, 2 * L:4 * L], cfg.sigma2),
        g_t=_cn_matrix(z[:, 4 * L:6 * L], cfg.sigma2),
        g_r=_cn_matrix(z[:, 6 * L:8 * L], cfg.sigma2),
    )


def sample_phase_errors(model: Optional[PhaseErrorModel], rng: np.random.Generator,
                        shape) -> Optional[np.ndarray]:
    """Per-element phase errors for one or more trials; None when error-free.

    Uniform errors are drawn as delta * U(-1, 1) so that sweeps over delta can
    share the underlying uniforms (common random numbers).
    """
    if model is None:
        return None
    if isinstance(model, UniformPhaseError):
        return model.delta * rng.uniform(-1.0, 1.0, size=shape)
    return rng.vonmises(model.mu, model.kappa, size=shape)


def coherent_gain(terms: np.ndarray, phases: np.ndarray) -> np.ndarray:
    """|sum_l terms_l * e^{j phi_l}|^2, batched over leading axes of `terms`."""
    if terms.shape[-1] != np.shape(phases)[-1]:
        raise ValueError(f"phase vector length {np.shape(phases)[-1]} does not match "
                         f"element count {terms.shape[-1]}")
    return np.abs(np.sum(terms * np.exp(1j * np.asarray(phases)), axis=-1)) ** 2


def sinr_reciprocal(ch: ReciprocalChannel, phases: np.ndarray,
                    budget: SinrBudget) -> tuple[float, float]:
    """Instantaneous per-user SINRs; self-interference is perfectly cancelled."""
    gain = coherent_gain(ch.h * ch.g, phases)
    return budget.rho1 * gain, budget.rho2 * gain


def sinr_nonreciprocal(ch: NonReciprocalChannel, phases: np.ndarray,
                       budget: SinrBudget) -> tuple[float, float]:
    g1 = coherent_gain(ch.h_r * ch.g_t, phases)
    g2 = coherent_gain(ch.g_r * ch.h_t, phases)
    return budget.rho1 * g1, budget.rho2 * g2


def sinr_with_phase_error(ch: ReciprocalChannel, phases: np.ndarray, budget: SinrBudget,
                          errors: np.ndarray) -> tuple[float, float]:
    """SINRs when the applied phases are perturbed element-wise by `errors`."""
    return sinr_reciprocal(ch, np.asarray(phases) + np.asarray(errors), budget)


def wrap_phases(phases: np.ndarray) -> np.ndarray:
    """Wrap angles into [0, 2*pi)."""
    return np.mod(phases, 2.0 * np.pi)
