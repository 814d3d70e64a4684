"""Two-way reflecting-surface links: simulation, closed-form analysis, and
max-min phase optimization."""

from .analytic import (CltParams, GammaApproxParams, asymptotic_outage,
                       asymptotic_se, clt_params, delta_p, delta_r,
                       gamma_approx_params, kl_divergence_gamma_fit,
                       outage_clt, outage_exact_L1, outage_gamma_Lge2,
                       outage_phase_error_uniform_pi, scheme_crossover_power,
                       se_exact_L1, se_gamma, se_phase_error_uniform_pi,
                       spectral_efficiency)
from .channel import (NonReciprocalChannel, Reciprocity, ReciprocalChannel,
                      Scheme, SinrBudget, SystemConfig, UniformPhaseError,
                      VonMisesPhaseError, sample_channels, sinr_budget,
                      sinr_nonreciprocal, sinr_reciprocal,
                      sinr_with_phase_error)
from .mc import (McEstimate, NoCrossoverError, estimate_outage, estimate_se,
                 find_crossover, outage_curve, se_curve)
from .numerics import (NonConvergenceError, NotPsdError, QuadratureSpec,
                       SymmetricMatrix, bessel_k, digamma, eig_symmetric, erf,
                       integrate_semi_infinite, regularized_gamma_p,
                       sample_gaussian_psd)
from .optim import (MaxMinResult, OptimMethod, QuadraticFormPair,
                    SolverFailureError, baseline_phases, build_quadratic_forms,
                    gaussian_randomization, greedy_iterative,
                    optimal_phase_reciprocal, sdp_maxmin, solve_maxmin)

__version__ = "0.1.0"
