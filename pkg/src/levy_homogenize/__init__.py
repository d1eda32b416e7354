"""Numerical laboratory for critical homogenization of jump diffusions in
random media.

The package simulates one-dimensional diffusions with state-dependent
alpha-stable jumps in a stationary random environment, solves the
associated corrector and resolvent problems, evaluates the limiting Levy
exponent, and verifies the convergence statements statistically.
"""

from .jump_kernel import (AsymGaussChi, ConstChi, JumpKernel,
                          LevyMeasureSpec, LinearKernel, LogOscillationChi,
                          OnePlusGaussChi, TailInvertedKernel,
                          kernel_from_json, linear_kernel,
                          tail_inverted_kernel)
from .limit_law import (LevyTriplet, exponent, sample_limit, stable_integral,
                        triplet_report)
from .medium import (Fields, MediumRealization, MediumSpec, average,
                     cosine_profile_log_coeffs, make_medium, realization,
                     validate_assumptions)
from .corrector import (CorrectorSolution, DiscreteGenerator, assemble,
                        corrector_solve, effective_A, effective_A_routes,
                        resolvent_ergodic_limit, solve_resolvent)
from .sde_sim import (EnsembleResult, PathSample, SimConfig,
                      simulate_ensemble, simulate_path)

__version__ = "1.0.0"

__all__ = [
    "AsymGaussChi", "ConstChi", "CorrectorSolution", "DiscreteGenerator",
    "EnsembleResult", "Fields", "JumpKernel", "LevyMeasureSpec",
    "LevyTriplet", "LinearKernel", "LogOscillationChi", "MediumRealization",
    "MediumSpec", "OnePlusGaussChi", "PathSample", "SimConfig",
    "TailInvertedKernel", "assemble", "average", "corrector_solve",
    "cosine_profile_log_coeffs", "effective_A", "effective_A_routes",
    "exponent", "kernel_from_json", "linear_kernel", "make_medium",
    "realization", "resolvent_ergodic_limit", "sample_limit",
    "simulate_ensemble", "simulate_path", "solve_resolvent",
    "stable_integral", "tail_inverted_kernel", "triplet_report",
    "validate_assumptions", "__version__",
]
