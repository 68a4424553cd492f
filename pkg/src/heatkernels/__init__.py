"""Heat, Hermite and Ornstein-Uhlenbeck semigroups: kernels, quadrature, weights."""

__version__ = "0.1.0"

from .kernels import (DomainError, KernelKind, TimeParam, classical_kernel, hermite_kernel_s,
                      hermite_kernel_t, hermite_shifted_kernel, kernel_profile, log_kernel,
                      meda_forward, meda_inverse, ou_gaussian_kernel, ou_kernel)
from .quadrature import (Ball, Box, Envelope, IntegrationResult, QuadratureConfig,
                         gaussian_heat_oracle, integrate, integrate_radial, truncation_radius)
from .datum import parse_datum
from .semigroup import apply, converge, divergence_demo, maximal
from .weights import (Constant, GaussianWeight, LebesgueExponent, PowerWeight, StretchedExp,
                      dpw_classify, dpw_norm, parse_weight, transfer_weight)
from .verify import CHECKS, run_checks

__all__ = [
    "DomainError", "KernelKind", "TimeParam", "classical_kernel", "hermite_kernel_s",
    "hermite_kernel_t", "hermite_shifted_kernel", "kernel_profile", "log_kernel",
    "meda_forward", "meda_inverse", "ou_gaussian_kernel", "ou_kernel",
    "Ball", "Box", "Envelope", "IntegrationResult", "QuadratureConfig", "gaussian_heat_oracle",
    "integrate", "integrate_radial", "truncation_radius", "parse_datum",
    "apply", "converge", "divergence_demo", "maximal",
    "Constant", "GaussianWeight", "LebesgueExponent", "PowerWeight", "StretchedExp",
    "dpw_classify", "dpw_norm", "parse_weight", "transfer_weight", "CHECKS", "run_checks",
]
