"""Numerics for reflected delay equations driven by fractional Brownian motion."""

from .convergence import (
    ConvergenceReport,
    MonteCarloConfig,
    cauchy_diffs,
    estimate_holder_exponent,
    estimate_rate,
    method_of_steps_oracle,
    monte_carlo_convergence,
)
from .errors import DomainError, GenerationError, NumericError, PreconditionError
from .fbm import DriverPath, deterministic_driver, fbm_cholesky, fbm_circulant, make_driver
from .paths import (
    Grid,
    GridPath,
    InitialCondition,
    Segment,
    compute_norm,
    holder_seminorm,
    k_n,
    lambda_alpha_bound,
    norm_alpha_one_values,
    norm_inf_alpha,
    norm_one_minus_alpha_inf,
    segment_distance,
    sup_norm,
)
from .scheme import Coefficients, SchemeResult, constant_coefficients, euler_run, make_preset
from .skorokhod import ReflectionResult, complementarity_defect, oscillation_bound_holds, reflect
from .stieltjes import Integrand, integral_bound_check, rs_integral_left, zahle_integral

__version__ = "0.1.0"
