"""Double iterated Stratonovich/Ito integrals via generalized Fourier series.

Coefficients of the kernel in Legendre or trigonometric bases, sampling of the
truncated double series, mean-square error functionals of the remainder, and
a discretised Brownian-path oracle to check all of it.
"""

__version__ = "0.1.0"

from ._quad import QuadratureError
from .basis import BasisKind, BasisSystem, phi, phi_integral
from .coefficients import (CoeffMatrix, coeff_matrix, fourier_coeff, inner_antiderivative,
                           k_norm_sq, trace_partial_sum, weight_product_integral)
from .expansion import (ExpansionSample, GaussianDraws, deterministic_zeta0, draw_gaussians,
                        expected_value, sample_batch, sample_truncated)
from .model import (CallableWeight, Constant, DomainError, Interval, NoisePair, Polynomial,
                    eval_weight, kernel_K, kernel_Kstar, parse_weight)
from .oracle import (DiscretePath, ExperimentConfig, coupled_error_experiment,
                     coupled_error_sweep, prelimit_iterated, prelimit_multiple, sample_path,
                     zeta_from_path)
from .remainder import (ErrorReport, diag_remainder_integral, ms_error_bound,
                        ms_projection_error, remainder_eval)

__all__ = [
    "QuadratureError", "BasisKind", "BasisSystem", "phi", "phi_integral",
    "CoeffMatrix", "coeff_matrix", "fourier_coeff", "inner_antiderivative", "k_norm_sq",
    "trace_partial_sum", "weight_product_integral",
    "ExpansionSample", "GaussianDraws", "deterministic_zeta0", "draw_gaussians",
    "expected_value", "sample_batch", "sample_truncated",
    "CallableWeight", "Constant", "DomainError", "Interval", "NoisePair", "Polynomial",
    "eval_weight", "kernel_K", "kernel_Kstar", "parse_weight",
    "DiscretePath", "ExperimentConfig", "coupled_error_experiment", "coupled_error_sweep",
    "prelimit_iterated", "prelimit_multiple", "sample_path", "zeta_from_path",
    "ErrorReport", "diag_remainder_integral", "ms_error_bound", "ms_projection_error",
    "remainder_eval",
]
