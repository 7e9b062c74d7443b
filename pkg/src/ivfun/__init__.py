"""Minimax and adaptive estimation of linear functionals of the structural
function in nonparametric instrumental regression."""

from .adaptive import (DeterministicPenalty, M_hat, M_upper_h, SelectionTrace,
                       a_n, delta_hat, deterministic_penalty, pen_hat,
                       reduction_gap, select, select_partial, varsigma_hat_sq)
from .basis import (Representer, average, custom, eval_basis, functional_of,
                    point_eval, representer_coeffs, weighted_avg_deriv)
from .datagen import (OperatorSpec, Sample, StructuralFunction, generate,
                      joint_density, load_csv, sample_zw, save_csv)
from .errors import ConfigurationError, DomainError
from .estimator import EstimateTrace, estimate_trace, plugin_estimate
from .galerkin import GalerkinSystem, assemble, inject, inv_spectral_norm
from .harness import (ExperimentConfig, MonteCarloReport, config_from_dict,
                      run_experiment, slope_fit)
from .rates import (RateDescriptor, RateReport, kappa_check, m_star,
                    rate_class, rate_fixed, rate_report, regime_exponent)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "DomainError",
    "Representer", "eval_basis", "point_eval", "average", "weighted_avg_deriv",
    "custom", "representer_coeffs", "functional_of",
    "OperatorSpec", "StructuralFunction", "Sample", "generate", "joint_density",
    "sample_zw", "save_csv", "load_csv",
    "GalerkinSystem", "assemble", "inject", "inv_spectral_norm",
    "EstimateTrace", "plugin_estimate", "estimate_trace",
    "SelectionTrace", "DeterministicPenalty", "a_n", "M_upper_h", "M_hat",
    "varsigma_hat_sq", "delta_hat", "pen_hat", "select", "select_partial",
    "deterministic_penalty", "reduction_gap",
    "RateReport", "RateDescriptor", "m_star", "rate_fixed", "rate_class",
    "kappa_check", "regime_exponent", "rate_report",
    "ExperimentConfig", "MonteCarloReport", "run_experiment", "slope_fit",
    "config_from_dict",
    "__version__",
]
