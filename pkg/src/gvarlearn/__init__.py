"""Sparse Gaussian VAR structure learning with fractional marginal pseudo-likelihood."""

from .errors import (
    DegenerateResidualsError,
    GvarError,
    SimulationError,
    SingularDesignError,
    SingularScatterError,
)
from .evaluate import RecoveryScores, lag_histogram, one_step_mse, precision_recall
from .model import GvarModel, GvarStructure, TimeSeries, center, companion_matrix, detrend, is_stable
from .params import FitDiagnostics, estimate_lag_matrices_given_omega, estimate_omega_given_pattern, fit_parameters
from .scoring import (
    LaggedDataMatrix,
    MarkovBlanket,
    ScatterMatrix,
    build_lagged_matrix,
    log_local_fmpl,
    log_prior_contemporaneous,
    log_prior_temporal,
    scatter,
)
from .search import (
    LearnResult,
    TemporalResult,
    greedy_markov_blanket,
    learn_contemporaneous,
    learn_structure,
    learn_temporal,
    ols_node,
    residuals,
)
from .simulate import SimConfig, draw_series, random_gvar, sparse_var2_example


def learn_and_fit(series, max_lag: int, gamma: float = 0.5, delta: float = 1e-6, threads: int = 1) -> LearnResult:
    """Learn the structure, then fit its parameters; fills ``model`` and ``diagnostics``."""
    result = learn_structure(series, max_lag, gamma, threads=threads)
    result.model, result.diagnostics = fit_parameters(series, result.structure, delta)
    return result


__version__ = "0.1.0"
