"""Conditional-independence graphs for multi-attribute Gaussian time series.

The estimator minimizes a penalized frequency-domain negative log-likelihood
over inverse spectral-density matrices on a grid of smoothed frequencies;
nodes are conditionally independent exactly when their cross blocks vanish at
every frequency.  Sparse-group penalties (lasso, log-sum, SCAD) are handled
by local linear approximation around the previous iterate, each pass solved
by ADMM with closed-form updates.
"""

from .admm import AdmmConfig, AdmmResult, admm_run
from .estimator import (
    EdgeSet,
    FitConfig,
    FitResult,
    PrecisionSpectrum,
    bic,
    extract_edges,
    fit,
    fit_statistics,
    lambda_grid,
)
from .evaluation import (
    BenchmarkTable,
    RunReport,
    ScenarioConfig,
    f1_score,
    hamming_distance,
    monte_carlo,
)
from .exceptions import (
    InvalidConfigError,
    InvalidInputError,
    MissingValueError,
    NumericalFailureError,
    ScenarioError,
    SearchFailureError,
    WindowTooLargeError,
)
from .penalty import (
    LlaWeights,
    PenaltySpec,
    amenability_mu,
    convexity_radius,
    lla_weights,
    penalty_derivative,
    penalty_value,
)
from .spectral import (
    FrequencyGrid,
    MultiAttributeSeries,
    SpectralStatistics,
    dft,
    frequency_grid,
    group_block_norms,
    smoothed_psd,
)
from .synth import (
    GroundTruth,
    VarModel,
    companion_spectral_radius,
    gen_var_coefficients,
    make_model,
    model1_precision,
    model2_precision,
    simulate_var,
    true_edges,
    true_psd,
)
from .tsio import RawTable, load_series, preprocess, read_table, write_series

__version__ = "0.1.0"

__all__ = [
    "AdmmConfig",
    "AdmmResult",
    "BenchmarkTable",
    "EdgeSet",
    "FitConfig",
    "FitResult",
    "FrequencyGrid",
    "GroundTruth",
    "InvalidConfigError",
    "InvalidInputError",
    "LlaWeights",
    "MissingValueError",
    "MultiAttributeSeries",
    "NumericalFailureError",
    "PenaltySpec",
    "PrecisionSpectrum",
    "RawTable",
    "RunReport",
    "ScenarioConfig",
    "ScenarioError",
    "SearchFailureError",
    "SpectralStatistics",
    "VarModel",
    "WindowTooLargeError",
    "admm_run",
    "amenability_mu",
    "bic",
    "companion_spectral_radius",
    "convexity_radius",
    "dft",
    "extract_edges",
    "f1_score",
    "fit",
    "fit_statistics",
    "frequency_grid",
    "gen_var_coefficients",
    "group_block_norms",
    "hamming_distance",
    "lambda_grid",
    "lla_weights",
    "load_series",
    "make_model",
    "model1_precision",
    "model2_precision",
    "monte_carlo",
    "penalty_derivative",
    "penalty_value",
    "preprocess",
    "read_table",
    "simulate_var",
    "smoothed_psd",
    "true_edges",
    "true_psd",
    "write_series",
]
