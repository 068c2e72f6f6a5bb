"""Graph canonical coherence analysis for pairs of multivariate graph signals."""

from .core import (
    CanonicalSolution,
    FrequencySolution,
    ReducedRankPredictor,
    reduced_rank_predictor,
    run_gccha,
    solve_constrained,
    solve_frequency,
)
from .estimators import GraphCanonicalCoherence, GraphReducedRankRegressor
from .exceptions import GCChAError, NumericalError, ValidationError
from .graph import (
    FilterBank,
    Graph,
    ShiftOperator,
    SpectralBasis,
    adjacency,
    apply_filter_bank,
    build_graph,
    gft,
    inverse_gft,
    laplacian,
    spectral_basis,
    total_variation,
)
from .interpretation import LoadingsReport, adequacy, communality, loadings
from .spectral import (
    EstimatorConfig,
    SpectralMatrixField,
    cross_periodogram,
    psd_project,
    realization_average_csd,
    spectral_matrix_field,
    stationarity_diagnostic,
    windowed_average_csd,
)
from .synth import SynthesisSpec, cca_oracle, empirical_mse, synthesize_stationary

__version__ = "0.1.0"

__all__ = [
    "CanonicalSolution",
    "FrequencySolution",
    "ReducedRankPredictor",
    "reduced_rank_predictor",
    "run_gccha",
    "solve_constrained",
    "solve_frequency",
    "GraphCanonicalCoherence",
    "GraphReducedRankRegressor",
    "GCChAError",
    "NumericalError",
    "ValidationError",
    "FilterBank",
    "Graph",
    "ShiftOperator",
    "SpectralBasis",
    "adjacency",
    "apply_filter_bank",
    "build_graph",
    "gft",
    "inverse_gft",
    "laplacian",
    "spectral_basis",
    "total_variation",
    "LoadingsReport",
    "adequacy",
    "communality",
    "loadings",
    "EstimatorConfig",
    "SpectralMatrixField",
    "cross_periodogram",
    "psd_project",
    "realization_average_csd",
    "spectral_matrix_field",
    "stationarity_diagnostic",
    "windowed_average_csd",
    "SynthesisSpec",
    "cca_oracle",
    "empirical_mse",
    "synthesize_stationary",
]
