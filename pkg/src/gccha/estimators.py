"""scikit-learn style estimators wrapping the functional API.

Signals are ``(n, d)`` or ``(n, d, M)`` arrays with the node axis first,
so the "samples" of these estimators are graph nodes sharing one graph.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_pair, check_rank, check_signal
from .core import reduced_rank_predictor, run_gccha
from .exceptions import ValidationError
from .graph import Graph, ShiftOperator, SpectralBasis, apply_filter_bank, laplacian, spectral_basis
from .interpretation import loadings
from .spectral import EstimatorConfig, spectral_matrix_field
from .synth import empirical_mse


def resolve_basis(basis):
    """Accept a :class:`SpectralBasis`, a :class:`ShiftOperator` or a :class:`Graph`."""
    if isinstance(basis, SpectralBasis):
        return basis
    if isinstance(basis, ShiftOperator):
        return spectral_basis(basis)
    if isinstance(basis, Graph):
        return spectral_basis(laplacian(basis))
    if basis is None:
        raise ValidationError("a graph, shift operator or spectral basis is required")
    return spectral_basis(ShiftOperator(np.asarray(basis)))


def estimator_config(mode, n_realizations, n_windows, seed, ridge, center):
    if mode == "auto":
        mode = "realization-average" if n_realizations >= 2 else "random-window"
    return EstimatorConfig(mode, n_windows, seed, ridge, center)


class GraphCanonicalCoherence(TransformerMixin, BaseEstimator):
    """Graph canonical coherence analysis.

    Parameters
    ----------
    basis : SpectralBasis, ShiftOperator or Graph
        Graph frequency domain. A bare graph uses its Laplacian.
    n_components : int, optional
        Number of canonical pairs; ``min(p, q)`` when omitted.
    estimator : {"auto", "realization-average", "random-window"}
        Spectral estimator. ``"auto"`` averages over realizations when
        there are at least two and uses random windows otherwise.
    n_windows : int
        Number of random windows.
    seed : int
    ridge : float
        Relative ridge for near-singular spectral matrices.
    center : bool

    Attributes
    ----------
    field_ : SpectralMatrixField
    solution_ : CanonicalSolution
    coherences_ : ndarray (n_components, n)
    H_bank_, F_bank_ : FilterBank
    """

    def __init__(self, basis=None, n_components=None, estimator="auto", n_windows=50,
                 seed=0, ridge=1e-8, center=True):
        self.basis = basis
        self.n_components = n_components
        self.estimator = estimator
        self.n_windows = n_windows
        self.seed = seed
        self.ridge = ridge
        self.center = center

    def fit(self, X, Y):
        b = resolve_basis(self.basis)
        x, y = check_pair(X, Y, b.n)
        r = check_rank(self.n_components, x.shape[1], y.shape[1])
        cfg = estimator_config(self.estimator, x.shape[2], self.n_windows, self.seed,
                               self.ridge, self.center)
        self.basis_ = b
        self.config_ = cfg
        self.field_ = spectral_matrix_field(x, y, b, cfg)
        self.solution_ = run_gccha(x, y, b, self.field_, r, self.ridge)
        self.n_components_ = r
        self.coherences_ = self.solution_.coherence_curves
        self.H_bank_ = self.solution_.H_bank
        self.F_bank_ = self.solution_.F_bank
        return self

    def transform(self, X, Y=None):
        """Canonical signals ``Z`` (and ``W`` when ``Y`` is given)."""
        check_is_fitted(self, "solution_")
        z = apply_filter_bank(self.H_bank_, _like_input(X, self.basis_.n, "X"), self.basis_)
        if Y is None:
            return z
        w = apply_filter_bank(self.F_bank_, _like_input(Y, self.basis_.n, "Y"), self.basis_)
        return z, w

    def fit_transform(self, X, Y=None, **fit_params):
        if Y is None:
            raise ValidationError("canonical coherence analysis needs both X and Y")
        return self.fit(X, Y).transform(X, Y)

    def loadings(self):
        check_is_fitted(self, "solution_")
        return loadings(self.solution_, self.field_)


class GraphReducedRankRegressor(BaseEstimator):
    """Reduced-rank filter-bank regression of ``Y`` on ``X``.

    ``weighted=True`` minimizes the spectrally whitened error instead of
    the plain mean squared error.
    """

    def __init__(self, basis=None, rank=None, weighted=False, estimator="auto",
                 n_windows=50, seed=0, ridge=1e-8, center=True):
        self.basis = basis
        self.rank = rank
        self.weighted = weighted
        self.estimator = estimator
        self.n_windows = n_windows
        self.seed = seed
        self.ridge = ridge
        self.center = center

    def fit(self, X, Y):
        b = resolve_basis(self.basis)
        x, y = check_pair(X, Y, b.n)
        cfg = estimator_config(self.estimator, x.shape[2], self.n_windows, self.seed,
                               self.ridge, self.center)
        self.basis_ = b
        self.field_ = spectral_matrix_field(x, y, b, cfg)
        centered = cfg.center and x.shape[2] >= 2
        mx = x.mean(axis=2) if centered else None
        my = y.mean(axis=2) if centered else None
        self.predictor_ = reduced_rank_predictor(
            self.field_, mx, my, self.rank, self.weighted, b, self.ridge
        )
        self.min_mse_ = self.predictor_.min_mse
        return self

    def predict(self, X):
        check_is_fitted(self, "predictor_")
        x = np.asarray(X)
        out = self.predictor_.predict(x)
        return out[:, :, 0] if x.ndim == 2 else out

    def score(self, X, Y):
        """Negative mean squared error per realization."""
        check_is_fitted(self, "predictor_")
        return -empirical_mse(self.predictor_, X, Y)


def _like_input(x, n, name):
    x = np.asarray(x)
    check_signal(x, n, name)
    return x if x.ndim >= 2 else x[:, None]
