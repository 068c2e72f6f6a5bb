"""Graphs, shift operators, spectral bases and LSI graph filtering.

Signals are numpy arrays with the node axis first: ``(n,)`` for a single
signal, ``(n, d)`` for a multivariate signal and ``(n, d, M)`` for ``M``
realizations of it.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ._linalg import fix_phase, order_clusters
from .exceptions import (
    DimensionMismatch,
    DirectedGraphUnsupported,
    DisconnectedGraph,
    DuplicateEdge,
    EigenFailure,
    NegativeWeight,
    NotNormal,
    SelfLoop,
    ValidationError,
)

SHIFT_KINDS = ("laplacian", "adjacency", "custom-normal")

NORMALITY_RTOL = 1e-10
EIGEN_RESIDUAL_RTOL = 1e-8
CLUSTER_RTOL = 1e-9


@dataclass(frozen=True)
class Graph:
    """Finite simple weighted graph on nodes ``0..node_count-1``."""

    node_count: int
    edges: tuple
    directed: bool = False

    @property
    def weights(self):
        """Dense weighted adjacency matrix ``W`` (symmetric when undirected)."""
        w = np.zeros((self.node_count, self.node_count))
        for s, t, wt in self.edges:
            w[s, t] = wt
            if not self.directed:
                w[t, s] = wt
        return w


def build_graph(edges, n, directed=False):
    """Validate an edge list and return a connected simple :class:`Graph`.

    Edges of weight zero are kept in the edge list but do not count
    towards connectivity.
    """
    n = int(n)
    if n < 1:
        raise ValidationError("node count must be positive")
    seen = set()
    clean = []
    for e in edges:
        s, t, w = int(e[0]), int(e[1]), float(e[2])
        if not (0 <= s < n and 0 <= t < n):
            raise ValidationError(f"edge ({s}, {t}) has a node index outside [0, {n})")
        if s == t:
            raise SelfLoop(f"self-loop at node {s}")
        if not np.isfinite(w):
            raise ValidationError(f"edge ({s}, {t}) has non-finite weight")
        if w < 0:
            raise NegativeWeight(f"edge ({s}, {t}) has negative weight {w}")
        key = (s, t) if directed else (min(s, t), max(s, t))
        if key in seen:
            raise DuplicateEdge(f"duplicate edge {key}")
        seen.add(key)
        clean.append((s, t, w))

    g = Graph(n, tuple(clean), bool(directed))
    if n > 1:
        rows = [s for s, t, w in clean if w > 0]
        cols = [t for s, t, w in clean if w > 0]
        adj = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        n_comp, _ = connected_components(adj, directed=directed, connection="weak")
        if n_comp > 1:
            raise DisconnectedGraph(f"graph has {n_comp} connected components")
    return g


@dataclass(frozen=True)
class ShiftOperator:
    matrix: np.ndarray
    kind: str = "custom-normal"

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch("shift operator must be square")
        if self.kind not in SHIFT_KINDS:
            raise ValidationError(f"unknown shift operator kind {self.kind!r}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("shift operator has non-finite entries")
        norm = np.linalg.norm(m)
        commutator = m @ m.conj().T - m.conj().T @ m
        if np.linalg.norm(commutator) > NORMALITY_RTOL * max(norm**2, 1.0):
            raise NotNormal("shift operator is not normal")
        if self.kind == "laplacian":
            if np.iscomplexobj(m) or not np.allclose(m, m.T, rtol=0, atol=1e-12 * max(norm, 1.0)):
                raise ValidationError("Laplacian must be real symmetric")
            if np.max(np.abs(m.sum(axis=1))) > 1e-10 * max(norm, 1.0):
                raise ValidationError("Laplacian rows must sum to zero")
        object.__setattr__(self, "matrix", m)

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def is_real_symmetric(self):
        m = self.matrix
        return not np.iscomplexobj(m) and np.array_equal(m, m.T)


def laplacian(g):
    """Combinatorial Laplacian ``diag(W 1) - W`` of an undirected graph."""
    if g.directed:
        raise DirectedGraphUnsupported("the Laplacian is defined for undirected graphs only")
    w = g.weights
    return ShiftOperator(np.diag(w.sum(axis=1)) - w, "laplacian")


def adjacency(g):
    if g.directed:
        raise DirectedGraphUnsupported(
            "directed graphs must be supplied as a custom normal shift operator"
        )
    return ShiftOperator(g.weights, "adjacency")


@dataclass(frozen=True)
class SpectralBasis:
    """Eigenbasis of a normal shift operator in low-to-high frequency order.

    Attributes
    ----------
    eigenvectors : ndarray (n, n)
        Unitary ``V``; column ``l`` is the mode of frequency ``eigenvalues[l]``.
    eigenvalues : ndarray (n,)
    frequency_keys : ndarray (n,)
        Nondecreasing ordering keys.
    kind : str
        Kind of the shift operator the basis came from.
    """

    eigenvectors: np.ndarray
    eigenvalues: np.ndarray
    frequency_keys: np.ndarray
    kind: str = "custom-normal"
    operator: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def n(self):
        return self.eigenvectors.shape[0]

    @property
    def is_real(self):
        return not np.iscomplexobj(self.eigenvectors)


def _default_key(kind, eigenvalues):
    if kind == "laplacian":
        return np.clip(eigenvalues.real, 0.0, None)
    return np.abs(1.0 - eigenvalues)


def spectral_basis(s, order_key=None):
    """Eigendecompose ``s`` and order the modes by graph frequency.

    Laplacians are ordered by eigenvalue; other normal operators by
    ``|1 - lambda|`` unless ``order_key`` (a callable mapping the
    eigenvalue array to nonnegative keys) is given. Each eigenvector is
    rotated so its largest entry is real positive, and modes inside a
    cluster of equal keys are ordered lexicographically.
    """
    if not isinstance(s, ShiftOperator):
        s = ShiftOperator(np.asarray(s))
    m = s.matrix
    norm = max(float(np.linalg.norm(m)), np.finfo(float).tiny)
    try:
        if s.is_real_symmetric:
            lam, v = scipy.linalg.eigh(m)
        elif np.allclose(m, m.conj().T, rtol=0, atol=1e-14 * norm):
            lam, v = scipy.linalg.eigh(0.5 * (m + m.conj().T))
        else:
            # complex Schur form of a normal matrix is diagonal with unitary factor
            t, v = scipy.linalg.schur(m.astype(complex), output="complex")
            lam = np.diag(t).copy()
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenFailure(str(exc)) from exc

    if not np.all(np.isfinite(lam)):
        raise EigenFailure("non-finite eigenvalues")
    v = fix_phase(v)
    keys = order_key(lam) if order_key is not None else _default_key(s.kind, lam)
    keys = np.asarray(keys, dtype=float)
    if keys.shape != lam.shape or np.any(keys < 0):
        raise ValidationError("frequency keys must be nonnegative, one per eigenvalue")
    perm = order_clusters(keys, v, CLUSTER_RTOL * norm)
    lam, v, keys = lam[perm], v[:, perm], keys[perm]

    residual = np.linalg.norm(m @ v - v * lam, axis=0).max()
    if residual > EIGEN_RESIDUAL_RTOL * norm:
        raise EigenFailure(f"eigen residual {residual:.3e} exceeds tolerance")
    return SpectralBasis(v, lam, keys, s.kind, m)


def total_variation(x, s, p=2):
    """Total variation of a graph signal.

    For a Laplacian this is the quadratic form ``x^H L x``; otherwise the
    ``p``-Dirichlet form ``||x - S x||_p^p / p``.
    """
    m = s.matrix if isinstance(s, ShiftOperator) else np.asarray(s)
    x = np.asarray(x)
    if x.shape != (m.shape[0],):
        raise DimensionMismatch(f"signal has shape {x.shape}, expected ({m.shape[0]},)")
    if isinstance(s, ShiftOperator) and s.kind == "laplacian":
        return float(np.real(np.vdot(x, m @ x)))
    return float(np.sum(np.abs(x - m @ x) ** p) / p)


def _check_nodes(x, n):
    x = np.asarray(x)
    if x.ndim == 0 or x.shape[0] != n:
        raise DimensionMismatch(f"node axis has length {x.shape[:1]}, expected {n}")
    return x


def gft(x, b):
    """Graph Fourier transform ``V^H x`` along the node axis."""
    x = _check_nodes(x, b.n)
    v = b.eigenvectors
    out = v.conj().T @ x.reshape(b.n, -1)
    return out.reshape(x.shape)


def inverse_gft(c, b):
    c = _check_nodes(c, b.n)
    out = b.eigenvectors @ c.reshape(b.n, -1)
    return out.reshape(c.shape)


@dataclass(frozen=True)
class FilterBank:
    """Bank of LSI graph filters given by their frequency responses.

    ``responses[l]`` is the ``(n_out, n_in)`` matrix whose ``(i, j)`` entry
    is the response of the filter from input channel ``j`` to output
    channel ``i`` at the ``l``-th frequency.
    """

    responses: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.responses)
        if r.ndim != 3:
            raise DimensionMismatch("filter bank responses must have shape (n, n_out, n_in)")
        object.__setattr__(self, "responses", r)

    @property
    def n(self):
        return self.responses.shape[0]

    @property
    def n_out(self):
        return self.responses.shape[1]

    @property
    def n_in(self):
        return self.responses.shape[2]

    def compose(self, inner):
        """Bank equivalent to applying ``inner`` first, then ``self``."""
        if inner.n != self.n or inner.n_out != self.n_in:
            raise DimensionMismatch("filter banks cannot be composed")
        return FilterBank(self.responses @ inner.responses)

    @classmethod
    def identity(cls, n, d):
        return cls(np.broadcast_to(np.eye(d), (n, d, d)).copy())


def apply_filter_bank(f, x, b):
    """Filter a multivariate signal ``(n, d[, M])`` through a bank, spectrally."""
    x = np.asarray(x)
    squeeze = x.ndim == 2
    if squeeze:
        x = x[:, :, None]
    if x.ndim != 3:
        raise DimensionMismatch("signal must have shape (n, d) or (n, d, M)")
    if f.n != b.n or x.shape[0] != b.n:
        raise DimensionMismatch("filter bank, signal and basis disagree on n")
    if x.shape[1] != f.n_in:
        raise DimensionMismatch(f"signal has {x.shape[1]} channels, filter expects {f.n_in}")
    coeffs = gft(x, b)
    out = inverse_gft(f.responses @ coeffs, b)
    return out[:, :, 0] if squeeze else out
