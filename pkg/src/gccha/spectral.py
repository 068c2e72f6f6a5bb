"""Graph power / cross-spectral density estimation.

Two estimators are provided: the realization-averaged graph
cross-periodogram for data with many realizations, and a random-window
average for data with a single (or few) realizations. A window is a
Rademacher (+-1) node mask; window 0 is all ones so the plain periodogram
is always part of the average.
"""

import logging
from dataclasses import dataclass

import numpy as np

from ._linalg import hermitian_part
from ._validation import check_pair, check_signal
from .exceptions import DimensionMismatch, SingularSpectralMatrix, TooFewRealizations, ValidationError
from .graph import gft

logger = logging.getLogger(__name__)

ESTIMATOR_MODES = ("realization-average", "random-window")


@dataclass(frozen=True)
class EstimatorConfig:
    mode: str = "realization-average"
    window_count: int = 50
    seed: int = 0
    ridge: float = 1e-8
    center: bool = True

    def __post_init__(self):
        if self.mode not in ESTIMATOR_MODES:
            raise ValidationError(f"unknown estimator mode {self.mode!r}")
        if int(self.window_count) < 1:
            raise ValidationError("window_count must be >= 1")
        if self.ridge < 0:
            raise ValidationError("ridge must be >= 0")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class SpectralMatrixField:
    """Per-frequency spectral matrices of a pair of multivariate graph signals.

    ``P_X`` has shape ``(n, p, p)``, ``P_Y`` ``(n, q, q)`` and ``P_XY``
    ``(n, p, q)``; ``P_YX`` is derived as the conjugate transpose.
    """

    frequencies: np.ndarray
    P_X: np.ndarray
    P_Y: np.ndarray
    P_XY: np.ndarray

    def __post_init__(self):
        n = len(self.frequencies)
        px, py, pxy = (np.asarray(a) for a in (self.P_X, self.P_Y, self.P_XY))
        if px.ndim != 3 or py.ndim != 3 or pxy.ndim != 3:
            raise DimensionMismatch("spectral matrices must be stacked per frequency")
        p, q = px.shape[1], py.shape[1]
        if px.shape != (n, p, p) or py.shape != (n, q, q) or pxy.shape != (n, p, q):
            raise DimensionMismatch(
                f"inconsistent field shapes {px.shape}, {py.shape}, {pxy.shape} for n={n}"
            )
        object.__setattr__(self, "frequencies", np.asarray(self.frequencies))
        object.__setattr__(self, "P_X", px)
        object.__setattr__(self, "P_Y", py)
        object.__setattr__(self, "P_XY", pxy)

    @property
    def P_YX(self):
        return self.P_XY.conj().transpose(0, 2, 1)

    @property
    def n(self):
        return self.P_X.shape[0]

    @property
    def p(self):
        return self.P_X.shape[1]

    @property
    def q(self):
        return self.P_Y.shape[1]

    def joint(self):
        """Stacked ``(n, p+q, p+q)`` spectral matrices of ``(X | Y)``."""
        top = np.concatenate([self.P_X, self.P_XY], axis=2)
        bottom = np.concatenate([self.P_YX, self.P_Y], axis=2)
        return np.concatenate([top, bottom], axis=1)

    @classmethod
    def from_joint(cls, frequencies, joint, p):
        joint = np.asarray(joint)
        return cls(frequencies, joint[:, :p, :p], joint[:, p:, p:], joint[:, :p, p:])


def cross_periodogram(x, y, b):
    """Graph cross-periodogram ``(v_l^H x)(v_l^H y)^*`` for every frequency."""
    x, y = np.asarray(x), np.asarray(y)
    if x.shape != (b.n,) or y.shape != (b.n,):
        raise DimensionMismatch("signals must be vectors of length n")
    cx = gft(x, b)
    if x is y or np.array_equal(x, y):
        return np.abs(cx) ** 2 + 0j
    return cx * np.conj(gft(y, b))


def realization_average_csd(xi, xj, b, cfg=EstimatorConfig()):
    """Average cross-periodogram over realizations (columns of ``(n, M)`` inputs).

    With ``cfg.center`` the per-node sample mean is removed first and the
    average is rescaled by ``M / (M - 1)``.
    """
    xi, xj = np.asarray(xi), np.asarray(xj)
    if xi.ndim == 1:
        xi, xj = xi[:, None], xj[:, None]
    if xi.shape != xj.shape or xi.shape[0] != b.n:
        raise DimensionMismatch("realization tables must both be (n, M)")
    m = xi.shape[1]
    if cfg.center:
        if m < 2:
            raise TooFewRealizations("centering needs at least 2 realizations")
        xi = xi - xi.mean(axis=1, keepdims=True)
        xj = xj - xj.mean(axis=1, keepdims=True)
        denom = m - 1
    else:
        denom = m
    ci, cj = gft(xi, b), gft(xj, b)
    return np.sum(ci * np.conj(cj), axis=1) / denom


def window_rng(seed, index):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


def random_windows(n, cfg):
    """``(window_count, n)`` Rademacher masks; the first is all ones.

    Window ``m`` draws from its own stream keyed by ``(seed, m)``.
    """
    w = np.ones((cfg.window_count, n))
    for m in range(1, cfg.window_count):
        w[m] = 2.0 * window_rng(cfg.seed, m).integers(0, 2, size=n) - 1.0
    return w


def windowed_average_csd(x, y, b, cfg=EstimatorConfig(mode="random-window")):
    """Random-window average of graph cross-periodograms of one realization."""
    x, y = np.asarray(x), np.asarray(y)
    if x.shape != (b.n,) or y.shape != (b.n,):
        raise DimensionMismatch("signals must be vectors of length n")
    w = random_windows(b.n, cfg).T
    cx, cy = gft(w * x[:, None], b), gft(w * y[:, None], b)
    return np.mean(cx * np.conj(cy), axis=1)


def psd_project(m):
    """Nearest Hermitian PSD matrix: Hermitian part with negative eigenvalues clipped."""
    h = hermitian_part(np.asarray(m))
    w, u = np.linalg.eigh(h)
    if np.all(w >= 0):
        return h
    return (u * np.clip(w, 0, None)) @ u.conj().T


def _ridge(p, delta, min_eigs=None):
    """Add ``delta * tr(P) / dim`` to the diagonals of near-singular matrices."""
    if delta == 0:
        return p
    dim = p.shape[1]
    traces = np.real(np.trace(p, axis1=1, axis2=2))
    fallback = float(np.mean(traces)) / dim
    if min_eigs is None:
        min_eigs = np.linalg.eigvalsh(p)[:, 0]
    out = p.copy()
    for ell in range(p.shape[0]):
        scale = traces[ell] / dim if traces[ell] > 0 else fallback
        if scale <= 0:
            raise SingularSpectralMatrix(f"zero spectral matrix at frequency index {ell}", ell)
        if min_eigs[ell] < delta * scale:
            out[ell] = p[ell] + delta * scale * np.eye(dim)
    return out


def _joint_spectrum(z, b, cfg):
    """Raw ``(n, d, d)`` spectral matrices of a joint ``(n, d, M)`` signal."""
    m = z.shape[2]
    centered = cfg.center and m >= 2
    if cfg.center and m < 2:
        if cfg.mode == "realization-average":
            raise TooFewRealizations("realization averaging with centering needs M >= 2")
        logger.warning("single realization: no mean estimate available, proceeding uncentered")
    if centered:
        z = z - z.mean(axis=2, keepdims=True)
    denom = (m - 1) if centered else m

    if cfg.mode == "realization-average":
        c = gft(z, b)
        return c @ c.conj().transpose(0, 2, 1) / denom

    windows = random_windows(b.n, cfg)
    # every (realization, window) product becomes one column of a batched Gram
    masked = z[:, :, :, None] * windows.T[:, None, None, :]
    c = gft(masked, b).reshape(b.n, z.shape[1], -1)
    return c @ c.conj().transpose(0, 2, 1) / (denom * len(windows))


def spectral_matrix_field(x, y, b, cfg=EstimatorConfig()):
    """Estimate the spectral matrix field of ``(X, Y)``.

    ``P_X`` and ``P_Y`` are projected onto the PSD cone and ridged where
    nearly singular; ``P_XY`` is the raw estimate.
    """
    x, y = check_pair(x, y, b.n)
    p = x.shape[1]
    joint = _joint_spectrum(np.concatenate([x, y], axis=1), b, cfg)
    px, ex = _project_stack(joint[:, :p, :p])
    py, ey = _project_stack(joint[:, p:, p:])
    px, py = _ridge(px, cfg.ridge, ex), _ridge(py, cfg.ridge, ey)
    return SpectralMatrixField(b.eigenvalues.copy(), px, py, joint[:, :p, p:].copy())
def _project_stack(stack):
    """Batched :func:`psd_project`; also returns the clipped smallest eigenvalues."""
    h = hermitian_part(stack)
    w, u = np.linalg.eigh(h)
    out = h.copy()
    neg = np.any(w < 0, axis=1)
    if np.any(neg):
        wc = np.clip(w[neg], 0, None)
        out[neg] = (u[neg] * wc[:, None, :]) @ u[neg].conj().transpose(0, 2, 1)
    return out, np.clip(w[:, 0], 0, None)


def stationarity_diagnostic(x, b):
    """Off-diagonal energy share of ``V^H Sigma_ij V`` for every channel pair.

    Returns a ``(p, p)`` array in ``[0, 1]``; values near zero indicate that
    the sample cross-covariances are diagonalized by the graph basis.
    Pairs whose sample cross-covariance vanishes entirely get ``nan``.
    """
    x = check_signal(x, b.n)
    m = x.shape[2]
    if m < 2:
        raise TooFewRealizations("the stationarity diagnostic needs at least 2 realizations")
    xc = x - x.mean(axis=2, keepdims=True)
    c = gft(xc, b)  # (n, p, M)
    p = x.shape[1]
    out = np.empty((p, p))
    for i in range(p):
        for j in range(p):
            s = c[:, i, :] @ c[:, j, :].conj().T / (m - 1)
            total = np.sum(np.abs(s) ** 2)
            diag = np.sum(np.abs(np.diag(s)) ** 2)
            out[i, j] = (total - diag) / total if total > 0 else np.nan
    return out
