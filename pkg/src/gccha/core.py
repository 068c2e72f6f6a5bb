"""Per-frequency canonical coherence solves and canonical graph signals.

At each graph frequency the coherence-maximization problem is solved in
its whitened Hermitian form: with ``K = P_Y^{-1/2} P_YX P_X^{-1} P_XY
P_Y^{-1/2}`` the canonical coherences are the eigenvalues of ``K`` and the
canonical filters are mapped back from its eigenvectors.

Filter vectors ``h_i`` (length ``p``) and ``f_i`` (length ``q``) relate to
filter-bank responses by ``H(lambda)[i, :] = h_i^H``, so that the spectral
coefficient of ``Z_i`` is ``h_i^H x_hat``.
"""

from dataclasses import dataclass

import numpy as np

from ._linalg import eigh_desc, hermitian_part, inv_and_inv_sqrt, sqrt_psd
from ._validation import check_pair, check_rank, check_signal
from .exceptions import DimensionMismatch, ValidationError
from .graph import FilterBank, apply_filter_bank

_ZERO_COHERENCE = 1e-13


@dataclass(frozen=True)
class FrequencySolution:
    frequency: complex
    coherences: np.ndarray  # (r,), nonincreasing
    h_vectors: np.ndarray  # (p, r)
    f_vectors: np.ndarray  # (q, r)
    tau: np.ndarray  # (q,) eigenvalues of P_YX P_X^{-1} P_XY, nonincreasing


def _check_blocks(px, py, pxy):
    px, py, pxy = np.asarray(px), np.asarray(py), np.asarray(pxy)
    p, q = px.shape[0], py.shape[0]
    if px.shape != (p, p) or py.shape != (q, q) or pxy.shape != (p, q):
        raise DimensionMismatch(f"incompatible spectral blocks {px.shape}, {py.shape}, {pxy.shape}")
    return px, py, pxy


def _normalize(vec, gram):
    s = float(np.real(np.vdot(vec, gram @ vec)))
    return vec / np.sqrt(s), s


def solve_frequency(px, py, pxy, r=None, ridge=1e-8, frequency=0.0, frequency_index=None):
    """Canonical coherences and filter vectors at one graph frequency.

    Parameters
    ----------
    px, py, pxy : ndarray
        Spectral matrices ``P_X (p, p)``, ``P_Y (q, q)``, ``P_XY (p, q)``.
    r : int, optional
        Number of canonical pairs, at most ``min(p, q)`` (default).
    ridge : float
        Relative eigenvalue floor used when inverting ``P_X`` and ``P_Y``.

    Returns
    -------
    FrequencySolution
        ``h_i^H P_X h_i = f_i^H P_Y f_i = 1`` and ``h_i^H P_XY f_i`` is real
        nonnegative, equal to the square root of the ``i``-th coherence.
    """
    px, py, pxy = _check_blocks(px, py, pxy)
    p, q = px.shape[0], py.shape[0]
    r = check_rank(r, p, q)
    px_inv, wx = inv_and_inv_sqrt(px, ridge, frequency_index)
    _, wy = inv_and_inv_sqrt(py, ridge, frequency_index)
    pyx = pxy.conj().T

    tau = np.sort(np.linalg.eigvalsh(hermitian_part(pyx @ px_inv @ pxy)))[::-1]
    # K = C^H C with C = P_X^{-1/2} P_XY P_Y^{-1/2}: PSD by construction
    c = wx @ pxy @ wy
    gamma, eta = eigh_desc(c.conj().T @ c, k=r)
    gamma = np.clip(gamma, 0.0, None)

    dtype = np.result_type(px, py, pxy, float)
    h = np.zeros((p, r), dtype=dtype)
    f = np.zeros((q, r), dtype=dtype)
    d = None
    for i in range(r):
        f[:, i], _ = _normalize(wy @ eta[:, i], py)
        hv = px_inv @ pxy @ f[:, i]
        hs = float(np.real(np.vdot(hv, px @ hv)))
        if hs > _ZERO_COHERENCE * max(gamma[0], 1.0):
            h[:, i] = hv / np.sqrt(hs)
        else:
            # zero coherence: any whitened direction orthogonal to earlier ones
            if d is None:
                _, d = eigh_desc(wx @ pxy @ np.linalg.solve(py, pyx) @ wx, k=r)
            h[:, i], _ = _normalize(wx @ d[:, i], px)
    return FrequencySolution(frequency, gamma[:r], h, f, tau)


def solve_constrained(px, py, pxy, r=None, ridge=1e-8, frequency_index=None):
    """Whitening-constrained least-squares pair ``(H, F)`` at one frequency.

    ``H = D^H P_X^{-1/2}`` and ``F = E^H P_Y^{-1/2}`` where the columns of
    ``D`` and ``E`` are the leading orthonormal eigenvectors of the two
    whitened cross products. Both satisfy ``H P_X H^H = F P_Y F^H = I_r``.
    """
    px, py, pxy = _check_blocks(px, py, pxy)
    r = check_rank(r, px.shape[0], py.shape[0])
    px_inv, wx = inv_and_inv_sqrt(px, ridge, frequency_index)
    py_inv, wy = inv_and_inv_sqrt(py, ridge, frequency_index)
    pyx = pxy.conj().T
    _, d = eigh_desc(wx @ pxy @ py_inv @ pyx @ wx, k=r)
    _, e = eigh_desc(wy @ pyx @ px_inv @ pxy @ wy, k=r)
    return d[:, :r].conj().T @ wx, e[:, :r].conj().T @ wy


@dataclass(frozen=True)
class CanonicalSolution:
    """Output of a full canonical coherence analysis.

    Attributes
    ----------
    H_bank, F_bank : FilterBank
        ``(n, r, p)`` and ``(n, r, q)`` canonical filter responses.
    Z, W : ndarray
        Canonical graph signals ``(n, r[, M])``.
    coherence_curves : ndarray (r, n)
    mu : ndarray (n, r)
        Offsets ``F mu_Y - H mu_X`` (zero when means are unavailable).
    tau : ndarray (n, q)
    frequencies : ndarray (n,)
    """

    H_bank: FilterBank
    F_bank: FilterBank
    Z: np.ndarray
    W: np.ndarray
    coherence_curves: np.ndarray
    mu: np.ndarray
    tau: np.ndarray
    frequencies: np.ndarray

    @property
    def rank(self):
        return self.H_bank.n_out


def align_phases(vectors, partners):
    """Rotate ``vectors[l][:, i]`` (and ``partners`` alike) for continuity in ``l``.

    Each column is multiplied by the unit scalar maximizing the real part
    of its inner product with the same column at the previous frequency.
    Arrays are ``(n, dim, r)`` and modified in place.
    """
    for ell in range(1, vectors.shape[0]):
        s = np.einsum("ki,ki->i", vectors[ell - 1].conj(), vectors[ell])
        mag = np.abs(s)
        rot = np.ones_like(s)
        nz = mag > 0
        rot[nz] = np.conj(s[nz]) / mag[nz]
        vectors[ell] *= rot
        partners[ell] *= rot
    return vectors, partners


def solve_field(field, r=None, ridge=1e-8):
    """Solve every frequency of a field; returns ``(h, f, gamma, tau)`` stacks."""
    r = check_rank(r, field.p, field.q)
    sols = [
        solve_frequency(
            field.P_X[ell], field.P_Y[ell], field.P_XY[ell], r, ridge,
            frequency=field.frequencies[ell], frequency_index=ell,
        )
        for ell in range(field.n)
    ]
    h = np.stack([s.h_vectors for s in sols])
    f = np.stack([s.f_vectors for s in sols])
    align_phases(h, f)
    gamma = np.stack([s.coherences for s in sols], axis=1)
    tau = np.stack([s.tau for s in sols])
    return h, f, gamma, tau


def run_gccha(x, y, b, field, r=None, ridge=1e-8):
    """Canonical graph signals of ``X`` and ``Y`` from an estimated field.

    ``r`` defaults to ``min(p, q)``. With at least two realizations the
    sample means give the offsets ``mu``; otherwise ``mu`` is zero.
    """
    x, y = check_pair(x, y, b.n)
    if (x.shape[1], y.shape[1], b.n) != (field.p, field.q, field.n):
        raise DimensionMismatch("signals and spectral field disagree on (p, q, n)")
    h, f, gamma, tau = solve_field(field, r, ridge)
    h_bank = FilterBank(h.conj().transpose(0, 2, 1))
    f_bank = FilterBank(f.conj().transpose(0, 2, 1))
    z = apply_filter_bank(h_bank, x, b)
    w = apply_filter_bank(f_bank, y, b)
    if x.shape[2] >= 2:
        mu = apply_filter_bank(f_bank, y.mean(axis=2), b) - apply_filter_bank(h_bank, x.mean(axis=2), b)
    else:
        mu = np.zeros((b.n, h_bank.n_out))
    return CanonicalSolution(h_bank, f_bank, z, w, gamma, mu, tau, np.asarray(field.frequencies))


@dataclass(frozen=True)
class ReducedRankPredictor:
    """Rank-constrained filter-bank predictor ``Y ~ mu + A X``.

    ``min_mse`` is the minimum of the criterion that was optimized: the
    plain mean squared error, or its spectrally whitened version when
    ``weighted`` is set.
    """

    A_bank: FilterBank
    G_bank: FilterBank
    H_bank: FilterBank
    mu: np.ndarray
    min_mse: float
    weighted: bool
    tau: np.ndarray
    basis: object = None

    @property
    def rank(self):
        return self.H_bank.n_out

    def predict(self, x, basis=None):
        b = basis if basis is not None else self.basis
        x = check_signal(x, b.n)
        out = apply_filter_bank(self.A_bank, x, b)
        return out + self.mu[:, :, None]


def reduced_rank_predictor(field, means_x=None, means_y=None, r=None, weighted=False,
                           basis=None, ridge=1e-8):
    """Minimum mean-squared-error predictor of ``Y`` through ``r`` filtered channels.

    Unweighted: per frequency the leading eigenvectors ``u_i`` of
    ``P_YX P_X^{-1} P_XY`` give ``G = (u_1 | ... | u_r)``,
    ``H = G^H P_YX P_X^{-1}`` and ``A = G H``. Weighted: the same on
    ``P_Y^{-1/2} P_YX P_X^{-1} P_XY P_Y^{-1/2}`` with ``G = P_Y^{1/2} U``.
    ``means_x (n, p)`` and ``means_y (n, q)`` default to zero; nonzero
    ``means_x`` needs ``basis``.
    """
    p, q, n = field.p, field.q, field.n
    r = check_rank(r, p, q)
    dtype = np.result_type(field.P_X, field.P_Y, field.P_XY, float)
    g_stack = np.zeros((n, q, r), dtype=dtype)
    h_stack = np.zeros((n, r, p), dtype=dtype)
    tau = np.zeros((n, q))
    crit = 0.0
    for ell in range(n):
        px, py, pxy = field.P_X[ell], field.P_Y[ell], field.P_XY[ell]
        pyx = pxy.conj().T
        px_inv, _ = inv_and_inv_sqrt(px, ridge, ell)
        t = hermitian_part(pyx @ px_inv @ pxy)
        if weighted:
            _, wy = inv_and_inv_sqrt(py, ridge, ell)
            vals, u = eigh_desc(wy @ t @ wy)
            g = sqrt_psd(py) @ u[:, :r]
            h = u[:, :r].conj().T @ wy @ pyx @ px_inv
            crit += q - float(np.sum(vals[:r]))
            tau[ell] = np.sort(np.linalg.eigvalsh(t))[::-1]
        else:
            vals, u = eigh_desc(t)
            g = u[:, :r]
            h = g.conj().T @ pyx @ px_inv
            crit += float(np.real(np.trace(py) - np.trace(t))) + float(np.sum(vals[r:]))
            tau[ell] = vals
        g_stack[ell], h_stack[ell] = g, h

    g_bank, h_bank = FilterBank(g_stack), FilterBank(h_stack)
    a_bank = g_bank.compose(h_bank)
    mu = np.zeros((n, q), dtype=dtype) if means_y is None else np.asarray(means_y).reshape(n, q)
    if means_x is not None:
        if basis is None:
            raise ValidationError("basis is required to filter nonzero X means")
        mu = mu - apply_filter_bank(a_bank, np.asarray(means_x).reshape(n, p), basis)
    return ReducedRankPredictor(a_bank, g_bank, h_bank, mu, max(crit, 0.0), bool(weighted), tau, basis)

