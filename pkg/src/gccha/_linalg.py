"""Small dense linear-algebra helpers shared across modules."""

import numpy as np

from .exceptions import SingularSpectralMatrix

_LEX_DECIMALS = 10


def hermitian_part(m):
    m = np.asarray(m)
    return 0.5 * (m + m.conj().swapaxes(-1, -2))


def fix_phase(vectors, rtol=1e-12):
    """Rotate each column so its largest-magnitude entry is real and positive.

    Near-ties in magnitude (within ``rtol``) go to the lowest node index.
    Real input stays real (the rotation is then a sign flip).
    """
    v = np.array(vectors, copy=True)
    if v.ndim == 1:
        return fix_phase(v[:, None], rtol)[:, 0]
    mags = np.abs(v)
    peak = mags.max(axis=0)
    for k in range(v.shape[1]):
        if peak[k] == 0:
            continue
        idx = int(np.flatnonzero(mags[:, k] >= peak[k] * (1 - rtol))[0])
        a = v[idx, k]
        v[:, k] *= np.conj(a) / abs(a)
    return v


def _lex_key(column):
    re = np.round(column.real, _LEX_DECIMALS) + 0.0
    im = np.round(np.imag(column), _LEX_DECIMALS) + 0.0
    return tuple(np.column_stack([re, im]).ravel())


def order_clusters(keys, vectors, tol, descending=False):
    """Permutation sorting by ``keys`` with clusters ordered lexicographically.

    Keys closer than ``tol`` to their neighbour form a cluster; inside a
    cluster columns of ``vectors`` are sorted by their entries.
    """
    keys = np.asarray(keys, dtype=float)
    signed = -keys if descending else keys
    perm = np.argsort(signed, kind="stable")
    out = []
    start = 0
    for stop in range(1, len(perm) + 1):
        if stop == len(perm) or abs(keys[perm[stop]] - keys[perm[stop - 1]]) >= tol:
            block = list(perm[start:stop])
            if len(block) > 1:
                block.sort(key=lambda j: _lex_key(vectors[:, j]))
            out.extend(block)
            start = stop
    return np.asarray(out, dtype=int)


def eigh_desc(m, tol=1e-12, k=None):
    """Hermitian eigendecomposition, eigenvalues descending, deterministic vectors.

    With ``k`` only the leading eigenpairs are returned: the first ``k``
    plus the rest of any eigenvalue cluster straddling position ``k``, so
    the leading columns match those of the full call.
    """
    w, v = np.linalg.eigh(hermitian_part(m))
    scale = max(float(np.max(np.abs(w))) if w.size else 0.0, 1.0)
    if k is not None and k < w.size:
        desc = np.argsort(-w, kind="stable")
        stop = k
        while stop < w.size and abs(w[desc[stop - 1]] - w[desc[stop]]) < tol * scale:
            stop += 1
        w, v = w[desc[:stop]], v[:, desc[:stop]]
    v = fix_phase(v)
    perm = order_clusters(w, v, tol * scale, descending=True)
    return w[perm], v[:, perm]


def floored_eigh(p, delta, frequency_index=None):
    """Eigenpairs of a Hermitian PSD matrix with eigenvalues floored at ``delta*tr/dim``."""
    w, u = np.linalg.eigh(hermitian_part(p))
    dim = w.shape[0]
    floor = delta * max(float(np.sum(w)), 0.0) / dim
    if not np.all(np.isfinite(w)) or np.max(w) <= 0:
        raise SingularSpectralMatrix(
            f"spectral matrix is not positive definite at frequency index {frequency_index}",
            frequency_index,
        )
    w = np.maximum(w, floor)
    if np.min(w) <= 0:
        raise SingularSpectralMatrix(
            f"spectral matrix is singular at frequency index {frequency_index}",
            frequency_index,
        )
    return w, u


def inv_sqrt(p, delta=1e-8, frequency_index=None):
    w, u = floored_eigh(p, delta, frequency_index)
    return (u / np.sqrt(w)) @ u.conj().T


def sqrt_psd(p):
    w, u = np.linalg.eigh(hermitian_part(p))
    return (u * np.sqrt(np.clip(w, 0, None))) @ u.conj().T


def inv_and_inv_sqrt(p, delta=1e-8, frequency_index=None):
    w, u = floored_eigh(p, delta, frequency_index)
    uh = u.conj().T
    return (u / w) @ uh, (u / np.sqrt(w)) @ uh


def as_real_if_possible(a):
    """Drop a zero imaginary part exactly; keep complex otherwise."""
    a = np.asarray(a)
    if np.iscomplexobj(a) and not np.any(a.imag):
        return a.real.copy()
    return a
