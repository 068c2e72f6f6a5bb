"""Canonical loadings, cross-loadings, communality and adequacy.

All quantities are graph coherences computed analytically from the
canonical filters and the spectral field, e.g. the loading of ``Z_i`` on
``X_j`` at frequency ``l`` is ``|(H P_X)_ij|^2 / ((H P_X H^H)_ii (P_X)_jj)``.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatch

SALIENCE_THRESHOLD = 0.2


def _coherence(cross, auto_rows, auto_cols):
    """``|cross_ij|^2 / (auto_rows_i auto_cols_j)`` for ``(n, r, d)`` stacks -> ``(r, d, n)``."""
    denom = auto_rows[:, :, None] * auto_cols[:, None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.where(denom > 0, np.abs(cross) ** 2 / denom, 0.0)
    return c.transpose(1, 2, 0)


def _signed(cross, coherence):
    return np.sign(np.real(cross)).transpose(1, 2, 0) * np.sqrt(coherence)


def _diag_real(m):
    return np.real(np.diagonal(m, axis1=1, axis2=2))


@dataclass(frozen=True)
class LoadingsReport:
    """Loading tables indexed ``[component, channel, frequency]``.

    ``*_signed`` variants carry the sign of the real part of the cross
    spectrum on the square root of the coherence.
    """

    loadings_ZX: np.ndarray
    loadings_WY: np.ndarray
    cross_loadings_ZY: np.ndarray
    cross_loadings_WX: np.ndarray
    signed_ZX: np.ndarray
    signed_WY: np.ndarray
    signed_ZY: np.ndarray
    signed_WX: np.ndarray
    frequencies: np.ndarray

    @property
    def communality_X(self):
        return communality(self)[0]

    @property
    def communality_Y(self):
        return communality(self)[1]

    @property
    def adequacy_Z(self):
        return adequacy(self)[0]

    @property
    def adequacy_W(self):
        return adequacy(self)[1]

    @property
    def cumulative_Z(self):
        return adequacy(self)[2]

    @property
    def cumulative_W(self):
        return adequacy(self)[3]


def loadings(sol, field):
    """Loadings and cross-loadings of a canonical solution on its field."""
    h = sol.H_bank.responses  # (n, r, p)
    f = sol.F_bank.responses  # (n, r, q)
    if h.shape[0] != field.n or h.shape[2] != field.p or f.shape[2] != field.q:
        raise DimensionMismatch("solution and field disagree on (n, p, q)")
    ph = lambda a, m, b: a @ m @ b.conj().transpose(0, 2, 1)  # noqa: E731
    pz = _diag_real(ph(h, field.P_X, h))
    pw = _diag_real(ph(f, field.P_Y, f))
    px = _diag_real(field.P_X)
    py = _diag_real(field.P_Y)

    zx = h @ field.P_X
    wy = f @ field.P_Y
    zy = h @ field.P_XY
    wx = f @ field.P_YX
    c_zx = _coherence(zx, pz, px)
    c_wy = _coherence(wy, pw, py)
    c_zy = _coherence(zy, pz, py)
    c_wx = _coherence(wx, pw, px)
    return LoadingsReport(
        c_zx, c_wy, c_zy, c_wx,
        _signed(zx, c_zx), _signed(wy, c_wy), _signed(zy, c_zy), _signed(wx, c_wx),
        np.asarray(field.frequencies),
    )


def communality(rep):
    """Per-channel sums of loadings over components: ``(p, n)`` and ``(q, n)``."""
    return rep.loadings_ZX.sum(axis=0), rep.loadings_WY.sum(axis=0)


def adequacy(rep):
    """Per-component mean loadings and their cumulative sums, each ``(r, n)``.

    Returns ``(adequacy_Z, adequacy_W, cumulative_Z, cumulative_W)``.
    """
    adq_z = rep.loadings_ZX.mean(axis=1)
    adq_w = rep.loadings_WY.mean(axis=1)
    return adq_z, adq_w, np.cumsum(adq_z, axis=0), np.cumsum(adq_w, axis=0)


def salient_loadings(rep, threshold=SALIENCE_THRESHOLD):
    """Records of signed loadings whose magnitude exceeds ``threshold``."""
    out = []
    for quantity, table in (("loading_ZX", rep.signed_ZX), ("loading_WY", rep.signed_WY)):
        comp, chan, freq = np.nonzero(np.abs(table) > threshold)
        for i, j, ell in zip(comp, chan, freq):
            out.append({
                "quantity": quantity,
                "component": int(i) + 1,
                "channel": int(j) + 1,
                "frequency_index": int(ell),
                "value": float(table[i, j, ell]),
            })
    return out


def long_table(rep):
    """Rows ``(component, channel, frequency_index, lambda, quantity, value)``.

    Components and channels are 1-based; summaries that are not indexed by
    one of them use 0 in that column.
    """
    rows = []
    lam = rep.frequencies
    tables = [
        ("loading_ZX", rep.loadings_ZX), ("loading_WY", rep.loadings_WY),
        ("cross_loading_ZY", rep.cross_loadings_ZY), ("cross_loading_WX", rep.cross_loadings_WX),
        ("signed_loading_ZX", rep.signed_ZX), ("signed_loading_WY", rep.signed_WY),
    ]
    for name, t in tables:
        for i, j, ell in np.ndindex(t.shape):
            rows.append((i + 1, j + 1, ell, lam[ell], name, t[i, j, ell]))
    comm_x, comm_y = communality(rep)
    for name, t in (("communality_X", comm_x), ("communality_Y", comm_y)):
        for j, ell in np.ndindex(t.shape):
            rows.append((0, j + 1, ell, lam[ell], name, t[j, ell]))
    for name, t in zip(("adequacy_Z", "adequacy_W", "cumulative_Z", "cumulative_W"), adequacy(rep)):
        for i, ell in np.ndindex(t.shape):
            rows.append((i + 1, 0, ell, lam[ell], name, t[i, ell]))
    return rows
