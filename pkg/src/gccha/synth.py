"""Synthetic stationary graph processes and independent verification oracles.

:func:`synthesize_stationary` draws Gaussian graph Fourier coefficients with a
prescribed joint spectral matrix at every frequency and transforms them back
to the vertex domain, so the population cross-covariances are exactly
``V diag(p_ij) V^H``. :func:`cca_oracle` solves the canonical problem through
a general (non-Hermitian) eigensolver, sharing no factorization with
:func:`gccha.core.solve_frequency`.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._linalg import hermitian_part
from ._validation import check_signal
from .exceptions import (
    DimensionMismatch,
    InvalidField,
    MeanNotProportionalToBasisVector,
    SingularInput,
    ValidationError,
)
from .spectral import SpectralMatrixField

BLOCK_SIZE = 1024


@dataclass(frozen=True)
class SynthesisSpec:
    """Recipe for a weakly stationary ``(X | Y)`` process.

    ``joint_field`` is ``(n, p+q, p+q)``; the first ``p`` channels form X.
    ``means``, if given, is ``(n, p+q)`` with every column parallel to some
    basis vector.
    """

    basis: object
    joint_field: np.ndarray
    p: int
    realizations: int
    seed: int = 0
    means: np.ndarray = None

    def __post_init__(self):
        jf = np.asarray(self.joint_field)
        n = self.basis.n
        if jf.ndim != 3 or jf.shape[0] != n or jf.shape[1] != jf.shape[2]:
            raise DimensionMismatch(f"joint field must be (n, d, d) with n={n}, got {jf.shape}")
        if not 1 <= self.p < jf.shape[1]:
            raise ValidationError("p must split the joint dimension into two nonempty sets")
        if int(self.realizations) < 1:
            raise ValidationError("realizations must be positive")
        for ell, m in enumerate(jf):
            scale = max(float(np.max(np.abs(m))), 1.0)
            if not np.allclose(m, m.conj().T, rtol=0, atol=1e-10 * scale):
                raise InvalidField(f"joint matrix at frequency index {ell} is not Hermitian")
            if np.linalg.eigvalsh(hermitian_part(m))[0] < -1e-10 * scale:
                raise InvalidField(f"joint matrix at frequency index {ell} is not PSD")
        object.__setattr__(self, "joint_field", jf)
        if self.means is not None:
            mu = np.asarray(self.means)
            if mu.shape != (n, jf.shape[1]):
                raise DimensionMismatch(f"means must be (n, p+q) = {(n, jf.shape[1])}")
            coef = np.abs(self.basis.eigenvectors.conj().T @ mu)
            norms = np.linalg.norm(mu, axis=0)
            bad = np.abs(coef.max(axis=0) - norms) > 1e-10 * np.maximum(norms, 1.0)
            if np.any(bad):
                raise MeanNotProportionalToBasisVector(
                    f"mean columns {np.flatnonzero(bad).tolist()} are not parallel to a basis vector"
                )
            object.__setattr__(self, "means", mu)

    @property
    def q(self):
        return self.joint_field.shape[1] - self.p

    def field(self):
        return SpectralMatrixField.from_joint(self.basis.eigenvalues, self.joint_field, self.p)


def _block_rng(seed, block):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(block),)))


def synthesize_stationary(spec):
    """Draw ``spec.realizations`` realizations; returns ``X (n, p, M)``, ``Y (n, q, M)``.

    Realizations are generated in fixed blocks of ``BLOCK_SIZE``, each from
    its own stream keyed by ``(seed, block index)``, so the first ``M``
    realizations do not depend on how many are requested. Output is real when the
    basis and the field are real.
    """
    b = spec.basis
    jf = spec.joint_field
    n, d = jf.shape[0], jf.shape[1]
    w, u = np.linalg.eigh(hermitian_part(jf))
    factor = u * np.sqrt(np.clip(w, 0, None))[:, None, :]  # factor @ factor^H = jf
    real = b.is_real and not np.iscomplexobj(jf)
    m_total = int(spec.realizations)
    v = b.eigenvectors

    out = np.empty((n, d, m_total), dtype=float if real else complex)
    for blk, start in enumerate(range(0, m_total, BLOCK_SIZE)):
        m = min(BLOCK_SIZE, m_total - start)
        rng = _block_rng(spec.seed, blk)
        # realization-major draws: a shorter run is a prefix of a longer one
        if real:
            xi = rng.standard_normal((m, n, d)).transpose(1, 2, 0)
        else:
            g = rng.standard_normal((m, 2, n, d))
            xi = ((g[:, 0] + 1j * g[:, 1]) / np.sqrt(2)).transpose(1, 2, 0)
        coeffs = factor @ xi
        out[:, :, start:start + m] = (v @ coeffs.reshape(n, -1)).reshape(n, d, m)
    if spec.means is not None:
        out = out + spec.means[:, :, None]
    return out[:, : spec.p, :], out[:, spec.p:, :]


def random_joint_field(n, p, q, seed=0, complex_valued=True, condition=30.0):
    """Random Hermitian positive-definite joint spectral matrices ``(n, p+q, p+q)``."""
    rng = np.random.default_rng(seed)
    d = p + q
    out = []
    for _ in range(n):
        a = rng.standard_normal((d, d))
        if complex_valued:
            a = a + 1j * rng.standard_normal((d, d))
        qmat, _ = np.linalg.qr(a)
        eig = np.exp(rng.uniform(0, np.log(condition), size=d)) * rng.uniform(0.5, 2.0)
        m = (qmat * eig) @ qmat.conj().T
        out.append(hermitian_part(m))
    return np.stack(out)


def _check_pd(m, name):
    try:
        np.linalg.cholesky(hermitian_part(m))
    except np.linalg.LinAlgError as exc:
        raise SingularInput(f"{name} is not positive definite") from exc


def cca_oracle(px, py, pxy):
    """Brute-force canonical coherences via a non-Hermitian eigenproblem.

    Returns ``(gamma, h, f)`` with ``min(p, q)`` entries, ``gamma``
    descending and ``h_i^H P_X h_i = f_i^H P_Y f_i = 1``.
    """
    px, py, pxy = (np.asarray(a) for a in (px, py, pxy))
    _check_pd(px, "P_X")
    _check_pd(py, "P_Y")
    pyx = pxy.conj().T
    prod = np.linalg.solve(px, pxy @ np.linalg.solve(py, pyx))
    vals, vecs = scipy.linalg.eig(prod)
    order = np.argsort(-vals.real, kind="stable")
    k = min(px.shape[0], py.shape[0])
    gammas, hs, fs = [], [], []
    for j in order[:k]:
        h = vecs[:, j]
        h = h / np.sqrt(np.real(np.vdot(h, px @ h)))
        f = np.linalg.solve(py, pyx @ h)
        nf = np.real(np.vdot(f, py @ f))
        f = f / np.sqrt(nf) if nf > 0 else f
        gammas.append(max(vals[j].real, 0.0))
        hs.append(h)
        fs.append(f)
    return np.array(gammas), hs, fs


def empirical_mse(pred, x, y):
    """Monte Carlo mean of ``sum_i ||Y_i - mu_i - sum_j A_ij X_j||^2`` over realizations."""
    b = pred.basis
    if b is None:
        raise ValidationError("predictor carries no spectral basis")
    x = check_signal(x, b.n, "X")
    y = check_signal(y, b.n, "Y")
    if x.shape[2] != y.shape[2] or x.shape[1] != pred.A_bank.n_in or y.shape[1] != pred.A_bank.n_out:
        raise DimensionMismatch("realizations do not match the predictor dimensions")
    total = 0.0
    for start in range(0, x.shape[2], BLOCK_SIZE):
        sl = slice(start, start + BLOCK_SIZE)
        resid = y[:, :, sl] - pred.predict(x[:, :, sl])
        total += float(np.sum(np.abs(resid) ** 2))
    return total / x.shape[2]
