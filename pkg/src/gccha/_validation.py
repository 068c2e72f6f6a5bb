"""Input validation helpers for graph signals and ranks."""

import numpy as np

from .exceptions import DimensionMismatch, RankTooLarge, ValidationError


def check_signal(x, n=None, name="X", min_realizations=1):
    """Return ``x`` as a finite ``(n, d, M)`` array.

    Accepts ``(n,)``, ``(n, d)`` or ``(n, d, M)`` input. Integer and bool
    data are promoted to float.
    """
    x = np.asarray(x)
    if x.dtype == object:
        raise ValidationError(f"{name} must be numeric")
    if not (np.issubdtype(x.dtype, np.floating) or np.iscomplexobj(x)):
        x = x.astype(float)
    if x.ndim == 1:
        x = x[:, None, None]
    elif x.ndim == 2:
        x = x[:, :, None]
    elif x.ndim != 3:
        raise DimensionMismatch(f"{name} must have 1 to 3 dimensions, got {x.ndim}")
    if 0 in x.shape:
        raise DimensionMismatch(f"{name} has an empty axis: shape {x.shape}")
    if n is not None and x.shape[0] != n:
        raise DimensionMismatch(f"{name} has {x.shape[0]} nodes, expected {n}")
    if x.shape[2] < min_realizations:
        raise ValidationError(f"{name} needs at least {min_realizations} realizations")
    if not np.all(np.isfinite(x)):
        raise ValidationError(f"{name} contains non-finite values")
    return x


def check_pair(x, y, n=None):
    x = check_signal(x, n, "X")
    y = check_signal(y, n, "Y")
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatch("X and Y live on different node sets")
    if x.shape[2] != y.shape[2]:
        raise DimensionMismatch("X and Y have different realization counts")
    return x, y


def check_rank(r, p, q):
    cap = min(p, q)
    if r is None:
        return cap
    r = int(r)
    if r < 1:
        raise ValidationError("rank must be at least 1")
    if r > cap:
        raise RankTooLarge(f"rank {r} exceeds min(p, q) = {cap}")
    return r
