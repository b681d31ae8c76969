"""Subspace and signal recovery error measures."""

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidDimensionError

__all__ = [
    "ErrorReport",
    "subspace_error",
    "phase_invariant_dist",
    "norm_err",
    "error_report",
]


def _as_columns(a):
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise InvalidDimensionError(f"expected a vector or matrix, got ndim={a.ndim}")
    return a


def subspace_error(u_hat, u):
    """Sine of the largest principal angle from span(u) to span(u_hat).

    Evaluates ``||(I - u_hat u_hat') u||_2`` without forming the n x n
    projector. Both arguments must have orthonormal columns; vectors are
    treated as one-column bases. The column counts may differ.

    Parameters
    ----------
    u_hat : ndarray, (n, r1) or (n,)
    u : ndarray, (n, r2) or (n,)

    Returns
    -------
    float in [0, 1]
    """
    u_hat = _as_columns(u_hat)
    u = _as_columns(u)
    if u_hat.shape[0] != u.shape[0]:
        raise InvalidDimensionError(
            f"ambient dimensions differ: {u_hat.shape[0]} vs {u.shape[0]}"
        )
    resid = u - u_hat @ (u_hat.T @ u)
    se = np.linalg.norm(resid, 2)
    return float(min(max(se, 0.0), 1.0))


def phase_invariant_dist(z1, z2):
    """min over signs s of ||z1 - s z2|| (real-valued phase ambiguity)."""
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    if z1.shape != z2.shape:
        raise InvalidDimensionError(f"length mismatch: {z1.shape} vs {z2.shape}")
    return float(min(np.linalg.norm(z1 - z2), np.linalg.norm(z1 + z2)))


def _column_dists(x_true, x_hat):
    minus = np.linalg.norm(x_true - x_hat, axis=0)
    plus = np.linalg.norm(x_true + x_hat, axis=0)
    return np.minimum(minus, plus)


def norm_err(x_true, x_hat):
    """Normalized column-wise sign-invariant squared recovery error.

    ``sum_k dist(x_k, xhat_k)^2 / sum_k ||x_k||^2``; each column may be
    recovered up to its own global sign.
    """
    x_true = _as_columns(x_true)
    x_hat = _as_columns(x_hat)
    if x_true.shape != x_hat.shape:
        raise InvalidDimensionError(f"shape mismatch: {x_true.shape} vs {x_hat.shape}")
    denom = float(np.sum(x_true**2))
    if denom == 0.0:
        raise ZeroDivisionError("x_true is identically zero; normalized error undefined")
    return float(np.sum(_column_dists(x_true, x_hat) ** 2) / denom)


@dataclass(frozen=True)
class ErrorReport:
    se: float
    norm_err: float
    per_column_dist: np.ndarray


def error_report(u_hat, u, x_true, x_hat):
    x_true = _as_columns(x_true)
    x_hat = _as_columns(x_hat)
    return ErrorReport(
        se=subspace_error(u_hat, u),
        norm_err=norm_err(x_true, x_hat),
        per_column_dist=_column_dists(x_true, x_hat),
    )
