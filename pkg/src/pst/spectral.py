"""Spectral matrices built from phaseless measurements.

``Y_U`` averages ``y^2 a a'`` over every measurement of an episode. Its
expectation is ``2 U L U' + tr(L) I`` for signal covariance ``U L U'``, so
once the previous subspace is projected out, the top eigenvector points
along the newly added direction and the bottom eigenvalue estimates
``tr(L)``.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .exceptions import InvalidDimensionError

__all__ = [
    "SpectralSummary",
    "accumulate_yu",
    "build_yu",
    "project_out",
    "build_yb",
    "top_eigenpair",
    "top_eigenvectors",
    "min_eigenvalue",
    "expected_yu",
    "spectral_summary",
]


@dataclass(frozen=True)
class SpectralSummary:
    y_u: np.ndarray
    y_u_tilde: np.ndarray
    lam1_tilde: float
    lam_n: float
    top_vec_tilde: np.ndarray


def accumulate_yu(pairs, n=None):
    """Stream ``(A_t, y_t)`` pairs into ``(1/(mq)) sum_t sum_i y^2 a a'``."""
    total = None
    count = 0
    for a, y in pairs:
        a = np.asarray(a, dtype=float)
        if total is None:
            total = np.zeros((a.shape[0], a.shape[0]))
        total += (a * (np.asarray(y) ** 2)) @ a.T
        count += a.shape[1]
    if total is None or count == 0:
        raise ValueError("empty measurement batch")
    if n is not None and total.shape[0] != n:
        raise InvalidDimensionError(f"expected ambient dimension {n}")
    total /= count
    return (total + total.T) / 2


def build_yu(sensing, magnitudes):
    """Weighted measurement covariance over a whole episode.

    Parameters
    ----------
    sensing : ndarray, (q, n, m)
    magnitudes : ndarray, (m, q)

    Returns
    -------
    ndarray, (n, n)
        ``(1/(mq)) sum_{i,t} y_{i,t}^2 a_{i,t} a_{i,t}'``.
    """
    sensing = np.asarray(sensing, dtype=float)
    magnitudes = np.asarray(magnitudes, dtype=float)
    if sensing.ndim != 3 or sensing.shape[0] == 0 or sensing.shape[2] == 0:
        raise ValueError("empty or malformed measurement batch")
    if magnitudes.shape != (sensing.shape[2], sensing.shape[0]):
        raise InvalidDimensionError(
            f"magnitudes shape {magnitudes.shape} does not match sensing {sensing.shape}"
        )
    return accumulate_yu(zip(sensing, magnitudes.T))


def project_out(y_u, u_prev_hat):
    """``(I - U U') Y (I - U U')`` expanded so no projector is formed."""
    y_u = np.asarray(y_u, dtype=float)
    u = np.asarray(u_prev_hat, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if u.shape[0] != y_u.shape[0]:
        raise InvalidDimensionError("basis and matrix dimensions differ")
    yu = y_u @ u
    uyu = u.T @ yu
    out = y_u - u @ yu.T - yu @ u.T + u @ uyu @ u.T
    return (out + out.T) / 2


def build_yb(u_tilde, sensing_t, magnitudes_t):
    """``U' [(1/m) sum_i y_i^2 a_i a_i'] U`` computed in the reduced space."""
    u_tilde = np.asarray(u_tilde, dtype=float)
    a = np.asarray(sensing_t, dtype=float)
    y = np.asarray(magnitudes_t, dtype=float)
    if a.shape[0] != u_tilde.shape[0] or a.shape[1] != y.shape[0]:
        raise InvalidDimensionError("sensing, magnitudes and basis do not conform")
    proj = u_tilde.T @ a
    out = (proj * y**2) @ proj.T / y.shape[0]
    return (out + out.T) / 2


def _check_symmetric(s):
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise InvalidDimensionError("expected a square matrix")
    scale = max(1.0, float(np.max(np.abs(s))) if s.size else 1.0)
    if np.max(np.abs(s - s.T), initial=0.0) > 1e-8 * scale:
        raise ValueError("matrix is not symmetric")
    return s


def _orient(v):
    # first coordinate that is not round-off noise is made positive
    v = np.asarray(v, dtype=float)
    big = np.flatnonzero(np.abs(v) > 1e-12 * max(np.max(np.abs(v)), 1e-300))
    if big.size and v[big[0]] < 0:
        return -v
    return v


def top_eigenpair(s):
    """Largest eigenvalue and its unit eigenvector (first nonzero entry > 0)."""
    s = _check_symmetric(s)
    n = s.shape[0]
    w, v = linalg.eigh(s, subset_by_index=[n - 1, n - 1])
    return float(w[0]), _orient(v[:, 0])


def top_eigenvectors(s, k):
    """Eigenvectors of the ``k`` largest eigenvalues, in decreasing order."""
    s = _check_symmetric(s)
    n = s.shape[0]
    if not (1 <= k <= n):
        raise InvalidDimensionError(f"k={k} out of range for n={n}")
    w, v = linalg.eigh(s, subset_by_index=[n - k, n - 1])
    order = np.argsort(w)[::-1]
    return w[order], np.column_stack([_orient(v[:, j]) for j in order])


def min_eigenvalue(s):
    s = _check_symmetric(s)
    return float(linalg.eigh(s, eigvals_only=True, subset_by_index=[0, 0])[0])


def expected_yu(signals):
    """Conditional expectation of ``Y_U`` given the signals.

    ``(1/q) sum_t (2 x_t x_t' + ||x_t||^2 I)`` which equals
    ``2 U L U' + tr(L) I`` with ``L`` the empirical coefficient covariance.
    """
    x = np.asarray(signals, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    q = x.shape[1]
    return 2.0 * (x @ x.T) / q + (np.sum(x**2) / q) * np.eye(x.shape[0])


def spectral_summary(sensing, magnitudes, u_prev_hat):
    y_u = build_yu(sensing, magnitudes)
    return summarize_yu(y_u, u_prev_hat)


def summarize_yu(y_u, u_prev_hat):
    y_tilde = project_out(y_u, u_prev_hat)
    lam1, vec = top_eigenpair(y_tilde)
    return SpectralSummary(
        y_u=y_u, y_u_tilde=y_tilde, lam1_tilde=lam1,
        lam_n=min_eigenvalue(y_u), top_vec_tilde=vec,
    )
