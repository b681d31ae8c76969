"""Building blocks shared by the alternating-minimization solvers.

All batched routines use the layout ``sensing (q, n, m)``, ``magnitudes
(m, q)``, ``coefficients (k, q)`` and ``phases (m, q)``.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidDimensionError, RankDeficiencyError
from .metrics import norm_err, subspace_error

__all__ = ["TraceEntry", "RecoveryResult", "Tracer"]


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    se: float
    norm_err: float
    seconds: float


@dataclass
class RecoveryResult:
    """Estimated subspace, coefficients and signals, with an iteration trace."""

    u_hat: np.ndarray
    b_hat: np.ndarray
    x_hat: np.ndarray
    trace: list = field(default_factory=list)
    augmented: object = None
    stop_reason: str = "max_iters"

    @property
    def iterations(self):
        return self.trace[-1].iteration if self.trace else 0


class Tracer:
    """Records (iteration, SE, NormErr, elapsed seconds) against the truth."""

    def __init__(self, episode=None, offset=0.0, iteration_offset=0):
        self.episode = episode
        self.start = time.perf_counter()
        self.offset = offset
        self.iteration_offset = iteration_offset
        self.entries = []

    def record(self, iteration, u_hat, x_hat):
        elapsed = time.perf_counter() - self.start + self.offset
        se = ne = float("nan")
        if self.episode is not None:
            se = subspace_error(u_hat, self.episode.u_true)
            ne = norm_err(self.episode.signals, x_hat)
        entry = TraceEntry(iteration + self.iteration_offset, se, ne, elapsed)
        self.entries.append(entry)
        return entry


def project(sensing, u):
    """``A_t' U`` for every t, shape (q, m, k)."""
    return np.matmul(sensing.transpose(0, 2, 1), u)


def signs(z):
    s = np.sign(z)
    s[s == 0] = 1.0
    return s


def phases_from_projection(proj, b):
    """sign(A_t' U b_t) for every t, shape (m, q)."""
    return signs(np.einsum("tmk,kt->mt", proj, b))


def orient_rows(v):
    """Flip each row so its first non-negligible entry is positive."""
    mag = np.abs(v)
    mask = mag > 1e-12 * np.maximum(mag.max(axis=1, keepdims=True), 1e-300)
    first = np.argmax(mask, axis=1)
    s = np.sign(v[np.arange(v.shape[0]), first])
    s[s == 0] = 1.0
    return v * s[:, None]


def spectral_coeffs(proj, magnitudes):
    """Top eigenvector of each reduced ``Y_b``, scaled by ``sqrt(mean y^2)``.

    Returns shape (k, q).
    """
    y2 = magnitudes**2
    m = magnitudes.shape[0]
    weighted = proj * y2.T[:, :, None]
    yb = np.matmul(weighted.transpose(0, 2, 1), proj) / m
    yb = (yb + yb.transpose(0, 2, 1)) / 2
    _, vecs = np.linalg.eigh(yb)
    top = orient_rows(vecs[:, :, -1])
    scale = np.sqrt(np.mean(y2, axis=0))
    return (top * scale[:, None]).T


def ls_coeffs(proj, targets):
    """Column-wise least squares ``argmin_b ||targets_t - proj_t b||`` via QR.

    Returns shape (k, q). Raises RankDeficiencyError when any design matrix
    ``proj_t`` (m x k) is rank deficient, including the case m < k.
    """
    q, m, k = proj.shape
    if m < k:
        raise RankDeficiencyError(f"{m} measurements cannot determine {k} coefficients")
    qf, rf = np.linalg.qr(proj)
    diag = np.abs(np.diagonal(rf, axis1=1, axis2=2))
    scale = np.max(diag, axis=1, keepdims=True)
    if np.any(diag <= 1e-12 * np.maximum(scale, 1e-300)) or np.any(scale == 0):
        raise RankDeficiencyError("coefficient design matrix is rank deficient")
    rhs = np.einsum("tmk,mt->tk", qf, targets)
    return np.linalg.solve(rf, rhs[:, :, None])[:, :, 0].T


def fit_loss(proj, b, targets):
    """sum_t ||targets_t - proj_t b_t||^2."""
    resid = targets - np.einsum("tmk,kt->mt", proj, b)
    return float(np.sum(resid**2))


def check_episode_shapes(sensing, magnitudes):
    if sensing.ndim != 3:
        raise InvalidDimensionError("sensing must have shape (q, n, m)")
    q, _, m = sensing.shape
    if magnitudes.shape != (m, q):
        raise InvalidDimensionError(
            f"magnitudes shape {magnitudes.shape} does not match sensing {sensing.shape}"
        )
