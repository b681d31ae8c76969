"""Small dense linear-algebra helpers shared by the solvers."""

import numpy as np
from scipy import linalg
from scipy.linalg import lapack

from .exceptions import RankDeficiencyError

# Above this many float64 entries the per-time Gram matrices are not cached.
GRAM_CACHE_LIMIT = 2**25

COND_LIMIT = 1e12


def orthonormalize(m):
    """Thin QR with the diagonal of R made non-negative.

    An input that already has orthonormal columns is returned unchanged up
    to round-off, so column order and orientation are preserved.
    """
    q, r = np.linalg.qr(np.asarray(m, dtype=float))
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


def _cholesky_rcond(a):
    c, info = lapack.dpotrf(a, lower=0, clean=1, overwrite_a=0)
    if info != 0:
        return None, 0.0
    anorm = np.abs(a).sum(axis=0).max()
    rcond, info = lapack.dpocon(c, anorm)
    if info != 0:
        return None, 0.0
    return c, rcond


def spd_solve(a, b):
    """Solve a symmetric positive (semi)definite system by Cholesky.

    Falls back to a ridge of ``1e-10 * trace(a) / n`` when the factorization
    fails or the estimated condition number exceeds 1e12. Raises
    RankDeficiencyError if the ridged system still cannot be factored.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    c, rcond = _cholesky_rcond(a)
    if c is None or rcond * COND_LIMIT < 1.0:
        tr = float(np.trace(a))
        if not np.isfinite(tr) or tr <= 0.0:
            raise RankDeficiencyError("normal matrix has no positive mass")
        ridged = a + (1e-10 * tr / n) * np.eye(n)
        c, rcond = _cholesky_rcond(ridged)
        if c is None or rcond * COND_LIMIT * 1e4 < 1.0:
            raise RankDeficiencyError(
                f"normal matrix is numerically singular (rcond={rcond:.3g})"
            )
    return linalg.cho_solve((c, False), b)


def batched_grams(sensing):
    """A_t A_t' for every t, shape (q, n, n)."""
    return np.matmul(sensing, sensing.transpose(0, 2, 1))


def weighted_gram(sensing, weights, grams=None):
    """sum_t w_t A_t A_t' for sensing of shape (q, n, m)."""
    weights = np.asarray(weights, dtype=float)
    if grams is not None:
        return np.tensordot(weights, grams, axes=1)
    n = sensing.shape[1]
    out = np.zeros((n, n))
    for w, a in zip(weights, sensing):
        if w != 0.0:
            out += (a * w) @ a.T
    return out
