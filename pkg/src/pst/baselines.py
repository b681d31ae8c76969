"""Comparison solvers: full-subspace LRPR alternating minimization and
single-signal Wirtinger flow."""

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from . import _altmin
from ._altmin import RecoveryResult, Tracer
from ._linalg import spd_solve
from .exceptions import InvalidConfigError, InvalidDimensionError, RankDeficiencyError
from .spectral import build_yu, top_eigenpair, top_eigenvectors

__all__ = [
    "BaselineConfig",
    "lrpr_altmin",
    "solve_u_block",
    "wf_single",
    "wf_columns",
]

# Largest n*r for which the U-update normal matrix is formed densely.
DENSE_U_LIMIT = 5000


@dataclass(frozen=True)
class BaselineConfig:
    max_iters: int = 15
    step_size: float = 0.2
    max_halvings: int = 5

    def __post_init__(self):
        if self.max_iters < 0:
            raise InvalidConfigError("max_iters must be non-negative")
        if self.step_size <= 0:
            raise InvalidConfigError("step_size must be positive")


def _dense_normal_matrix(sensing, b, grams):
    r = b.shape[0]
    n = sensing.shape[1]
    if grams is not None:
        weights = b[:, None, :] * b[None, :, :]
        g4 = np.tensordot(weights, grams, axes=([2], [0]))
    else:
        g4 = np.zeros((r, r, n, n))
        for a, bt in zip(sensing, b.T):
            g4 += np.multiply.outer(np.outer(bt, bt), a @ a.T)
    return g4.transpose(0, 2, 1, 3).reshape(r * n, r * n)


def solve_u_block(sensing, targets, b, u0=None, grams=None):
    """``argmin_U sum_t ||targets_t - A_t' U b_t||^2`` over all n x r matrices.

    The unknown is vectorized column by column. Up to ``n r = 5000`` the
    normal matrix ``sum_t (b_t b_t') kron (A_t A_t')`` is formed and solved
    by Cholesky (ridge fallback when ill-conditioned); above that the same
    normal equations are solved matrix-free by conjugate gradients.
    """
    q, n, m = sensing.shape
    r = b.shape[0]
    az = np.einsum("tnm,mt->nt", sensing, targets)
    rhs = (az @ b.T).T.reshape(-1)
    if n * r <= DENSE_U_LIMIT:
        vec = spd_solve(_dense_normal_matrix(sensing, b, grams), rhs)
        return vec.reshape(r, n).T

    def matvec(v):
        vb = v.reshape(r, n).T @ b
        w = np.einsum("tnm,nt->mt", sensing, vb)
        return (np.einsum("tnm,mt->nt", sensing, w) @ b.T).T.reshape(-1)

    op = LinearOperator((n * r, n * r), matvec=matvec, dtype=float)
    x0 = None if u0 is None else np.asarray(u0, dtype=float).T.reshape(-1)
    vec, info = cg(op, rhs, x0=x0, rtol=1e-12, atol=0.0, maxiter=2000)
    if info < 0:
        raise RankDeficiencyError("conjugate gradients broke down on the U-update")
    return vec.reshape(r, n).T


def _qr_absorb(u_raw, b):
    # keep the product U B fixed while making U orthonormal
    qf, rf = np.linalg.qr(u_raw)
    d = np.sign(np.diag(rf))
    d[d == 0] = 1.0
    return qf * d, (rf * d[:, None]) @ b


def lrpr_altmin(episode, r, config=None, *, warm_start=None, track=True):
    """Low-rank phase retrieval by alternating minimization.

    Spectral initialization takes the top-r eigenvectors of ``Y_U`` as the
    subspace and the top eigenvector of each reduced ``Y_b`` as the
    coefficient direction. Each iteration then updates the signs, the whole
    basis (one joint least-squares problem over all n r entries), and the
    coefficients column by column.

    Parameters
    ----------
    episode : Episode
    r : int
        Subspace dimension to recover.
    config : BaselineConfig, optional
        Only ``max_iters`` is used.
    warm_start : tuple of (U, B), optional
        Skip the spectral initialization and start from this estimate.
    track : bool
        Record the error trace against the ground truth in ``episode``.
    """
    config = config or BaselineConfig()
    sensing, y = episode.sensing, episode.magnitudes
    _altmin.check_episode_shapes(sensing, y)
    q, n, m = sensing.shape
    if not (1 <= r <= n):
        raise InvalidDimensionError(f"need 1 <= r <= n, got r={r}")
    if m < r:
        raise RankDeficiencyError(f"m={m} measurements per signal is below r={r}")
    if m * q < n * r:
        raise RankDeficiencyError(f"m q = {m * q} is below n r = {n * r}")
    tracer = Tracer(episode if track else None)
    grams = episode.grams

    if warm_start is None:
        _, u = top_eigenvectors(build_yu(sensing, y), r)
        proj = _altmin.project(sensing, u)
        b = _altmin.spectral_coeffs(proj, y)
    else:
        u = np.asarray(warm_start[0], dtype=float)
        b = np.asarray(warm_start[1], dtype=float)
        proj = _altmin.project(sensing, u)
    tracer.record(0, u, u @ b)

    for it in range(1, config.max_iters + 1):
        phases = _altmin.phases_from_projection(proj, b)
        targets = phases * y
        u_raw = solve_u_block(sensing, targets, b, u0=u, grams=grams)
        u, b = _qr_absorb(u_raw, b)
        proj = _altmin.project(sensing, u)
        b = _altmin.ls_coeffs(proj, targets)
        tracer.record(it, u, u @ b)

    return RecoveryResult(
        u_hat=u, b_hat=b, x_hat=u @ b,
        trace=tracer.entries if track else [],
    )


def _wf_loss(z, y2, m):
    return np.sum((z**2 - y2) ** 2, axis=0) / (4 * m)


def _wf_batch(sensing, magnitudes, config, on_iter=None):
    """Wirtinger flow on every column independently, vectorized over columns."""
    q, n, m = sensing.shape
    y2 = magnitudes**2
    x = np.zeros((n, q))
    for t in range(q):
        energy = np.sqrt(np.mean(y2[:, t]))
        if energy > 0:
            a = sensing[t]
            _, v = top_eigenpair((a * y2[:, t]) @ a.T / m)
            x[:, t] = v * energy
    norms2 = np.sum(x**2, axis=0)
    base = np.where(norms2 > 0, config.step_size / np.where(norms2 > 0, norms2, 1.0), 0.0)
    if on_iter is not None:
        on_iter(0, x)

    z = np.einsum("tnm,nt->mt", sensing, x)
    loss = _wf_loss(z, y2, m)
    for it in range(1, config.max_iters + 1):
        grad = np.einsum("tnm,mt->nt", sensing, (z**2 - y2) * z) / m
        step = base.copy()
        trial = x - step * grad
        z_trial = np.einsum("tnm,nt->mt", sensing, trial)
        trial_loss = _wf_loss(z_trial, y2, m)
        for _ in range(config.max_halvings):
            worse = trial_loss > loss
            if not np.any(worse):
                break
            step[worse] /= 2
            idx = np.flatnonzero(worse)
            trial[:, idx] = x[:, idx] - step[idx] * grad[:, idx]
            z_trial[:, idx] = np.einsum("tnm,nt->mt", sensing[idx], trial[:, idx])
            trial_loss[idx] = _wf_loss(z_trial[:, idx], y2[:, idx], m)
        # columns still worse after all halvings keep their previous iterate
        keep = trial_loss > loss
        trial[:, keep] = x[:, keep]
        z_trial[:, keep] = z[:, keep]
        trial_loss[keep] = loss[keep]
        x, z, loss = trial, z_trial, trial_loss
        if on_iter is not None:
            on_iter(it, x)
    return x


def wf_single(sensing_t, magnitudes_t, config=None):
    """Wirtinger flow for one signal from ``y = |A' x|``.

    Spectral start from ``(1/m) sum_i y_i^2 a_i a_i'`` scaled by
    ``sqrt(mean y^2)``, then gradient descent on
    ``(1/4m) sum_i ((a_i' x)^2 - y_i^2)^2`` with step
    ``step_size / ||x_0||^2``, halved (at most ``max_halvings`` times) whenever
    a step would increase the loss. A step that is still uphill after the
    last halving is skipped, so the loss never increases.
    """
    config = config or BaselineConfig(max_iters=200)
    a = np.asarray(sensing_t, dtype=float)[None]
    y = np.asarray(magnitudes_t, dtype=float)[:, None]
    return _wf_batch(a, y, config)[:, 0]


def wf_columns(episode, r, config=None, *, track=True):
    """Per-column Wirtinger flow; the subspace is read off the recovered signals."""
    config = config or BaselineConfig(max_iters=200)
    tracer = Tracer(episode if track else None)

    def basis(x):
        left, _, _ = np.linalg.svd(x, full_matrices=False)
        return left[:, :r]

    def on_iter(it, x):
        if track:
            tracer.record(it, basis(x), x)

    x = _wf_batch(episode.sensing, episode.magnitudes, config, on_iter)
    u = basis(x)
    return RecoveryResult(
        u_hat=u, b_hat=u.T @ x, x_hat=x, trace=tracer.entries if track else [],
    )
