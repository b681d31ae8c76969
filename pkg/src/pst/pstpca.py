"""Phaseless PCA with partial subspace knowledge.

Given an accurate estimate of the previous subspace and the knowledge that
one direction has rotated, only the newly added direction and the
coefficients have to be learned. The previous basis is augmented by one
column, everything is initialized spectrally, and then signs, the added
direction and the coefficients are refined by alternating least squares.
A rank-r truncation of the augmented fit gives the new subspace.
"""

from dataclasses import dataclass

import numpy as np

from . import _altmin
from ._altmin import RecoveryResult, TraceEntry, Tracer
from ._linalg import spd_solve, weighted_gram
from .exceptions import DegenerateDirectionError, InvalidDimensionError
from .spectral import build_yb, build_yu, project_out, top_eigenpair

__all__ = [
    "DEFAULT_T_MAX",
    "AugmentedEstimate",
    "RecoveryResult",
    "TraceEntry",
    "init_u_add",
    "init_coeffs",
    "update_phase",
    "update_u_add",
    "direction_step",
    "update_coeffs",
    "finalize",
    "run_pst_pca",
    "refine_with_lrpr",
]

DEFAULT_T_MAX = 12


@dataclass
class AugmentedEstimate:
    """State of the relaxed (r+1)-dimensional fit."""

    u_tilde: np.ndarray
    b_tilde: np.ndarray
    phases: np.ndarray | None = None


def init_u_add(sensing, magnitudes, u_prev_hat):
    """Top eigenvector of ``Y_U`` with the previous subspace projected out."""
    _, vec = top_eigenpair(project_out(build_yu(sensing, magnitudes), u_prev_hat))
    return vec


def init_coeffs(u_tilde, sensing_t, magnitudes_t):
    """Spectral coefficient estimate for one time index.

    The top eigenvector of the reduced matrix ``Y_b`` scaled to the
    energy estimate ``sqrt(mean(y^2))``.
    """
    y = np.asarray(magnitudes_t, dtype=float)
    energy = np.sqrt(np.mean(y**2))
    if energy == 0.0:
        return np.zeros(u_tilde.shape[1])
    _, vec = top_eigenpair(build_yb(u_tilde, sensing_t, y))
    return vec * energy


def update_phase(u_tilde, b_tilde_t, sensing_t):
    """Measurement signs ``sign(A_t' U b_t)``, with sign(0) taken as +1."""
    return _altmin.signs(sensing_t.T @ (u_tilde @ b_tilde_t))


def _u_add_normal_solution(sensing, magnitudes, phases, u_prev_hat, b_tilde, grams=None):
    # unconstrained least-squares direction before projection and scaling
    r = u_prev_hat.shape[1]
    b_fix = b_tilde[:r]
    b_new = b_tilde[r]
    energy = float(np.sum(b_new**2))
    if energy <= 1e-24 * max(float(np.sum(b_tilde**2)), 1e-300) or energy == 0.0:
        raise DegenerateDirectionError(
            "coefficients on the added direction vanish; change not identifiable"
        )
    fixed_part = np.einsum("tmk,kt->mt", _altmin.project(sensing, u_prev_hat), b_fix)
    d = phases * magnitudes - fixed_part
    rhs = np.einsum("tnm,mt->n", sensing, d * b_new)
    normal = weighted_gram(sensing, b_new**2, grams)
    return spd_solve(normal, rhs)


def update_u_add(sensing, magnitudes, phases, u_prev_hat, b_tilde, grams=None):
    """Least-squares estimate of the added direction, returned as a unit vector.

    Solves ``(sum_t b_{r+1,t}^2 A_t A_t') u = sum_t b_{r+1,t} A_t d_t`` with
    ``d_t = C_t y_t - A_t' U_prev b_{1:r,t}``, then removes the component in
    span(U_prev) and normalizes.

    Parameters
    ----------
    sensing : ndarray, (q, n, m)
    magnitudes : ndarray, (m, q)
    phases : ndarray, (m, q)
        Current sign estimates.
    u_prev_hat : ndarray, (n, r)
    b_tilde : ndarray, (r + 1, q)
    grams : ndarray, (q, n, n), optional
        Cached ``A_t A_t'``.
    """
    u = _u_add_normal_solution(sensing, magnitudes, phases, u_prev_hat, b_tilde, grams)
    unit, _, _ = _split_direction(u, u_prev_hat)
    return unit


def _split_direction(u, u_prev_hat):
    inside = u_prev_hat.T @ u
    perp = u - u_prev_hat @ inside
    perp = perp - u_prev_hat @ (u_prev_hat.T @ perp)
    size = float(np.linalg.norm(perp))
    if size <= 1e-14 * max(float(np.linalg.norm(u)), 1e-300):
        raise DegenerateDirectionError("added direction lies inside the previous subspace")
    return perp / size, inside, size


def direction_step(sensing, magnitudes, phases, u_prev_hat, b_tilde, grams=None):
    """Exact minimization over the added direction at fixed signs.

    Returns the new augmented basis together with coefficients rewritten so
    that ``U~ B~`` equals the unconstrained least-squares fit: the part of the
    solution inside span(U_prev) and its length are folded into ``B~``.
    """
    r = u_prev_hat.shape[1]
    u_star = _u_add_normal_solution(sensing, magnitudes, phases, u_prev_hat, b_tilde, grams)
    u_add, inside, size = _split_direction(u_star, u_prev_hat)
    b_new = np.array(b_tilde, dtype=float, copy=True)
    b_new[:r] += np.outer(inside, b_new[r])
    b_new[r] *= size
    return np.column_stack([u_prev_hat, u_add]), b_new


def update_coeffs(u_tilde, sensing_t, magnitudes_t, phases_t):
    """``argmin_b ||C_t y_t - A_t' U b||`` by QR of the m x (r+1) design."""
    proj = (sensing_t.T @ u_tilde)[None]
    target = (np.asarray(phases_t) * np.asarray(magnitudes_t))[:, None]
    return _altmin.ls_coeffs(proj, target)[:, 0]


def finalize(u_tilde, b_tilde, r):
    """Truncate the augmented fit ``X~ = U~ B~`` to rank r.

    The new basis is the top-r left singular vectors of ``X~``, obtained from
    the SVD of the small (r+1) x q core rather than of ``X~`` itself.
    """
    u_tilde = np.asarray(u_tilde, dtype=float)
    b_tilde = np.asarray(b_tilde, dtype=float)
    if not (1 <= r <= u_tilde.shape[1]):
        raise InvalidDimensionError(f"rank {r} exceeds augmented width {u_tilde.shape[1]}")
    qf, rf = np.linalg.qr(u_tilde)
    left, _, _ = np.linalg.svd(rf @ b_tilde, full_matrices=False)
    u_hat = qf @ left[:, :r]
    x_tilde = u_tilde @ b_tilde
    b_hat = u_hat.T @ x_tilde
    return RecoveryResult(
        u_hat=u_hat, b_hat=b_hat, x_hat=u_hat @ b_hat,
        augmented=AugmentedEstimate(u_tilde.copy(), b_tilde.copy()),
    )


def run_pst_pca(episode, u_prev_hat, t_max=DEFAULT_T_MAX, *, delta_tol=1e-9,
                success_se=None, track=True):
    """Recover the changed subspace, coefficients and signals of one episode.

    Parameters
    ----------
    episode : Episode
        Measurements of the interval after the change. Its ground-truth
        fields are only used for the trace and for ``success_se``.
    u_prev_hat : ndarray, (n, r)
        Estimate of the subspace before the change.
    t_max : int
        Maximum number of outer alternating-minimization iterations.
    delta_tol : float
        Stop when successive augmented bases differ by less than this
        (Frobenius norm).
    success_se : float, optional
        Stop as soon as the truncated estimate is within this subspace
        error of the truth.
    track : bool
        Record SE and NormErr against the truth after every iteration.

    Returns
    -------
    RecoveryResult
        ``stop_reason`` is one of ``max_iters``, ``converged``,
        ``success`` or ``degenerate``.
    """
    sensing, y = episode.sensing, episode.magnitudes
    _altmin.check_episode_shapes(sensing, y)
    u_prev_hat = np.asarray(u_prev_hat, dtype=float)
    r = u_prev_hat.shape[1]
    if y.shape[0] < r + 1:
        raise InvalidDimensionError(f"need m >= r + 1 = {r + 1}, got m = {y.shape[0]}")
    tracer = Tracer(episode if (track or success_se is not None) else None)
    grams = episode.grams

    u_add = init_u_add(sensing, y, u_prev_hat)
    u_tilde = np.column_stack([u_prev_hat, u_add])
    proj = _altmin.project(sensing, u_tilde)
    b_tilde = _altmin.spectral_coeffs(proj, y)
    phases = _altmin.phases_from_projection(proj, b_tilde)

    current = finalize(u_tilde, b_tilde, r)
    entry = tracer.record(0, current.u_hat, current.x_hat)
    reason = "max_iters"
    for it in range(1, t_max + 1):
        if success_se is not None and entry.se < success_se:
            reason = "success"
            break
        phases = _altmin.phases_from_projection(proj, b_tilde)
        try:
            new_u_tilde, b_tilde = direction_step(sensing, y, phases, u_prev_hat, b_tilde, grams)
        except DegenerateDirectionError:
            reason = "degenerate"
            break
        proj = _altmin.project(sensing, new_u_tilde)
        b_tilde = _altmin.ls_coeffs(proj, phases * y)
        delta = float(np.linalg.norm(new_u_tilde - u_tilde))
        u_tilde = new_u_tilde
        current = finalize(u_tilde, b_tilde, r)
        entry = tracer.record(it, current.u_hat, current.x_hat)
        if delta < delta_tol:
            reason = "converged"
            break
    else:
        if success_se is not None and entry.se < success_se:
            reason = "success"

    current.augmented = AugmentedEstimate(u_tilde, b_tilde, phases)
    current.trace = tracer.entries if track else []
    current.stop_reason = reason
    return current


def refine_with_lrpr(recovery, episode, iterations=3, *, track=True):
    """Continue from a PST-PCA result with full-subspace alternating minimization.

    The previous-subspace error floor of PST-PCA is removed because every
    direction of the basis is re-estimated.
    """
    from .baselines import BaselineConfig, lrpr_altmin

    config = BaselineConfig(max_iters=iterations)
    return lrpr_altmin(
        episode, recovery.u_hat.shape[1], config,
        warm_start=(recovery.u_hat, recovery.b_hat), track=track,
    )
