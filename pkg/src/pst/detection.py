"""Phaseless subspace change detection and its ROC evaluation."""

from dataclasses import dataclass

import numpy as np

from . import model
from .exceptions import IndeterminateStatisticError, InvalidConfigError
from .spectral import accumulate_yu, build_yu, min_eigenvalue, project_out, top_eigenpair

__all__ = [
    "DEFAULT_C",
    "DetectionOutcome",
    "RocPoint",
    "DetectionSetup",
    "statistic_from_yu",
    "detection_statistic",
    "detect_change",
    "draw_statistic",
    "roc_from_statistics",
    "roc_curve",
    "auc",
]

DEFAULT_C = 1.15


@dataclass(frozen=True)
class DetectionOutcome:
    changed: bool
    statistic: float
    threshold_c: float


@dataclass(frozen=True)
class RocPoint:
    c: float
    true_positive_rate: float
    false_positive_rate: float


@dataclass(frozen=True)
class DetectionSetup:
    """Recipe for one Monte-Carlo detection dataset.

    ``theta`` is in radians; ``theta = 0`` gives data without a change.
    ``se0`` is the subspace error of the supplied previous-subspace estimate.
    """

    n: int
    r: int
    m: int
    q: int
    theta: float
    se0: float = 0.0
    lambda_bar: tuple | None = None


def statistic_from_yu(y_u, u_prev_hat):
    """``lambda_1(Y_tilde) / lambda_n(Y_U)`` for a precomputed ``Y_U``."""
    lam_n = min_eigenvalue(y_u)
    scale = max(1.0, float(np.max(np.abs(np.diag(y_u)))))
    if lam_n <= 1e-12 * scale:
        raise IndeterminateStatisticError(
            f"smallest eigenvalue of Y_U is {lam_n:.3g}; ratio undefined"
        )
    lam1, _ = top_eigenpair(project_out(y_u, u_prev_hat))
    return lam1 / lam_n


def detection_statistic(sensing, magnitudes, u_prev_hat):
    return statistic_from_yu(build_yu(sensing, magnitudes), u_prev_hat)


def detect_change(sensing, magnitudes, u_prev_hat, c=DEFAULT_C):
    """Declare a change when ``lambda_1(Y_tilde) >= c * lambda_n(Y_U)``.

    Parameters
    ----------
    sensing : ndarray, (q, n, m)
    magnitudes : ndarray, (m, q)
    u_prev_hat : ndarray, (n, r)
        Estimate of the subspace before the candidate change.
    c : float
        Threshold constant, slightly above one in practice.

    Returns
    -------
    DetectionOutcome
    """
    if c < 0:
        raise InvalidConfigError("threshold constant must be non-negative")
    stat = detection_statistic(sensing, magnitudes, u_prev_hat)
    return DetectionOutcome(changed=bool(stat >= c), statistic=stat, threshold_c=float(c))


def draw_statistic(setup, seed):
    """Simulate one dataset from ``setup`` and return its detection statistic.

    Measurements are streamed so that problems with n = 1000 and mq near 1e6 fit in memory.
    """
    rng = np.random.default_rng(seed)
    u_prev = model.generate_subspace(setup.n, setup.r, rng)
    u_new, _ = model.rotate_one_direction(u_prev, setup.theta, None, rng)
    coeffs = model.generate_coefficients(setup.r, setup.q, setup.lambda_bar, rng)
    signals = u_new @ coeffs
    y_u = accumulate_yu(model.iter_measurements(signals, setup.m, rng))
    u_prev_hat = model.perturb_subspace(u_prev, setup.se0, rng)
    return statistic_from_yu(y_u, u_prev_hat)


def roc_from_statistics(stats_changed, stats_unchanged, c_grid):
    """Empirical ROC points: detection and false-alarm rates at each threshold."""
    changed = np.asarray(stats_changed, dtype=float)
    unchanged = np.asarray(stats_unchanged, dtype=float)
    points = []
    for c in c_grid:
        points.append(RocPoint(
            c=float(c),
            true_positive_rate=float(np.mean(changed >= c)),
            false_positive_rate=float(np.mean(unchanged >= c)),
        ))
    return points


def roc_curve(setup_with_change, setup_without_change, c_grid, runs, seed=0):
    """Monte-Carlo ROC of the detector over a grid of threshold constants.

    Run ``k`` of either dataset uses seed ``seed + k``; the two setups should
    differ only in ``theta`` so that runs are paired.
    """
    c_grid = np.asarray(c_grid, dtype=float)
    if c_grid.size == 0 or np.any(np.diff(c_grid) < 0):
        raise InvalidConfigError("c_grid must be non-empty and ascending")
    if runs < 1:
        raise InvalidConfigError("runs must be at least 1")
    changed = [draw_statistic(setup_with_change, seed + k) for k in range(runs)]
    unchanged = [draw_statistic(setup_without_change, seed + k) for k in range(runs)]
    return roc_from_statistics(changed, unchanged, c_grid)


def auc(points):
    """Trapezoidal area under an ROC given as RocPoints, anchored at (0,0) and (1,1)."""
    fpr = [0.0, 1.0] + [p.false_positive_rate for p in points]
    tpr = [0.0, 1.0] + [p.true_positive_rate for p in points]
    pts = sorted(set(zip(fpr, tpr)))
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    return float(np.trapezoid(ys, xs))
