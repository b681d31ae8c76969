"""Synthetic data for phaseless subspace tracking.

A signal sequence ``x_t = U_j b_t`` lives in a subspace that is piecewise
constant in time. At each change time exactly one basis direction rotates by
an angle theta towards a direction orthogonal to the previous subspace, and
each signal is observed only through magnitudes ``|<a_i, x_t>|`` of Gaussian
projections.
"""

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from ._linalg import GRAM_CACHE_LIMIT, batched_grams, orthonormalize
from .exceptions import InvalidConfigError, InvalidDimensionError
from .metrics import subspace_error

__all__ = [
    "ChangeEvent",
    "Episode",
    "TrackingScenario",
    "ChangeDraw",
    "is_basis",
    "generate_subspace",
    "rotate_one_direction",
    "generate_coefficients",
    "iter_measurements",
    "measure",
    "perturb_subspace",
    "make_episode",
    "draw_change",
    "generate_scenario",
    "scenario_to_dict",
    "scenario_from_dict",
    "save_scenario",
    "load_scenario",
]


def is_basis(u, tol=1e-10):
    """True when ``u`` has mutually orthonormal columns to within ``tol``."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 2 or u.shape[1] > u.shape[0]:
        return False
    return bool(np.max(np.abs(u.T @ u - np.eye(u.shape[1]))) <= tol)


@dataclass(frozen=True)
class ChangeEvent:
    """Geometry of a single-direction subspace rotation.

    ``u_chd = u_add sin(theta) + u_chg cos(theta)`` and
    ``u_del = u_chg sin(theta) - u_add cos(theta)``.
    """

    u_chg: np.ndarray
    u_chd: np.ndarray
    u_add: np.ndarray
    u_del: np.ndarray
    theta: float
    chg_index: int


@dataclass(frozen=True)
class Episode:
    """One constant-subspace interval of ``q`` signals.

    ``sensing[t]`` is the n x m matrix whose columns are the measurement
    vectors for time t, and ``magnitudes[:, t] = |sensing[t].T @ signals[:, t]|``.
    """

    u_true: np.ndarray
    coeffs: np.ndarray
    signals: np.ndarray
    sensing: np.ndarray
    magnitudes: np.ndarray
    lambda_bar: np.ndarray

    @property
    def n(self):
        return self.signals.shape[0]

    @property
    def r(self):
        return self.u_true.shape[1]

    @property
    def m(self):
        return self.magnitudes.shape[0]

    @property
    def q(self):
        return self.magnitudes.shape[1]

    @cached_property
    def grams(self):
        """Per-time ``A_t A_t'`` stack, or None when too large to keep."""
        if self.q * self.n * self.n > GRAM_CACHE_LIMIT:
            return None
        return batched_grams(self.sensing)


@dataclass(frozen=True)
class TrackingScenario:
    episodes: list
    change_events: list
    change_times: list
    delta_bound: float = 1.0
    seed: int | None = None
    theta_degrees: list = field(default_factory=list)


class ChangeDraw(NamedTuple):
    u_prev: np.ndarray
    episode: Episode
    event: ChangeEvent


def generate_subspace(n, r, rng=None):
    """Random n x r basis: orthonormalized i.i.d. standard normal matrix."""
    if not (1 <= r <= n):
        raise InvalidDimensionError(f"need 1 <= r <= n, got n={n}, r={r}")
    rng = np.random.default_rng(rng)
    return orthonormalize(rng.standard_normal((n, r)))


def _complement_direction(u, rng):
    g = rng.standard_normal(u.shape[0])
    # two passes of Gram-Schmidt keep |u' g| at round-off level
    for _ in range(2):
        g = g - u @ (u.T @ g)
    return g / np.linalg.norm(g)


def rotate_one_direction(u_prev, theta, chg_index=None, rng=None):
    """Rotate one column of ``u_prev`` by ``theta`` out of its span.

    Parameters
    ----------
    u_prev : ndarray, (n, r)
        Current basis matrix.
    theta : float
        Rotation angle in radians, within [0, pi/2].
    chg_index : int, optional
        Column that changes; defaults to the last one.
    rng : Generator or seed

    Returns
    -------
    u_new : ndarray, (n, r)
        ``u_prev`` with column ``chg_index`` replaced by the changed direction.
    event : ChangeEvent
    """
    u_prev = np.asarray(u_prev, dtype=float)
    n, r = u_prev.shape
    if n <= r:
        raise InvalidDimensionError("n == r: no direction orthogonal to the subspace")
    if not (0.0 <= theta <= np.pi / 2 + 1e-15):
        raise InvalidConfigError(f"theta must lie in [0, pi/2], got {theta}")
    if chg_index is None:
        chg_index = r - 1
    if not (0 <= chg_index < r):
        raise InvalidDimensionError(f"chg_index {chg_index} out of range for r={r}")
    rng = np.random.default_rng(rng)

    u_chg = u_prev[:, chg_index].copy()
    u_add = _complement_direction(u_prev, rng)
    s, c = np.sin(theta), np.cos(theta)
    u_chd = u_add * s + u_chg * c
    u_del = u_chg * s - u_add * c

    u_new = u_prev.copy()
    u_new[:, chg_index] = u_chd
    u_new = orthonormalize(u_new)
    event = ChangeEvent(
        u_chg=u_chg, u_chd=u_chd, u_add=u_add, u_del=u_del,
        theta=float(theta), chg_index=int(chg_index),
    )
    return u_new, event


def generate_coefficients(r, q, lambda_bar=None, rng=None):
    """Independent zero-mean Gaussian coefficients, row k with variance lambda_bar[k]."""
    lambda_bar = np.ones(r) if lambda_bar is None else np.asarray(lambda_bar, dtype=float)
    if lambda_bar.shape != (r,):
        raise InvalidDimensionError(f"lambda_bar must have length r={r}")
    if np.any(lambda_bar <= 0):
        raise InvalidConfigError("lambda_bar entries must be positive")
    rng = np.random.default_rng(rng)
    return np.sqrt(lambda_bar)[:, None] * rng.standard_normal((r, q))


def iter_measurements(signals, m, rng=None):
    """Yield ``(A_t, y_t)`` one time index at a time.

    Draws exactly the same numbers as :func:`measure`, so large problems can
    be streamed without materializing all sensing matrices.
    """
    if m < 1:
        raise InvalidDimensionError("m must be at least 1")
    signals = np.asarray(signals, dtype=float)
    if signals.ndim == 1:
        signals = signals[:, None]
    rng = np.random.default_rng(rng)
    n = signals.shape[0]
    for x in signals.T:
        a = rng.standard_normal((n, m))
        yield a, np.abs(a.T @ x)


def measure(signals, m, rng=None):
    """Gaussian phaseless measurements of each column of ``signals``.

    Returns
    -------
    sensing : ndarray, (q, n, m)
    magnitudes : ndarray, (m, q)
    """
    pairs = list(iter_measurements(signals, m, rng))
    sensing = np.stack([a for a, _ in pairs])
    magnitudes = np.stack([y for _, y in pairs], axis=1)
    return sensing, magnitudes


def perturb_subspace(u_true, target_se, rng=None, max_iter=60):
    """Additively corrupt a basis so its subspace error is about ``target_se``.

    The noise direction is drawn once; only its scale is adjusted until the
    re-orthonormalized result has SE within a factor 1.001 of the target
    (always inside [0.5, 2] x target).
    """
    if not (0.0 <= target_se < 1.0):
        raise InvalidConfigError(f"target_se must lie in [0, 1), got {target_se}")
    u_true = np.asarray(u_true, dtype=float)
    if target_se == 0.0:
        return u_true.copy()
    rng = np.random.default_rng(rng)
    noise = rng.standard_normal(u_true.shape)
    perp = noise - u_true @ (u_true.T @ noise)
    scale = target_se / np.linalg.norm(perp, 2)
    best = None
    for _ in range(max_iter):
        u_hat = orthonormalize(u_true + scale * noise)
        se = subspace_error(u_hat, u_true)
        if best is None or abs(np.log(se / target_se)) < abs(np.log(best[1] / target_se)):
            best = (u_hat, se)
        if abs(se / target_se - 1.0) < 1e-3:
            break
        scale *= target_se / se
    return best[0]


def make_episode(u_true, q, m, lambda_bar=None, rng=None):
    """Coefficients, signals and measurements for one subspace."""
    rng = np.random.default_rng(rng)
    r = u_true.shape[1]
    lambda_bar = np.ones(r) if lambda_bar is None else np.asarray(lambda_bar, dtype=float)
    coeffs = generate_coefficients(r, q, lambda_bar, rng)
    signals = u_true @ coeffs
    sensing, magnitudes = measure(signals, m, rng)
    return Episode(
        u_true=u_true, coeffs=coeffs, signals=signals, sensing=sensing,
        magnitudes=magnitudes, lambda_bar=lambda_bar,
    )


def draw_change(n, r, m, q, theta, lambda_bar=None, rng=None, chg_index=None):
    """Previous subspace, one rotation by ``theta``, and the new episode's data.

    ``theta = 0`` yields a no-change episode drawn with the same random
    stream layout, so changed and unchanged draws from equal seeds are paired.
    """
    rng = np.random.default_rng(rng)
    u_prev = generate_subspace(n, r, rng)
    u_new, event = rotate_one_direction(u_prev, theta, chg_index, rng)
    episode = make_episode(u_new, q, m, lambda_bar, rng)
    return ChangeDraw(u_prev, episode, event)


def generate_scenario(n, r, m, q, theta_degrees, lambda_bar=None, seed=0,
                      chg_index=None, delta_bound=1.0):
    """Piecewise-constant subspace sequence with ``len(theta_degrees)`` changes.

    Every episode holds ``q`` signals; change ``j`` happens at time ``j * q``.
    Each change rotates column ``chg_index`` (default: last) of the current
    basis, so over several changes the rotated column moves progressively.
    """
    rng = np.random.default_rng(seed)
    lambda_bar = np.ones(r) if lambda_bar is None else np.asarray(lambda_bar, dtype=float)
    u = generate_subspace(n, r, rng)
    episodes = [make_episode(u, q, m, lambda_bar, rng)]
    events = []
    for deg in theta_degrees:
        u, event = rotate_one_direction(u, np.deg2rad(deg), chg_index, rng)
        events.append(event)
        episodes.append(make_episode(u, q, m, lambda_bar, rng))
    change_times = [q * (j + 1) for j in range(len(events))]
    return TrackingScenario(
        episodes=episodes, change_events=events, change_times=change_times,
        delta_bound=float(delta_bound), seed=seed, theta_degrees=list(theta_degrees),
    )


def scenario_to_dict(scenario):
    """JSON-ready description; sensing matrices are regenerated from the seed."""
    ep = scenario.episodes[0]
    return {
        "n": ep.n,
        "r": ep.r,
        "m": ep.m,
        "q": ep.q,
        "theta_degrees": [float(t) for t in scenario.theta_degrees],
        "change_times": [int(t) for t in scenario.change_times],
        "lambda_bar": [float(v) for v in ep.lambda_bar],
        "seed": scenario.seed,
    }


def scenario_from_dict(d):
    expected = {"n", "r", "m", "q", "theta_degrees", "change_times", "lambda_bar", "seed"}
    unknown = set(d) - expected
    if unknown:
        raise InvalidConfigError(f"unknown scenario fields: {sorted(unknown)}")
    scenario = generate_scenario(
        d["n"], d["r"], d["m"], d["q"], d["theta_degrees"],
        lambda_bar=d.get("lambda_bar"), seed=d["seed"],
    )
    if "change_times" in d and list(d["change_times"]) != scenario.change_times:
        raise InvalidConfigError("change_times must be consecutive multiples of q")
    return scenario


def save_scenario(scenario, path):
    with open(path, "w") as f:
        json.dump(scenario_to_dict(scenario), f, indent=2)
        f.write("\n")


def load_scenario(path):
    with open(path) as f:
        return scenario_from_dict(json.load(f))
