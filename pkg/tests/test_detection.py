import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pst import detection, model
from pst.detection import DetectionSetup
from pst.exceptions import IndeterminateStatisticError

RUNS = 50


@pytest.fixture(scope="module")
def null_stats():
    setup = DetectionSetup(n=100, r=5, m=400, q=400, theta=0.0)
    return np.array([detection.draw_statistic(setup, 500 + k) for k in range(RUNS)])


@pytest.fixture(scope="module")
def wide_change_stats():
    setup = DetectionSetup(n=100, r=5, m=400, q=400, theta=np.deg2rad(75))
    return np.array([detection.draw_statistic(setup, 500 + k) for k in range(RUNS)])


@pytest.mark.xfail(strict=True, reason=(
    "finite-sample edge bias: with n=100, mq=1.6e5 the smallest eigenvalue of Y_U "
    "sits below tr(L) and the largest projected one above it, so the null "
    "statistic concentrates near 1.2, above the default C=1.15"))
def test_no_change_rarely_detected(null_stats):
    assert np.mean(null_stats < detection.DEFAULT_C) >= 0.9


def test_wide_change_detected(wide_change_stats):
    assert np.mean(wide_change_stats >= detection.DEFAULT_C) >= 0.9


def test_null_median_concentrates(null_stats):
    assert 0.8 <= np.median(null_stats) <= 1.3


def test_zero_threshold_always_detects(small_change):
    ep = small_change.episode
    out = detection.detect_change(ep.sensing, ep.magnitudes, small_change.u_prev, c=0.0)
    assert out.changed
    assert out.statistic >= 0


def test_outcome_matches_threshold(small_change):
    ep = small_change.episode
    out = detection.detect_change(ep.sensing, ep.magnitudes, small_change.u_prev, c=1.3)
    assert out.changed == (out.statistic >= out.threshold_c)


def test_threshold_is_a_step_function(small_change):
    ep = small_change.episode
    stat = detection.detection_statistic(ep.sensing, ep.magnitudes, small_change.u_prev)
    cs = np.linspace(0, 3, 61)
    flags = [detection.detect_change(ep.sensing, ep.magnitudes, small_change.u_prev, c).changed
             for c in cs]
    # true then false, switching once at the statistic
    assert flags == sorted(flags, reverse=True)
    assert all(f == (c <= stat) for f, c in zip(flags, cs))
    assert detection.detect_change(ep.sensing, ep.magnitudes, small_change.u_prev, stat).changed


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_statistic_ignores_basis_choice(seed):
    rng = np.random.default_rng(seed)
    draw = model.draw_change(15, 3, 40, 20, 0.6, rng=rng)
    ep = draw.episode
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    a = detection.detection_statistic(ep.sensing, ep.magnitudes, draw.u_prev)
    b = detection.detection_statistic(ep.sensing, ep.magnitudes, draw.u_prev @ q)
    assert a == pytest.approx(b, rel=1e-10)


def test_degenerate_yu_is_indeterminate():
    # every measurement vector lies in a 2-D plane of R^4
    sensing = np.zeros((3, 4, 6))
    sensing[:, :2, :] = np.random.default_rng(0).standard_normal((3, 2, 6))
    y = np.abs(np.random.default_rng(1).standard_normal((6, 3)))
    with pytest.raises(IndeterminateStatisticError):
        detection.detect_change(sensing, y, np.eye(4)[:, :1])


def test_roc_endpoints():
    with_change = DetectionSetup(n=20, r=2, m=30, q=20, theta=np.deg2rad(60))
    without = DetectionSetup(n=20, r=2, m=30, q=20, theta=0.0)
    pts = detection.roc_curve(with_change, without, [0.0, 1.0, 1e6], runs=5, seed=3)
    assert (pts[0].false_positive_rate, pts[0].true_positive_rate) == (1.0, 1.0)
    assert (pts[-1].false_positive_rate, pts[-1].true_positive_rate) == (0.0, 0.0)
    for a, b in zip(pts, pts[1:]):
        assert b.true_positive_rate <= a.true_positive_rate
        assert b.false_positive_rate <= a.false_positive_rate


def test_roc_rates_are_counts():
    pts = detection.roc_from_statistics([1.0, 2.0, 3.0, 4.0], [0.5, 1.5], [1.5, 2.5])
    assert pts[0].true_positive_rate == 0.75 and pts[0].false_positive_rate == 0.5
    assert pts[1].true_positive_rate == 0.5 and pts[1].false_positive_rate == 0.0


def test_auc_of_perfect_and_chance_curves():
    perfect = [detection.RocPoint(1.0, 1.0, 0.0)]
    assert detection.auc(perfect) == pytest.approx(1.0)
    chance = [detection.RocPoint(c, c, c) for c in np.linspace(0, 1, 11)]
    assert detection.auc(chance) == pytest.approx(0.5)


@pytest.mark.slow
def test_wider_angles_are_easier_to_detect():
    grid = np.linspace(0, 3, 301)
    base = dict(n=200, r=10, m=300, q=300)

    def stats(deg):
        setup = DetectionSetup(theta=np.deg2rad(deg), **base)
        return [detection.draw_statistic(setup, k) for k in range(RUNS)]

    null = stats(0)
    areas = [detection.auc(detection.roc_from_statistics(stats(d), null, grid))
             for d in (30, 75)]
    assert areas[1] >= areas[0]
