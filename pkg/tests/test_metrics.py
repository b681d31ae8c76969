import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import ortho_group

from pst.exceptions import InvalidDimensionError
from pst.metrics import error_report, norm_err, phase_invariant_dist, subspace_error
from pst.model import generate_subspace


def test_self_distance_is_zero(rng):
    u = generate_subspace(30, 4, rng)
    assert subspace_error(u, u) == pytest.approx(0.0, abs=1e-12)


def test_orthogonal_vectors_have_unit_error():
    e1, e2 = np.eye(5)[:, 0], np.eye(5)[:, 1]
    assert subspace_error(e2, e1) == pytest.approx(1.0, abs=1e-12)


def test_rotated_vector_error_is_sine():
    theta = np.pi / 4
    u_chg = np.eye(6)[:, 0]
    u_chd = np.cos(theta) * u_chg + np.sin(theta) * np.eye(6)[:, 3]
    assert subspace_error(u_chg, u_chd) == pytest.approx(np.sin(theta), abs=1e-8)


def test_subspace_error_matches_projector_formula(rng):
    a = generate_subspace(20, 3, rng)
    b = generate_subspace(20, 3, rng)
    dense = np.linalg.norm((np.eye(20) - a @ a.T) @ b, 2)
    assert subspace_error(a, b) == pytest.approx(dense, abs=1e-12)


def test_subspace_error_dimension_mismatch():
    with pytest.raises(InvalidDimensionError):
        subspace_error(np.eye(4)[:, :2], np.eye(5)[:, :2])


def test_larger_basis_containing_subspace_has_zero_error(rng):
    big = generate_subspace(25, 6, rng)
    inner = big @ generate_subspace(6, 4, rng)
    assert subspace_error(big, inner) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(3, 30), data=st.data())
def test_subspace_error_symmetric_for_equal_rank(seed, n, data):
    r = data.draw(st.integers(1, n - 1))
    rng = np.random.default_rng(seed)
    a, b = generate_subspace(n, r, rng), generate_subspace(n, r, rng)
    assert abs(subspace_error(a, b) - subspace_error(b, a)) <= 1e-8


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(4, 25), data=st.data())
def test_subspace_error_invariant_to_basis_rotation(seed, n, data):
    r = data.draw(st.integers(2, n - 1))
    rng = np.random.default_rng(seed)
    a, b = generate_subspace(n, r, rng), generate_subspace(n, r, rng)
    rot = ortho_group.rvs(r, random_state=seed)
    base = subspace_error(a, b)
    assert subspace_error(a @ rot, b) == pytest.approx(base, abs=1e-10)
    assert subspace_error(a, b @ rot) == pytest.approx(base, abs=1e-10)


def test_dist_examples(rng):
    z = rng.standard_normal(7)
    assert phase_invariant_dist(z, z) == 0.0
    assert phase_invariant_dist(z, -z) == 0.0
    # both sign branches give sqrt(2); evaluate them directly as the oracle
    a, b = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    oracle = min(np.linalg.norm(a - b), np.linalg.norm(a + b))
    assert phase_invariant_dist(a, b) == pytest.approx(oracle, abs=1e-12)
    assert oracle == pytest.approx(np.sqrt(2), abs=1e-12)


def test_dist_length_mismatch():
    with pytest.raises(InvalidDimensionError):
        phase_invariant_dist(np.ones(3), np.ones(4))


def test_norm_err_examples(rng):
    x = rng.standard_normal((10, 6))
    assert norm_err(x, x) == 0.0
    assert norm_err(x, -x) == 0.0
    assert norm_err(x, np.zeros_like(x)) == pytest.approx(1.0, abs=1e-15)


def test_norm_err_zero_truth_is_undefined():
    with pytest.raises(ZeroDivisionError):
        norm_err(np.zeros((3, 2)), np.ones((3, 2)))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), flips=st.lists(st.booleans(), min_size=6, max_size=6))
def test_norm_err_invariant_to_column_sign_flips(seed, flips):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((8, 6))
    xh = x + 0.1 * rng.standard_normal((8, 6))
    signs = np.where(flips, -1.0, 1.0)
    assert norm_err(x, xh * signs) == pytest.approx(norm_err(x, xh), rel=1e-12, abs=1e-15)


def test_error_report_fields(rng):
    u = generate_subspace(12, 2, rng)
    x = u @ rng.standard_normal((2, 5))
    rep = error_report(u, u, x, -x)
    assert 0.0 <= rep.se <= 1e-12
    assert rep.norm_err == 0.0
    assert rep.per_column_dist.shape == (5,)
