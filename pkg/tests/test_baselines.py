import numpy as np
import pytest

from pst import _altmin, baselines, model, pstpca
from pst.baselines import BaselineConfig
from pst.exceptions import InvalidConfigError, RankDeficiencyError
from pst.metrics import norm_err, phase_invariant_dist


def _episode(n, r, m, q, seed, lambda_bar=None):
    rng = np.random.default_rng(seed)
    u = model.generate_subspace(n, r, rng)
    return model.make_episode(u, q, m, lambda_bar, rng)


def test_config_validation():
    with pytest.raises(InvalidConfigError):
        BaselineConfig(step_size=0.0)
    with pytest.raises(InvalidConfigError):
        BaselineConfig(max_iters=-1)


def test_lrpr_fixed_point():
    ep = _episode(40, 3, 60, 50, 1)
    res = baselines.lrpr_altmin(ep, 3, BaselineConfig(max_iters=1),
                                warm_start=(ep.u_true, ep.coeffs))
    assert norm_err(ep.signals, res.x_hat) <= 1e-8


def test_lrpr_rejects_too_few_measurements():
    ep = _episode(40, 3, 2, 50, 2)
    with pytest.raises(RankDeficiencyError):
        baselines.lrpr_altmin(ep, 3)


@pytest.mark.slow
def test_lrpr_error_trend():
    ok = 0
    for seed in range(20):
        ep = _episode(200, 5, 250, 300, 700 + seed)
        res = baselines.lrpr_altmin(ep, 5)
        ok += res.trace[15].norm_err <= res.trace[1].norm_err
    assert ok >= 16


def _u_block_reference(sensing, targets, b):
    # stacked least squares over all (i, t) pairs, column-major unknown
    q, n, m = sensing.shape
    r = b.shape[0]
    rows = [np.kron(b[:, t], sensing[t, :, i]) for t in range(q) for i in range(m)]
    rhs = [targets[i, t] for t in range(q) for i in range(m)]
    vec = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)[0]
    return vec.reshape(r, n).T


@pytest.mark.parametrize("force_cg", [False, True])
def test_u_block_matches_stacked_least_squares(force_cg, monkeypatch, rng):
    q, n, m, r = 12, 7, 9, 2
    sensing = rng.standard_normal((q, n, m))
    targets = rng.standard_normal((m, q))
    b = rng.standard_normal((r, q))
    if force_cg:
        monkeypatch.setattr(baselines, "DENSE_U_LIMIT", 0)
    got = baselines.solve_u_block(sensing, targets, b)
    assert np.allclose(got, _u_block_reference(sensing, targets, b), atol=1e-8)


def test_lrpr_blockwise_loss_is_monotone():
    ep = _episode(50, 3, 80, 60, 5)
    u, _ = np.linalg.qr(ep.u_true + 0.3 * np.random.default_rng(0).standard_normal((50, 3)))
    proj = _altmin.project(ep.sensing, u)
    b = _altmin.spectral_coeffs(proj, ep.magnitudes)
    for _ in range(4):
        phases = _altmin.phases_from_projection(proj, b)
        targets = phases * ep.magnitudes
        before = _altmin.fit_loss(proj, b, targets)
        u_raw = baselines.solve_u_block(ep.sensing, targets, b)
        u, b = baselines._qr_absorb(u_raw, b)
        proj = _altmin.project(ep.sensing, u)
        mid = _altmin.fit_loss(proj, b, targets)
        b = _altmin.ls_coeffs(proj, targets)
        after = _altmin.fit_loss(proj, b, targets)
        assert mid <= before * (1 + 1e-10) + 1e-12
        assert after <= mid * (1 + 1e-10) + 1e-12


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason=(
    "at mq/nr = 75 the spectral start of LRPR-AltMin is already in the basin of "
    "attraction and fifteen exact least-squares sweeps drive its error to round-off, "
    "below what the warm start reaches after its shorter full-subspace phase"))
def test_warm_start_beats_spectral_start():
    warm, cold = [], []
    for seed in range(20):
        draw = model.draw_change(200, 5, 250, 300, np.deg2rad(30), rng=900 + seed)
        ep = draw.episode
        u0 = model.perturb_subspace(draw.u_prev, 1e-3, seed)
        pst = pstpca.run_pst_pca(ep, u0, 12, track=False)
        warm.append(norm_err(ep.signals, pstpca.refine_with_lrpr(pst, ep, 3, track=False).x_hat))
        cold.append(norm_err(ep.signals, baselines.lrpr_altmin(ep, 5, track=False).x_hat))
    assert np.median(warm) < np.median(cold)


def test_wf_zero_data(rng):
    a = rng.standard_normal((10, 40))
    assert np.all(baselines.wf_single(a, np.zeros(40)) == 0)


def test_wf_recovers_at_eight_n():
    ok = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(100)
        a = rng.standard_normal((100, 800))
        est = baselines.wf_single(a, np.abs(a.T @ x))
        ok += phase_invariant_dist(est, x) / np.linalg.norm(x) <= 1e-3
    assert ok >= 14


def test_wf_fails_below_n_per_column():
    ep = _episode(1000, 15, 700, 4, 3)
    res = baselines.wf_columns(ep, 4, BaselineConfig(max_iters=200))
    assert res.trace[-1].norm_err >= 0.5


def test_wf_loss_never_increases(rng):
    x = rng.standard_normal(30)
    a = rng.standard_normal((30, 90))
    y2 = np.abs(a.T @ x) ** 2
    losses = []

    def on_iter(_, xs):
        z = a.T @ xs[:, 0]
        losses.append(np.sum((z**2 - y2) ** 2) / (4 * 90))

    baselines._wf_batch(a[None], np.sqrt(y2)[:, None],
                        BaselineConfig(max_iters=60, step_size=0.5), on_iter)
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


@pytest.mark.parametrize("solver", ["lrpr", "wf"])
def test_baselines_are_sign_invariant(solver):
    ep = _episode(30, 2, 90, 20, 8)
    flipped = model.Episode(ep.u_true, -ep.coeffs, -ep.signals, ep.sensing, ep.magnitudes,
                            ep.lambda_bar)
    if solver == "lrpr":
        run = lambda e: baselines.lrpr_altmin(e, 2, BaselineConfig(max_iters=3))
    else:
        run = lambda e: baselines.wf_columns(e, 2, BaselineConfig(max_iters=20))
    assert run(ep).trace[-1].norm_err == pytest.approx(run(flipped).trace[-1].norm_err,
                                                      rel=1e-12, abs=1e-15)
