import numpy as np
import pytest
from scipy.special import logsumexp

from uosdiff import clock, estimator, geometry, target
from uosdiff.errors import (DimensionMismatch, EmptyComponent,
                            NonpositiveTime)


def axes_model(d=4, k=2, n_per=20, seed=0, regularized=True, m=1):
    """Samples on coordinate-axis subspaces of R^d."""
    rng = np.random.default_rng(seed)
    subs, chunks, labels = [], [], []
    for i in range(m):
        basis = np.eye(d)[i * k:(i + 1) * k]
        subs.append(geometry.orthonormalize(basis))
        u = rng.standard_normal((n_per, k))
        chunks.append(u @ basis)
        labels.append(np.full(n_per, i))
    return estimator.train(subs, np.concatenate(chunks),
                           np.concatenate(labels), regularized=regularized)


def naive_log_kde(x, pts, t):
    """Direct log of (1/N) sum_j phi_t(x - P_j), no chunking or tricks."""
    k = pts.shape[-1]
    sq = np.sum((x[None, :] - pts) ** 2, axis=1)
    return (logsumexp(-sq / (2 * t)) - np.log(len(pts))
            - 0.5 * k * np.log(2 * np.pi * t))


def test_low_dim_kde_matches_naive_oracle():
    model = axes_model(seed=1)
    rng = np.random.default_rng(2)
    pts = model.low[0]
    for t in (0.05, 0.5):
        u = rng.standard_normal((700, 2))  # more queries than one chunk
        log_g, ratio = model.low_dim_kde(0, t, u)
        for idx in rng.choice(700, 25, replace=False):
            assert log_g[idx] == pytest.approx(
                naive_log_kde(u[idx], pts, t), rel=1e-10)


def test_low_dim_kde_gradient_is_finite_difference_of_log_density():
    model = axes_model(seed=3)
    u = np.array([0.3, -0.7])
    t = 0.2
    _, ratio = model.low_dim_kde(0, t, u)
    step = 1e-6
    for j in range(2):
        e = np.zeros(2)
        e[j] = step
        gp, _ = model.low_dim_kde(0, t, u + e)
        gm, _ = model.low_dim_kde(0, t, u - e)
        assert ratio[j] == pytest.approx((gp - gm) / (2 * step), abs=1e-5)


def test_two_sample_softmax_closed_form():
    # points {+a, -a} on a line: grad log density = (a tanh(a u / t) - u) / t
    a = 1.5
    sub = geometry.orthonormalize([[1.0, 0.0, 0.0]])
    samples = np.array([[a, 0.0, 0.0], [-a, 0.0, 0.0]])
    model = estimator.train([sub], samples, [0, 0], regularized=False)
    t = 0.4
    for u in (0.0, 0.3, -1.2):
        got = model.low_dim_score(0, t, np.array([u]))
        expected = (a * np.tanh(a * u / t) - u) / t
        assert got[0] == pytest.approx(expected, rel=1e-12)


def test_clip_radius_bounds_low_dim_score():
    model = axes_model(seed=4)
    rng = np.random.default_rng(5)
    for t in (1e-4, 1e-2, 0.5):
        u = rng.uniform(-50, 50, (200, 2))
        s = model.low_dim_score(0, t, u)
        assert np.max(np.linalg.norm(s, axis=1)) <= model.clip_radius(t) * (1 + 1e-12)


def test_threshold_zeroes_low_density_queries():
    model = axes_model(seed=6)
    t = 0.01
    far = np.full((1, 2), 100.0)  # log-density far below the floor
    log_g, _ = model.low_dim_kde(0, t, far)
    assert log_g[0] < model.log_threshold(t, 2)
    assert np.all(model.low_dim_score(0, t, far) == 0.0)
    # with regularization off the raw ratio comes through
    raw = axes_model(seed=6, regularized=False)
    assert np.any(raw.low_dim_score(0, t, far) != 0.0)


def test_hyperparameter_formulas():
    model = axes_model(n_per=50, seed=7)  # N = 50
    n = 50
    t, k, d = 0.2, 2, 4
    assert model.clip_radius(t) == pytest.approx(np.sqrt(2 * np.log(n) / t))
    assert model.log_threshold(t, k) == pytest.approx(
        np.log(np.log(n) / (n * (2 * np.pi * t) ** (k / 2))))
    assert model.tube_radius(t, k) == pytest.approx(
        2.0 * np.sqrt(t * d * np.log(n * d * t ** (k / 2))))
    # tiny t: the log argument clamps at e^2 instead of going negative
    t_small = 1e-12
    assert model.tube_radius(t_small, k) == pytest.approx(
        2.0 * np.sqrt(t_small * d * 2.0))


def test_ambient_kde_component_sums_match_total():
    model = axes_model(d=6, k=2, m=3, seed=8)
    rng = np.random.default_rng(9)
    x = rng.standard_normal((30, 6))
    log_p, log_q = model.ambient_kde(0.3, x)
    assert np.allclose(logsumexp(log_q, axis=1), log_p, rtol=1e-12)
    # and against the naive full-sample oracle
    for idx in (0, 7, 29):
        assert log_p[idx] == pytest.approx(
            naive_log_kde(x[idx], model.samples, 0.3), rel=1e-10)


def test_weights_form_a_subprobability_vector():
    model = axes_model(d=6, k=2, m=3, seed=10)
    rng = np.random.default_rng(11)
    x = rng.standard_normal((100, 6)) * 2
    t = 0.2
    w = np.stack([model.weight(i, t, x) for i in range(3)], axis=1)
    assert np.all(w >= 0.0)
    assert np.all(w.sum(axis=1) <= 1.0 + 1e-12)
    # on-subspace points sit inside every relevant tube: weights sum to 1
    on = model.samples[:20]
    w_on = np.stack([model.weight(i, t, on) for i in range(3)], axis=1)
    tubes = model.in_tube(t, on)
    full_rows = np.all(tubes | (w_on == 0.0), axis=1) & np.all(tubes, axis=1)
    assert np.allclose(w_on[full_rows].sum(axis=1), 1.0, rtol=1e-12)


def test_tube_indicator_zeroes_far_weights():
    model = axes_model(d=4, k=2, m=2, seed=12)
    t = 1e-3
    # a point far from subspace 0 but close to subspace 1
    x = np.zeros(4)
    x[2] = 5.0
    assert model.weight(0, t, x) == 0.0
    assert model.weight(1, t, x) > 0.0


def test_unregularized_score_is_exact_kde_score():
    # with thresholding/clipping/tubes off, the combined score must equal
    # the gradient of log of the ambient kernel density exactly
    model = axes_model(d=5, k=2, m=2, seed=13, regularized=False)
    rng = np.random.default_rng(14)
    t = 0.3
    for _ in range(10):
        x = rng.standard_normal(5)
        got = model.full_score(t, x)
        sq = np.sum((x[None, :] - model.samples) ** 2, axis=1)
        logk = -sq / (2 * t)
        resp = np.exp(logk - logsumexp(logk))
        exact = (resp @ model.samples - x) / t
        assert np.allclose(got, exact, rtol=1e-9, atol=1e-12)


def test_unregularized_score_matches_finite_difference_log_density():
    model = axes_model(d=4, k=1, m=2, seed=15, regularized=False)
    x = np.array([0.5, -0.3, 0.8, 0.1])
    t = 0.25
    got = model.full_score(t, x)
    step = 1e-6
    for j in range(4):
        e = np.zeros(4)
        e[j] = step
        lp_p, _ = model.ambient_kde(t, x + e)
        lp_m, _ = model.ambient_kde(t, x - e)
        assert got[j] == pytest.approx((lp_p - lp_m) / (2 * step), abs=1e-5)


def test_full_score_skips_empty_and_inactive_components():
    model = axes_model(d=4, k=2, m=2, seed=16)
    t = 1e-3
    x = np.zeros(4)
    x[0] = 1.0  # on subspace 0, far from subspace 1's tube at tiny t
    tubes = model.in_tube(t, x[None])
    assert tubes[0, 0] and not tubes[0, 1]
    out = model.full_score(t, x)
    assert np.all(np.isfinite(out))


def test_vp_score_relation():
    model = axes_model(seed=17)
    rng = np.random.default_rng(18)
    x = rng.standard_normal(4)
    for t in (0.05, 0.7):
        ct = float(clock.c(t))
        expected = model.full_score(float(clock.h(t)), x / ct) / ct
        assert np.allclose(model.vp_score(t, x), expected, rtol=1e-12)


def test_save_load_round_trip_bit_exact(tmp_path):
    model = axes_model(d=5, k=2, m=2, seed=19)
    path = tmp_path / "model.bin"
    model.save(path)
    loaded = estimator.TrainedScoreModel.load(path)
    assert loaded.ambient_dim == 5 and loaded.n_components == 2
    rng = np.random.default_rng(20)
    x = rng.standard_normal((8, 5))
    assert np.array_equal(model.full_score(0.2, x), loaded.full_score(0.2, x))
    for a, b in zip(model.subspaces, loaded.subspaces):
        assert np.array_equal(a.basis, b.basis)


def test_train_classifies_unlabeled_samples_by_residual():
    rng = np.random.default_rng(21)
    tgt = target.random_target(6, 3, 2, rng)
    x, labels = target.sample(tgt, 90, rng, return_labels=True)
    model = estimator.train([c.subspace for c in tgt.components], x)
    assert np.array_equal(model.labels, labels)


def test_error_conditions():
    model = axes_model(seed=22)
    with pytest.raises(NonpositiveTime):
        model.full_score(0.0, np.zeros(4))
    with pytest.raises(DimensionMismatch):
        model.full_score(0.1, np.zeros(3))
    with pytest.raises(DimensionMismatch):
        model.low_dim_score(0, 0.1, np.zeros(3))
    empty = estimator.TrainedScoreModel(
        subspaces=[geometry.orthonormalize([[1.0, 0.0]]),
                   geometry.orthonormalize([[0.0, 1.0]])],
        samples=np.array([[1.0, 0.0], [2.0, 0.0]]),
        labels=np.array([0, 0]))
    with pytest.raises(EmptyComponent):
        empty.low_dim_kde(1, 0.1, np.zeros(1))
    with pytest.raises(ValueError):
        estimator.TrainedScoreModel(subspaces=[], samples=np.ones((2, 2)),
                                    labels=np.array([0, 0]))


def test_score_outputs_always_finite():
    model = axes_model(d=4, k=2, m=2, seed=23)
    rng = np.random.default_rng(24)
    for t in (1e-6, 1e-3, 0.1, 5.0):
        x = rng.uniform(-20, 20, (50, 4))
        out = model.full_score(t, x)
        assert np.all(np.isfinite(out))
        out_vp = model.vp_score(t, x)
        assert np.all(np.isfinite(out_vp))
