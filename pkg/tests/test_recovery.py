import numpy as np
import pytest

from uosdiff import geometry, recovery, target
from uosdiff.errors import BudgetExceeded, EmptyRecovery


def sample_union(d, m, k, n, seed):
    rng = np.random.default_rng(seed)
    subs = []
    while len(subs) < m:
        cand = geometry.random_subspace(d, k, rng)
        if all(not geometry.subspaces_equal(cand, s) for s in subs):
            subs.append(cand)
    labels = rng.integers(0, m, n)
    coeffs = rng.standard_normal((n, k))
    x = np.stack([subs[i].basis @ c for i, c in zip(labels, coeffs)])
    return subs, x, labels


def match_recovered(true_subs, found_subs):
    """Map each true subspace to an equal recovered one, or fail."""
    mapping = {}
    for i, s in enumerate(true_subs):
        hits = [j for j, f in enumerate(found_subs)
                if geometry.subspaces_equal(s, f)]
        assert len(hits) == 1
        mapping[i] = hits[0]
    return mapping


def test_recover_two_lines_in_plane():
    # explicit tiny instance: 2 lines in R^2, 3 points each
    pts = np.array([[1.0, 0.0], [2.0, 0.0], [-3.0, 0.0],
                    [0.0, 1.0], [0.0, -2.0], [0.0, 5.0]])
    res = recovery.recover(pts, m_max=2, k_max=1,
                           rng=np.random.default_rng(0))
    assert res.n_subspaces == 2
    assert res.unassigned == []
    # points on the same line share a component index
    assert len(set(res.assignments[:3])) == 1
    assert len(set(res.assignments[3:])) == 1
    assert res.assignments[0] != res.assignments[3]


def test_recover_exact_union():
    subs, x, labels = sample_union(d=8, m=3, k=2, n=60, seed=5)
    res = recovery.recover(x, m_max=3, k_max=2,
                           rng=np.random.default_rng(5))
    assert res.n_subspaces == 3
    mapping = match_recovered(subs, res.subspaces)
    for i in range(3):
        assert np.all(res.assignments[labels == i] == mapping[i])
    assert res.unassigned == []


def test_recover_oversized_subset_shrinks_to_minimal():
    # k_max=3 but the data lies on lines: every found dependent 4-subset
    # must shrink to a minimal subset spanning a single line
    subs, x, labels = sample_union(d=6, m=2, k=1, n=40, seed=7)
    res = recovery.recover(x, m_max=2, k_max=3,
                           rng=np.random.default_rng(7))
    assert res.n_subspaces == 2
    assert all(s.intrinsic_dim == 1 for s in res.subspaces)
    match_recovered(subs, res.subspaces)


def test_recover_zero_vectors_assigned_to_first_component():
    pts = np.array([[1.0, 0.0], [2.0, 0.0], [0.0, 0.0],
                    [0.0, 1.0], [0.0, 3.0], [4.0, 0.0]])
    res = recovery.recover(pts, m_max=2, k_max=1,
                           rng=np.random.default_rng(1))
    assert res.assignments[2] == 0
    assert res.unassigned == []


def test_recover_deterministic_given_rng_seed():
    _, x, _ = sample_union(d=8, m=3, k=2, n=80, seed=11)
    a = recovery.recover(x, m_max=3, k_max=2, rng=np.random.default_rng(3))
    b = recovery.recover(x, m_max=3, k_max=2, rng=np.random.default_rng(3))
    assert np.array_equal(a.assignments, b.assignments)
    for sa, sb in zip(a.subspaces, b.subspaces):
        assert np.array_equal(sa.basis, sb.basis)


def test_recover_budget_exhaustion():
    # samples in general position: no dependent subset exists, so the
    # search must stop (either exhausts the enumeration or the cap)
    rng = np.random.default_rng(2)
    x = rng.standard_normal((30, 10))
    with pytest.raises(BudgetExceeded):
        recovery.recover(x, m_max=2, k_max=2,
                         rng=np.random.default_rng(0), subset_cap=100)


def test_recover_general_position_finds_nothing():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((12, 10))
    res = recovery.recover(x, m_max=2, k_max=2,
                           rng=np.random.default_rng(0))
    assert res.n_subspaces == 0
    assert res.unassigned == list(range(12))


def test_recover_input_validation():
    with pytest.raises(ValueError):
        recovery.recover(np.zeros((0, 3)), m_max=1, k_max=1)
    with pytest.raises(ValueError):
        recovery.recover(np.ones((4, 3)), m_max=0, k_max=1)


def test_classify_nearest_subspace():
    subs = [geometry.orthonormalize([[1.0, 0.0]]),
            geometry.orthonormalize([[0.0, 1.0]])]
    res = recovery.RecoveryResult(subspaces=subs,
                                  assignments=np.zeros(0, dtype=np.int64),
                                  unassigned=[])
    assert recovery.classify(res, np.array([3.0, 0.1])) == 0
    assert recovery.classify(res, np.array([0.1, 3.0])) == 1
    # exact tie resolves to the lowest index
    assert recovery.classify(res, np.array([1.0, 1.0])) == 0
    batch = recovery.classify(res, np.array([[3.0, 0.1], [0.1, 3.0]]))
    assert np.array_equal(batch, [0, 1])


def test_classify_empty_raises():
    res = recovery.RecoveryResult(subspaces=[],
                                  assignments=np.zeros(0, dtype=np.int64),
                                  unassigned=[])
    with pytest.raises(EmptyRecovery):
        recovery.classify(res, np.zeros(2))


def test_classify_matches_brute_force_residuals():
    rng = np.random.default_rng(8)
    subs = [geometry.random_subspace(6, 2, rng) for _ in range(4)]
    res = recovery.RecoveryResult(subspaces=subs,
                                  assignments=np.zeros(0, dtype=np.int64),
                                  unassigned=[])
    x = rng.standard_normal((50, 6))
    got = recovery.classify(res, x)
    for row, g in zip(x, got):
        resid = [geometry.residual_norm(s, row) for s in subs]
        assert g == int(np.argmin(resid))


def test_required_n0_values():
    # ceil(1 * 3^2 * 2 * log(1000)) = ceil(124.33...) = 125
    assert recovery.required_n0(3, 2, 1000) == 125
    # capped at n // 2
    assert recovery.required_n0(10, 5, 100) == 50
    # scales linearly in c_sc before the cap
    assert recovery.required_n0(2, 2, 10**6, c_sc=0.5) == int(
        np.ceil(0.5 * 4 * 2 * np.log(10**6)))
    with pytest.raises(ValueError):
        recovery.required_n0(0, 1, 10)


def test_full_pipeline_on_sampled_target():
    rng = np.random.default_rng(21)
    tgt = target.random_target(8, 3, 2, rng)
    x = target.sample(tgt, 80, rng)
    res = recovery.recover(x, m_max=3, k_max=2, rng=np.random.default_rng(21))
    assert res.n_subspaces == 3
    match_recovered([c.subspace for c in tgt.components], res.subspaces)
    fresh = target.sample(tgt, 40, rng)
    labels = recovery.classify(res, fresh)
    resid = np.stack([geometry.residual_norm(s, fresh)
                      for s in res.subspaces], axis=1)
    assert np.all(resid[np.arange(40), labels] <= recovery.assign_tol(fresh))
