import numpy as np
import pytest

from uosdiff import geometry
from uosdiff.errors import AllZeroInput, DimensionMismatch, InvalidDims


def test_orthonormalize_single_axis():
    s = geometry.orthonormalize([[1.0, 0.0, 0.0]])
    assert s.intrinsic_dim == 1
    assert np.allclose(np.abs(s.basis[:, 0]), [1, 0, 0])


def test_orthonormalize_dependent_triple():
    e1 = [1.0, 0.0, 0.0]
    e2 = [0.0, 1.0, 0.0]
    s = geometry.orthonormalize([e1, [2.0, 0.0, 0.0], e2])
    assert s.intrinsic_dim == 2
    # span equals the e1-e2 plane
    proj = s.basis @ s.basis.T
    assert np.allclose(proj, np.diag([1.0, 1.0, 0.0]), atol=1e-12)


def test_orthonormalize_rank_matches_svd_oracle():
    rng = np.random.default_rng(7)
    vecs = rng.standard_normal((5, 4))
    s = geometry.orthonormalize(vecs)
    # independent oracle: numerical rank by SVD of the raw stack
    sv = np.linalg.svd(vecs, compute_uv=False)
    assert s.intrinsic_dim == int(np.sum(sv > 1e-8 * sv[0])) == 4


def test_orthonormalize_all_zero():
    with pytest.raises(AllZeroInput):
        geometry.orthonormalize([[0.0, 0.0], [1e-13, 0.0]])


def test_orthonormality_invariant():
    rng = np.random.default_rng(3)
    for _ in range(20):
        s = geometry.orthonormalize(rng.standard_normal((3, 6)))
        gram = s.basis.T @ s.basis
        assert np.max(np.abs(gram - np.eye(s.intrinsic_dim))) <= 1e-12


def test_project_axis():
    s = geometry.orthonormalize([[1.0, 0.0]])
    assert np.allclose(geometry.project(s, [3.0, 4.0]), [3.0, 0.0])


def test_project_fixed_point_and_idempotent():
    rng = np.random.default_rng(11)
    s = geometry.random_subspace(6, 3, rng)
    inside = s.basis @ rng.standard_normal(3)
    assert np.allclose(geometry.project(s, inside), inside, atol=1e-12)
    for _ in range(10):
        x = rng.standard_normal(6)
        p = geometry.project(s, x)
        assert np.allclose(geometry.project(s, p), p, atol=1e-10)


def test_project_self_adjoint():
    rng = np.random.default_rng(12)
    s = geometry.random_subspace(5, 2, rng)
    for _ in range(10):
        x, y = rng.standard_normal((2, 5))
        lhs = np.dot(geometry.project(s, x), y)
        rhs = np.dot(x, geometry.project(s, y))
        assert abs(lhs - rhs) <= 1e-10


def test_project_dimension_mismatch():
    s = geometry.orthonormalize([[1.0, 0.0]])
    with pytest.raises(DimensionMismatch):
        geometry.project(s, [1.0, 2.0, 3.0])


def test_residual_norm_pythagorean_example():
    s = geometry.orthonormalize([[1.0, 0.0]])
    assert geometry.residual_norm(s, [3.0, 4.0]) == pytest.approx(4.0)
    assert geometry.residual_norm(s, geometry.project(s, [3.0, 4.0])) <= 1e-10


def test_residual_norm_matches_matrix_formula():
    rng = np.random.default_rng(21)
    s = geometry.random_subspace(4, 2, rng)
    for _ in range(10):
        x = rng.standard_normal(4)
        direct = np.linalg.norm((np.eye(4) - s.basis @ s.basis.T) @ x)
        assert geometry.residual_norm(s, x) == pytest.approx(direct, abs=1e-12)


def test_pythagorean_identity():
    rng = np.random.default_rng(22)
    s = geometry.random_subspace(7, 4, rng)
    for _ in range(20):
        x = rng.standard_normal(7)
        lhs = np.dot(x, x)
        rhs = (np.linalg.norm(geometry.project(s, x)) ** 2
               + geometry.residual_norm(s, x) ** 2)
        assert lhs == pytest.approx(rhs, rel=1e-9)


def test_random_subspace_full_space():
    s = geometry.random_subspace(3, 3, np.random.default_rng(5))
    x = np.array([0.3, -1.2, 2.0])
    assert np.allclose(geometry.project(s, x), x, atol=1e-12)


def test_random_subspace_paper_scale_dims():
    s = geometry.random_subspace(48, 3, np.random.default_rng(6))
    assert (s.ambient_dim, s.intrinsic_dim) == (48, 3)
    assert np.max(np.abs(s.basis.T @ s.basis - np.eye(3))) <= 1e-12


def test_random_subspace_deterministic():
    a = geometry.random_subspace(10, 4, np.random.default_rng(42))
    b = geometry.random_subspace(10, 4, np.random.default_rng(42))
    assert np.array_equal(a.basis, b.basis)


def test_random_subspace_invalid_dims():
    with pytest.raises(InvalidDims):
        geometry.random_subspace(3, 4, np.random.default_rng(0))


def test_subspaces_equal_is_basis_invariant():
    rng = np.random.default_rng(8)
    s = geometry.random_subspace(5, 2, rng)
    # re-span with a random mixing of the basis columns
    mix = s.basis @ rng.standard_normal((2, 2))
    other = geometry.orthonormalize(mix.T)
    assert geometry.subspaces_equal(s, other)
    assert not geometry.subspaces_equal(s, geometry.random_subspace(5, 2, rng))
