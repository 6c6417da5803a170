"""Linear-subspace primitives: orthonormal bases, projections, residuals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllZeroInput, DimensionMismatch, InvalidDims

RANK_TOL = 1e-8
ORTHO_TOL = 1e-12


@dataclass(frozen=True)
class Subspace:
    """A k-dimensional linear subspace of R^d, stored as an orthonormal basis.

    ``basis`` is a (d, k) matrix with orthonormal columns.
    """

    basis: np.ndarray

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=np.float64)
        if basis.ndim != 2:
            raise InvalidDims("basis must be a 2-d array")
        d, k = basis.shape
        if not (1 <= k <= d):
            raise InvalidDims(f"need 1 <= k <= d, got d={d}, k={k}")
        gram = basis.T @ basis
        if np.max(np.abs(gram - np.eye(k))) > 1e-10:
            raise InvalidDims("basis columns are not orthonormal")
        object.__setattr__(self, "basis", basis)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def intrinsic_dim(self) -> int:
        return self.basis.shape[1]


def orthonormalize(vectors, rank_tol: float = RANK_TOL) -> Subspace:
    """Build a Subspace spanning the given d-vectors.

    The intrinsic dimension is the numerical rank: singular values larger
    than ``rank_tol`` times the largest one.
    """
    mat = np.asarray(vectors, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] == 0:
        raise AllZeroInput("need a nonempty list of vectors")
    if np.max(np.linalg.norm(mat, axis=1)) < 1e-12:
        raise AllZeroInput("all input vectors are numerically zero")
    # SVD of the (m, d) stack; right singular vectors span the row space.
    _, s, vt = np.linalg.svd(mat, full_matrices=False)
    rank = int(np.sum(s > rank_tol * s[0]))
    if rank < 1:
        raise AllZeroInput("numerical rank is zero")
    return Subspace(basis=vt[:rank].T.copy())


def _check_ambient(s: Subspace, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != s.ambient_dim:
        raise DimensionMismatch(
            f"expected ambient dim {s.ambient_dim}, got {x.shape[-1]}"
        )
    return x


def project(s: Subspace, x) -> np.ndarray:
    """Orthogonal projection A A^T x onto the subspace.

    Accepts a single d-vector or a (..., d) batch.
    """
    x = _check_ambient(s, x)
    return (x @ s.basis) @ s.basis.T


def residual_norm(s: Subspace, x) -> np.ndarray:
    """Euclidean distance from x to the subspace, ||x - A A^T x||."""
    x = _check_ambient(s, x)
    return np.linalg.norm(x - project(s, x), axis=-1)


def random_subspace(d: int, k: int, rng: np.random.Generator) -> Subspace:
    """Span of k i.i.d. standard-Gaussian d-vectors (orthonormalized)."""
    if not (1 <= k <= d):
        raise InvalidDims(f"need 1 <= k <= d, got d={d}, k={k}")
    vecs = rng.standard_normal((k, d))
    s = orthonormalize(vecs)
    if s.intrinsic_dim != k:
        raise InvalidDims("gaussian vectors were rank deficient")
    return s


def subspaces_equal(a: Subspace, b: Subspace, tol: float = 1e-8) -> bool:
    """Basis-invariant equality: max-entry distance of the projectors."""
    if a.ambient_dim != b.ambient_dim:
        return False
    pa = a.basis @ a.basis.T
    pb = b.basis @ b.basis.T
    return bool(np.max(np.abs(pa - pb)) <= tol)
