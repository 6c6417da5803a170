"""Exact subspace recovery from noiseless samples.

Each round finds k_max+1 linearly dependent samples among the remainder,
shrinks them to a minimal dependent subset by greedy elimination, spans the
recovered subspace, and removes every remaining sample lying on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import BudgetExceeded, EmptyRecovery
from .geometry import Subspace, orthonormalize, residual_norm, subspaces_equal

RANK_TOL = 1e-8
POOL_FACTOR = 40
SUBSET_CAP = 10**6
# Below this many subsets we enumerate exhaustively instead of sampling.
_EXHAUSTIVE_LIMIT = 200_000


@dataclass(frozen=True)
class RecoveryResult:
    """Recovered subspaces plus per-sample component assignments.

    ``assignments`` holds the component index for each input sample, or -1
    for samples left over; ``unassigned`` lists those indices.
    """

    subspaces: list
    assignments: np.ndarray
    unassigned: list

    @property
    def n_subspaces(self) -> int:
        return len(self.subspaces)


def assign_tol(x: np.ndarray) -> np.ndarray:
    """Residual tolerance 1e-8 * (1 + ||x||) for noiseless membership."""
    return 1e-8 * (1.0 + np.linalg.norm(np.atleast_2d(x), axis=-1))


def _is_dependent(vectors: np.ndarray) -> bool:
    """Numerical rank < count, with singular values relative to the largest."""
    if len(vectors) < 2:
        return False
    s = np.linalg.svd(vectors, compute_uv=False)
    if s[0] < 1e-12:
        return True
    return bool(np.sum(s > RANK_TOL * s[0]) < len(vectors))


def _minimal_dependent(vectors: np.ndarray) -> np.ndarray:
    """Greedy elimination: drop one vector at a time while still dependent."""
    current = list(range(len(vectors)))
    changed = True
    while changed and len(current) > 2:
        changed = False
        for drop in list(current):
            trial = [i for i in current if i != drop]
            if _is_dependent(vectors[trial]):
                current = trial
                changed = True
                break
    return vectors[current]


def _iter_subsets(pool_size: int, size: int, rng: np.random.Generator,
                  budget: list):
    """Yield index tuples of the given size, spending the shared budget.

    Exhaustive (shuffled) when the total count is small; otherwise uniform
    random subsets, raising BudgetExceeded when the cap runs out.
    """
    total = math.comb(pool_size, size)
    if total <= _EXHAUSTIVE_LIMIT:
        order = list(combinations(range(pool_size), size))
        rng.shuffle(order)
        for subset in order:
            if budget[0] <= 0:
                raise BudgetExceeded("subset search cap exhausted")
            budget[0] -= 1
            yield subset
    else:
        while True:
            if budget[0] <= 0:
                raise BudgetExceeded("subset search cap exhausted")
            budget[0] -= 1
            yield tuple(rng.choice(pool_size, size=size, replace=False))


def recover(samples, m_max: int, k_max: int,
            rng: np.random.Generator | None = None,
            subset_cap: int = SUBSET_CAP,
            pool_factor: int = POOL_FACTOR) -> RecoveryResult:
    """Recover up to m_max subspaces of dimension <= k_max from samples."""
    if m_max < 1 or k_max < 1:
        raise ValueError("m_max and k_max must be >= 1")
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or len(samples) == 0:
        raise ValueError("samples must be a nonempty (n, d) array")
    if rng is None:
        rng = np.random.default_rng(0)

    n = len(samples)
    norms = np.linalg.norm(samples, axis=1)
    assignments = np.full(n, -1, dtype=np.int64)
    # Zero vectors lie on every subspace; assign them at the end.
    zero_mask = norms < 1e-12
    remaining = np.flatnonzero(~zero_mask)

    subspaces: list[Subspace] = []
    budget = [subset_cap]
    subset_size = k_max + 1

    for _ in range(m_max):
        if len(remaining) < subset_size:
            break
        pool_size = min(len(remaining), pool_factor * subset_size)
        pool_idx = rng.choice(remaining, size=pool_size, replace=False)
        pool = samples[pool_idx]

        found = None
        for subset in _iter_subsets(pool_size, subset_size, rng, budget):
            if _is_dependent(pool[list(subset)]):
                found = pool[list(subset)]
                break
        if found is None:
            break

        minimal = _minimal_dependent(found)
        sub = orthonormalize(minimal)

        # Merge with an existing recovered subspace if equal.
        comp = None
        for j, existing in enumerate(subspaces):
            if subspaces_equal(existing, sub):
                comp = j
                break
        if comp is None:
            subspaces.append(sub)
            comp = len(subspaces) - 1

        resid = residual_norm(sub, samples[remaining])
        on_sub = resid <= assign_tol(samples[remaining])
        assignments[remaining[on_sub]] = comp
        remaining = remaining[~on_sub]
        if len(remaining) == 0:
            break

    if subspaces and np.any(zero_mask):
        assignments[zero_mask] = 0
    unassigned = sorted(np.flatnonzero(assignments < 0).tolist())
    return RecoveryResult(subspaces=subspaces, assignments=assignments,
                          unassigned=unassigned)


def classify(result: RecoveryResult, x) -> np.ndarray:
    """Index of the subspace with the smallest residual (ties: lowest index).

    Accepts a single d-vector or an (n, d) batch.
    """
    if result.n_subspaces == 0:
        raise EmptyRecovery("no recovered subspaces")
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    resid = np.stack([residual_norm(s, x) for s in result.subspaces], axis=1)
    out = np.argmin(resid, axis=1)
    return int(out[0]) if single else out


def required_n0(m: int, k: int, n: int, c_sc: float = 1.0) -> int:
    """Sample budget for the recovery split: ceil(c_sc m^2 k log n), <= n/2."""
    if m < 1 or k < 1 or n < 1:
        raise ValueError("m, k, n must be positive")
    raw = math.ceil(c_sc * m * m * k * math.log(n))
    return int(min(max(raw, 1), n // 2 if n >= 2 else 1))
