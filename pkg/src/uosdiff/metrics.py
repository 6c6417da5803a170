"""Monte Carlo score-error measurement and empirical Wasserstein distances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from . import target as target_mod
from .errors import NonpositiveTime, SizeCap, SizeMismatch

W1_EXACT_CAP = 4096


@dataclass(frozen=True)
class ScoreErrorRow:
    """One Monte Carlo estimate of E ||s_hat(X) - s*(X)||^2 at a time t."""

    t: float
    mse: float
    stderr: float
    n_eval: int
    n_train: int
    replicate: int

    def __post_init__(self):
        if self.mse < 0 or self.stderr < 0:
            raise ValueError("mse and stderr must be nonnegative")


def score_mse(model, target, t: float, n_eval: int, rng: np.random.Generator,
              n_train: int | None = None, replicate: int = 0) -> ScoreErrorRow:
    """L2 score error over X ~ p_t, with X = Y + sqrt(t) xi for Y ~ target.

    ``model`` is a TrainedScoreModel or any callable (t, X) -> scores, so the
    oracle itself can be plugged in.
    """
    if not t > 0:
        raise NonpositiveTime(f"t must be > 0, got {t}")
    if n_eval < 2:
        raise ValueError("n_eval must be >= 2")
    y = target_mod.sample(target, n_eval, rng)
    x = y + np.sqrt(t) * rng.standard_normal(y.shape)
    estimate = model(t, x) if callable(model) else model.full_score(t, x)
    truth = target_mod.true_score(target, t, x)
    err = np.einsum("qd,qd->q", estimate - truth, estimate - truth)
    if n_train is None:
        n_train = 0 if callable(model) else model.total_count
    return ScoreErrorRow(t=t, mse=float(np.mean(err)),
                         stderr=float(np.std(err, ddof=1) / np.sqrt(n_eval)),
                         n_eval=n_eval, n_train=int(n_train),
                         replicate=replicate)


def _check_pair(a, b, allow_uneven=False):
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[1] != b.shape[1]:
        raise SizeMismatch(f"shapes {a.shape} and {b.shape} differ")
    if len(a) != len(b):
        if not allow_uneven:
            raise SizeMismatch(f"shapes {a.shape} and {b.shape} differ")
        small, big = (a, b) if len(a) < len(b) else (b, a)
        if len(big) % len(small):
            raise SizeMismatch(
                f"uneven sizes {len(a)} and {len(b)}: the larger cloud must "
                f"be an integer multiple of the smaller")
    return a, b


def w1_exact(a, b) -> float:
    """Empirical 1-Wasserstein distance via exact optimal assignment.

    Sizes may differ if the larger is an integer multiple of the smaller;
    the smaller cloud's points are repeated so uniform weights still give a
    valid coupling.
    """
    a, b = _check_pair(a, b, allow_uneven=True)
    if len(a) != len(b):
        small, big = (a, b) if len(a) < len(b) else (b, a)
        a, b = np.repeat(small, len(big) // len(small), axis=0), big
    if len(a) > W1_EXACT_CAP:
        raise SizeCap(f"exact assignment capped at {W1_EXACT_CAP} points")
    cost = cdist(a, b)
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].mean())


def w1_sliced(a, b, n_projections: int, rng: np.random.Generator) -> float:
    """Sliced surrogate: average 1-d W1 over random unit directions."""
    a, b = _check_pair(a, b)
    if n_projections < 1:
        raise ValueError("n_projections must be >= 1")
    d = a.shape[1]
    total = 0.0
    for _ in range(n_projections):
        direction = rng.standard_normal(d)
        direction /= np.linalg.norm(direction)
        pa = np.sort(a @ direction)
        pb = np.sort(b @ direction)
        total += float(np.mean(np.abs(pa - pb)))
    return total / n_projections
