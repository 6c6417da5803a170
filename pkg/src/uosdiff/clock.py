"""Time algebra linking the variance-preserving (OU) and variance-exploding
forward processes, plus the time grids used by the sampler."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidRange, NonpositiveTime


def c(t):
    """Mean contraction e^{-t} of the OU process."""
    return np.exp(-np.asarray(t, dtype=np.float64))


def sigma(t):
    """Noise scale sqrt(1 - e^{-2t}) of the OU process."""
    return np.sqrt(-np.expm1(-2.0 * np.asarray(t, dtype=np.float64)))


def h(t):
    """VP-to-VE time map sigma_t^2 / c_t^2 = e^{2t} - 1."""
    return np.expm1(2.0 * np.asarray(t, dtype=np.float64))


def h_inverse(u):
    """Inverse of h: t = log(1 + u) / 2."""
    return 0.5 * np.log1p(np.asarray(u, dtype=np.float64))


def vp_score_from_ve(score_ve, t: float, x):
    """Score of the OU marginal from a VE-time score: (1/c_t) s_ve(h(t), x/c_t)."""
    if not t > 0:
        raise NonpositiveTime(f"t must be > 0, got {t}")
    ct = float(c(t))
    return np.asarray(score_ve(float(h(t)), np.asarray(x) / ct)) / ct


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing times in [tau, T] with exact endpoints."""

    times: np.ndarray
    tau: float
    T: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        if times[0] != self.tau or times[-1] != self.T:
            raise InvalidRange("grid endpoints must be exactly tau and T")
        if np.any(np.diff(times) <= 0):
            raise InvalidRange("grid must be strictly increasing")
        object.__setattr__(self, "times", times)

    def __len__(self) -> int:
        return len(self.times)


def _check_range(tau: float, T: float):
    if not (0 < tau < T):
        raise InvalidRange(f"need 0 < tau < T, got tau={tau}, T={T}")


def dyadic_grid(tau: float, T: float) -> TimeGrid:
    """Doubling grid [tau, 2 tau, 4 tau, ...] with the tail clamped to T."""
    _check_range(tau, T)
    times = [tau]
    while times[-1] * 2.0 < T:
        times.append(times[-1] * 2.0)
    times.append(T)
    return TimeGrid(times=np.asarray(times), tau=tau, T=T)


def uniform_step_grid(tau: float, T: float, steps: int) -> TimeGrid:
    """Geometric grid (uniform in log t) with steps+1 nodes from tau to T."""
    _check_range(tau, T)
    if steps < 1:
        raise InvalidRange("steps must be >= 1")
    times = np.geomspace(tau, T, steps + 1)
    times[0] = tau
    times[-1] = T
    return TimeGrid(times=times, tau=tau, T=T)
