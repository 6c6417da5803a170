"""Reverse-SDE sampling by Euler-Maruyama on a log-uniform or dyadic grid.

The reverse dynamics start from a standard Gaussian at forward time T and are
integrated backward to the early-stopping time tau, with the score evaluated
at the left (larger-t) endpoint of each step.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .clock import TimeGrid, dyadic_grid, uniform_step_grid
from .errors import InvalidRange, NonFiniteState


@dataclass(frozen=True)
class SamplerConfig:
    """Reverse-SDE discretization: [tau, T] with steps nodes between."""

    tau: float
    T: float
    steps: int = 200
    grid_kind: str = "log"  # "log" (uniform in log t) or "dyadic"

    def __post_init__(self):
        if not (0 < self.tau < self.T):
            raise InvalidRange(f"need 0 < tau < T, got {self.tau}, {self.T}")
        if self.grid_kind not in ("log", "dyadic"):
            raise InvalidRange(f"unknown grid kind {self.grid_kind!r}")

    def grid(self) -> TimeGrid:
        if self.grid_kind == "dyadic":
            return dyadic_grid(self.tau, self.T)
        return uniform_step_grid(self.tau, self.T, self.steps)


def _integrate(score, times: np.ndarray, y: np.ndarray,
               noise: np.ndarray) -> np.ndarray:
    """Shared Euler-Maruyama core; y is (Q, d), noise is (steps, Q, d)."""
    for j in range(len(times) - 2, -1, -1):
        dt = times[j + 1] - times[j]
        drift = y + 2.0 * np.atleast_2d(score(float(times[j + 1]), y))
        y = y + dt * drift + np.sqrt(2.0 * dt) * noise[len(times) - 2 - j]
        if not np.all(np.isfinite(y)):
            raise NonFiniteState("sampler state became non-finite")
    return y


def sample_one(score, cfg: SamplerConfig, dim: int,
               rng: np.random.Generator) -> np.ndarray:
    """One reverse-SDE draw; the output targets the smoothed law at tau."""
    times = cfg.grid().times
    y = rng.standard_normal(dim)
    noise = rng.standard_normal((len(times) - 1, dim))
    out = _integrate(score, times, y[None, :], noise[:, None, :])
    return out[0]


def sample_batch(score, cfg: SamplerConfig, count: int, dim: int,
                 rng: np.random.Generator, workers: int | None = None
                 ) -> np.ndarray:
    """``count`` independent draws with deterministic per-index substreams.

    Each index owns a spawned generator, so parallel and serial execution
    produce identical outputs; chains are stepped together in vectorized
    blocks with the score evaluated on (Q, d) batches.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    times = cfg.grid().times
    streams = rng.spawn(count)
    init = np.empty((count, dim))
    noise = np.empty((len(times) - 1, count, dim))
    for i, sub in enumerate(streams):
        init[i] = sub.standard_normal(dim)
        noise[:, i, :] = sub.standard_normal((len(times) - 1, dim))

    if workers is None:
        workers = int(os.environ.get("UOSDIFF_WORKERS", "1"))
    if workers <= 1 or count == 1:
        return _integrate(score, times, init, noise)

    bounds = np.linspace(0, count, workers + 1).astype(int)
    spans = [(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    out = np.empty_like(init)
    with ThreadPoolExecutor(max_workers=len(spans)) as pool:
        futures = {pool.submit(_integrate, score, times, init[lo:hi],
                               noise[:, lo:hi, :]): (lo, hi)
                   for lo, hi in spans}
        for fut, (lo, hi) in futures.items():
            out[lo:hi] = fut.result()
    return out
