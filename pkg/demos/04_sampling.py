"""Generating from a union-of-subspaces target with the reverse SDE.

Runs the full pipeline: sample the target, recover the subspaces, train the
score estimator, then integrate the time-reversed Ornstein-Uhlenbeck SDE
with Euler-Maruyama, stopping early at tau > 0.  The generated cloud is
compared to fresh target draws with the exact 1-Wasserstein distance.
"""

import numpy as np

from uosdiff import target
from uosdiff.estimator import train
from uosdiff.metrics import w1_exact
from uosdiff.recovery import classify, recover, required_n0
from uosdiff.sampler import SamplerConfig, sample_batch

rng = np.random.default_rng(4)
d, m, k = 4, 2, 2
tgt = target.random_target(d, m, k, rng)

n = 2000
samples = target.sample(tgt, n, rng)
n0 = required_n0(m, k, n)
result = recover(samples[:n0], m_max=m, k_max=k, rng=rng)
estimation = samples[n0:]

# Sampling uses the raw kernel score (regularized=False): the raw tangent
# estimate always points back toward the training data, which keeps the
# reverse SDE contractive.  The thresholded variant zeroes the tangent
# score in low-density regions and lets stray trajectories run away.
model = train(result.subspaces, estimation, classify(result, estimation),
              regularized=False)

# Early stopping at tau = 1/n and horizon T = log n, the schedule under
# which the W1 error contracts like n^{-1/(k v 2)}.
cfg = SamplerConfig(tau=1.0 / n, T=np.log(n), steps=200)
print(f"reverse SDE: tau = {cfg.tau:.2e}, T = {cfg.T:.2f}, {cfg.steps} steps")

generated = sample_batch(model.vp_score, cfg, 1024, d,
                         np.random.default_rng(40), workers=4)

# How far off-support did the sampler land?
resid = np.min(np.stack(
    [np.linalg.norm(generated - (generated @ s.basis) @ s.basis.T, axis=1)
     for s in result.subspaces]), axis=0)
print(f"median distance to nearest subspace: {np.median(resid):.4f} "
      f"(early-stop noise scale sqrt(tau) = {np.sqrt(cfg.tau):.4f})")

fresh = target.sample(tgt, 1024, rng)
print(f"W1(generated, fresh target draws) = {w1_exact(generated, fresh):.4f}")
print(f"W1(two fresh target clouds)       = "
      f"{w1_exact(target.sample(tgt, 1024, rng), fresh):.4f}  (noise floor)")
