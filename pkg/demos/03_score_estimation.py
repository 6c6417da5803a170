"""Kernel score estimation on a union of subspaces, and its error in time.

Trains the kernel score estimator (per-subspace normal/tangent split with
density-ratio weights) and measures the Monte Carlo L2 score error against
the closed-form oracle across diffusion times.  Small t is the hard regime:
the smoothed density concentrates near the supports and the kernel estimate
of the tangent score gets noisy, so the error grows roughly like a power of
1/t.
"""

import numpy as np

from uosdiff import target
from uosdiff.estimator import train
from uosdiff.metrics import score_mse
from uosdiff.recovery import classify, recover, required_n0

rng = np.random.default_rng(3)
d, m, k = 8, 4, 2
tgt = target.random_target(d, m, k, rng)

n = 2500
samples = target.sample(tgt, n, rng)
n0 = required_n0(m, k, n)
result = recover(samples[:n0], m_max=m, k_max=k, rng=rng)
estimation = samples[n0:]
labels = classify(result, estimation)
print(f"{n0} samples used for recovery, {len(estimation)} for estimation")

# Two flavors: the regularized estimator (density thresholding, norm
# clipping, weight tube -- the version with theoretical guarantees) and the
# raw kernel estimator that exposes the time-scaling of the estimation error.
reg = train(result.subspaces, estimation, labels)
raw = train(result.subspaces, estimation, labels, regularized=False)

print(f"\n{'t':>8}  {'mse (regularized)':>18}  {'mse (raw)':>12}")
for t in np.geomspace(1e-3, 3e-1, 7):
    row_reg = score_mse(reg, tgt, t, 2000, np.random.default_rng(30))
    row_raw = score_mse(raw, tgt, t, 2000, np.random.default_rng(30))
    print(f"{t:8.4f}  {row_reg.mse:18.3f}  {row_raw.mse:12.3f}")

print("\nThe regularized error is capped at small t (the threshold zeroes "
      "the\ntangent estimate in empty regions); the raw error shows the "
      "t^{-(k/2+1)}\ngrowth the estimation-error theory predicts.")
