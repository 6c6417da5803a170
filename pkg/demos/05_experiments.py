"""Driving the experiment harness and CLI programmatically.

The shipped configs (configs/*.cfg) describe two reproducible experiments:
a score-error sweep over diffusion times and a sampling-error sweep over
training sizes.  Each writes a CSV (per-replicate rows plus `agg` rows) and
a log-log SVG plot, and a fixed seed makes the outputs byte-identical across
runs.  This demo runs a miniature version of each and fits the scaling
slopes.
"""

import os

from uosdiff.harness import (fit_loglog_slope, parse_config,
                             run_sampling_experiment,
                             run_score_error_experiment)

os.environ.setdefault("UOSDIFF_WORKERS", "4")

score_cfg = parse_config(
    "configs/score_error_desk.cfg",
    overrides=["replicates=2", "n_eval=1500", "outputs=out/demo_score"])
table = run_score_error_experiment(score_cfg)
slope, stderr = fit_loglog_slope(table, "t", "mse")
print(f"score error vs t: slope {slope:+.3f} (stderr {stderr:.3f}); "
      f"theory predicts -(k/2 + 1) = {-(score_cfg.k / 2 + 1):+.1f}")
print(f"outputs in {score_cfg.outputs}/")

sample_cfg = parse_config(
    "configs/sampling_desk.cfg",
    overrides=["replicates=3", "sampler.n_gen=512", "n_values=250,1000,4000",
               "outputs=out/demo_sampling"])
table = run_sampling_experiment(sample_cfg)
slope, stderr = fit_loglog_slope(table, "n", "w1")
print(f"W1 vs n: slope {slope:+.3f} (stderr {stderr:.3f}); "
      f"theory predicts -1/(k v 2) = {-1 / max(sample_cfg.k, 2):+.1f}")
print(f"outputs in {sample_cfg.outputs}/")

# The same experiments are available from the command line:
#   uosdiff score-error --config configs/score_error_desk.cfg
#   uosdiff sample --config configs/sampling_desk.cfg
#   uosdiff slope --csv out/score_error_desk/score_error_0.csv --x t --y mse
#   uosdiff selftest
