"""Score-based diffusion for distributions on a union of linear subspaces.

Library layout:

- ``geometry``: subspace bases, projections, residuals
- ``target``: synthetic targets with closed-form smoothed density/score
- ``clock``: VP/VE time algebra and time grids
- ``recovery``: exact subspace recovery and classification
- ``estimator``: the regularized kernel score estimator
- ``sampler``: reverse-SDE Euler-Maruyama sampling
- ``metrics``: Monte Carlo score error and empirical Wasserstein distances
- ``harness``: experiment configs, pipelines, CSV/SVG outputs
"""

from .clock import TimeGrid, dyadic_grid, h, h_inverse, uniform_step_grid, vp_score_from_ve
from .estimator import TrainedScoreModel, train
from .geometry import Subspace, orthonormalize, project, random_subspace, residual_norm, subspaces_equal
from .harness import ExperimentConfig, ResultTable, fit_loglog_slope, parse_config, run_sampling_experiment, run_score_error_experiment
from .metrics import ScoreErrorRow, score_mse, w1_exact, w1_sliced
from .recovery import RecoveryResult, classify, recover, required_n0
from .sampler import SamplerConfig, sample_batch, sample_one
from .target import SubspaceComponent, UoSTarget, random_target, sample, smoothed_density, true_score, true_weight

__all__ = [
    "ExperimentConfig", "RecoveryResult", "ResultTable", "SamplerConfig",
    "ScoreErrorRow", "Subspace", "SubspaceComponent", "TimeGrid",
    "TrainedScoreModel", "UoSTarget", "classify", "dyadic_grid",
    "fit_loglog_slope", "h", "h_inverse", "orthonormalize", "parse_config",
    "project", "random_subspace", "random_target", "recover", "required_n0",
    "residual_norm", "run_sampling_experiment", "run_score_error_experiment",
    "sample", "sample_batch", "sample_one", "score_mse", "smoothed_density",
    "subspaces_equal", "train", "true_score", "true_weight",
    "uniform_step_grid", "vp_score_from_ve", "w1_exact", "w1_sliced",
]

__version__ = "0.1.0"
