"""Command-line entry point: score-error and sampling experiments, slope
fits on result tables, and a quick invariant selftest."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import clock, geometry, harness, metrics, seeding
from . import target as target_mod
from .estimator import train
from .recovery import classify, recover
from .sampler import SamplerConfig, sample_batch


def _add_config_args(sub):
    sub.add_argument("--config", required=True, help="flat key=value config file")
    sub.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="override a config key")


def cmd_score_error(args) -> int:
    cfg = harness.parse_config(args.config, overrides=args.set)
    table = harness.run_score_error_experiment(cfg)
    print(f"wrote {os.path.join(cfg.outputs, f'score_error_{cfg.seed}.csv')}"
          f" ({len(table.rows)} rows)")
    return 0


def cmd_sample(args) -> int:
    cfg = harness.parse_config(args.config, overrides=args.set)
    table = harness.run_sampling_experiment(cfg)
    print(f"wrote {os.path.join(cfg.outputs, f'sampling_{cfg.seed}.csv')}"
          f" ({len(table.rows)} rows)")
    return 0


def cmd_slope(args) -> int:
    table = harness.ResultTable.from_csv(args.csv)
    fit_range = None
    if args.range:
        lo, hi = args.range.split(",")
        fit_range = (float(lo), float(hi))
    slope, stderr = harness.fit_loglog_slope(table, args.x, args.y, fit_range)
    print(f"slope={slope!r} stderr={stderr!r}")
    return 0


def _selftest_checks(seed: int):
    """Quick invariant suite; yields (name, passed, value) triples."""
    rng = seeding.substream(seed, 99)

    sub = geometry.random_subspace(8, 3, rng)
    gram_err = float(np.max(np.abs(sub.basis.T @ sub.basis - np.eye(3))))
    yield "orthonormal_basis", gram_err <= 1e-12, gram_err

    x = rng.standard_normal(8)
    proj = geometry.project(sub, x)
    idem = float(np.max(np.abs(geometry.project(sub, proj) - proj)))
    yield "projection_idempotent", idem <= 1e-10, idem

    ts = np.geomspace(1e-6, 50, 64)
    round_trip = float(np.max(np.abs(clock.h_inverse(clock.h(ts)) / ts - 1.0)))
    yield "clock_round_trip", round_trip <= 1e-10, round_trip

    pyth = float(np.max(np.abs(clock.c(ts) ** 2 + clock.sigma(ts) ** 2 - 1.0)))
    yield "clock_unit_variance", pyth <= 1e-12, pyth

    target = target_mod.random_target(6, 3, 2, seeding.substream(seed, 98))
    pts = target_mod.sample(target, 64, seeding.substream(seed, 97))
    wsum = sum(target_mod.true_weight(target, 0.1, i, pts)
               for i in range(target.n_components))
    weight_err = float(np.max(np.abs(wsum - 1.0)))
    yield "true_weights_sum_to_one", weight_err <= 1e-10, weight_err

    rec = recover(pts, 3, 2, rng=seeding.substream(seed, 96))
    ok = rec.n_subspaces == 3 and len(rec.unassigned) == 0
    yield "recovery_full_assignment", ok, float(rec.n_subspaces)

    model = train(rec.subspaces, pts, classify(rec, pts))
    probe = rng.standard_normal((256, 6))
    worst = 0.0
    for t in (1e-3, 0.1, 1.0):
        for i in range(model.n_components):
            low = np.atleast_2d(model.low_dim_score(i, t, probe @ model.subspaces[i].basis))
            worst = max(worst, float(np.max(np.linalg.norm(low, axis=1)))
                        - model.clip_radius(t))
    yield "low_dim_score_clip_bound", worst <= 1e-12, worst

    wts = np.stack([model.weight(i, 0.05, probe)
                    for i in range(model.n_components)], axis=1)
    in_range = bool(np.all(wts >= 0) and np.all(wts.sum(axis=1) <= 1 + 1e-10))
    yield "weights_in_simplex", in_range, float(np.max(wts.sum(axis=1)))

    scfg = SamplerConfig(tau=0.01, T=2.0, steps=20)
    draws_a = sample_batch(lambda t, y: -y, scfg, 8, 6,
                           seeding.substream(seed, 95), workers=1)
    draws_b = sample_batch(lambda t, y: -y, scfg, 8, 6,
                           seeding.substream(seed, 95), workers=2)
    same = bool(np.array_equal(draws_a, draws_b))
    yield "sampler_parallel_determinism", same, float(np.max(np.abs(draws_a)))

    w1 = metrics.w1_exact(draws_a, draws_a)
    yield "w1_identity", w1 == 0.0, w1


def cmd_selftest(args) -> int:
    rows = []
    failed = 0
    for name, passed, value in _selftest_checks(args.seed):
        status = "pass" if passed else "FAIL"
        print(f"{status} {name} value={value!r}")
        rows.append((name, status, value))
        failed += 0 if passed else 1
    os.makedirs(args.outputs, exist_ok=True)
    table = harness.ResultTable(columns=["check", "status", "value"], rows=rows)
    path = os.path.join(args.outputs, f"selftest_{args.seed}.csv")
    table.to_csv(path)
    print(f"wrote {path}")
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="uosdiff",
        description="Union-of-subspaces diffusion experiments")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("score-error", help="run the score-error experiment")
    _add_config_args(sub)
    sub.set_defaults(func=cmd_score_error)

    sub = subs.add_parser("sample", help="run the sampling/W1 experiment")
    _add_config_args(sub)
    sub.set_defaults(func=cmd_sample)

    sub = subs.add_parser("slope", help="fit a log-log slope on a result CSV")
    sub.add_argument("--csv", required=True)
    sub.add_argument("--x", required=True)
    sub.add_argument("--y", required=True)
    sub.add_argument("--range", default=None, metavar="LO,HI")
    sub.set_defaults(func=cmd_slope)

    sub = subs.add_parser("selftest", help="run the invariant suite")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--outputs", default=".")
    sub.set_defaults(func=cmd_selftest)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
