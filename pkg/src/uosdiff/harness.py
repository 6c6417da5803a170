"""Experiment orchestration: config parsing, the score-error and sampling
pipelines, slope fits, and CSV/SVG output."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import metrics, seeding, svgplot
from . import target as target_mod
from .errors import (BudgetExceeded, InsufficientPoints, RecoveryFailed,
                     UosdiffError)
from .estimator import train
from .recovery import classify, recover, required_n0
from .sampler import SamplerConfig, sample_batch

SCORE_ERROR_COLUMNS = ["t", "replicate", "mse", "stderr", "n_eval", "n_train",
                       "status"]
SAMPLING_COLUMNS = ["n", "replicate", "w1", "n_gen", "status"]


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class ResultTable:
    """CSV-serializable table; rows are tuples aligned with ``columns``."""

    columns: list
    rows: list

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(self.columns) + "\n")
            for row in self.rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")

    def column(self, name: str, where: dict | None = None) -> list:
        idx = self.columns.index(name)
        out = []
        for row in self.rows:
            if where and any(str(row[self.columns.index(k)]) != str(v)
                             for k, v in where.items()):
                continue
            out.append(row[idx])
        return out

    @classmethod
    def from_csv(cls, path) -> "ResultTable":
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
        columns = lines[0].split(",")
        rows = [tuple(ln.split(",")) for ln in lines[1:]]
        return cls(columns=columns, rows=rows)


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative experiment description (flat key-value config format)."""

    d: int = 16
    M: int = 8
    k: int = 3
    n: int = 5500
    seed: int = 0
    n_eval: int = 5000
    replicates: int = 5
    times: tuple = ()
    times_range: tuple = (1e-3, 1.0, 20)
    n_values: tuple = (500, 2000, 8000)
    target_n_mix: int = 2
    target_mean_radius: float = 3.0
    target_eig_min: float = 0.05
    target_eig_max: float = 1.0
    target_c_p: float = 4.0
    sampler_tau: float | None = None
    sampler_T: float | None = None
    sampler_steps: int = 200
    sampler_grid: str = "log"
    sampler_n_gen: int = 1024
    sampler_n_fresh: int | None = None
    sampler_oracle: bool = False
    recovery_c_sc: float = 1.0
    recovery_m_max: int | None = None
    recovery_k_max: int | None = None
    estimator_c_r: float = 2.0
    estimator_regularized: bool = True
    outputs: str = "."

    def time_grid(self) -> np.ndarray:
        if self.times:
            return np.asarray(self.times, dtype=np.float64)
        lo, hi, count = self.times_range
        return np.geomspace(lo, hi, int(count))

    def validate(self):
        if min(self.d, self.M, self.k, self.n, self.n_eval,
               self.replicates) < 1:
            raise ValueError("all counts must be positive")
        if self.k > self.d:
            raise ValueError("need d >= k")
        if np.any(self.time_grid() <= 0):
            raise ValueError("t values must be positive")


_KEY_MAP = {
    "d": ("d", int),
    "m": ("M", int),
    "k": ("k", int),
    "n": ("n", int),
    "seed": ("seed", int),
    "n_eval": ("n_eval", int),
    "replicates": ("replicates", int),
    "outputs": ("outputs", str),
    "target.n_mix": ("target_n_mix", int),
    "target.mean_radius": ("target_mean_radius", float),
    "target.eig_min": ("target_eig_min", float),
    "target.eig_max": ("target_eig_max", float),
    "target.c_p": ("target_c_p", float),
    "sampler.tau": ("sampler_tau", float),
    "sampler.t_end": ("sampler_T", float),
    "sampler.steps": ("sampler_steps", int),
    "sampler.grid": ("sampler_grid", str),
    "sampler.n_gen": ("sampler_n_gen", int),
    "sampler.n_fresh": ("sampler_n_fresh", int),
    "sampler.oracle": ("sampler_oracle", lambda v: v.lower() in ("1", "true", "yes")),
    "recovery.c_sc": ("recovery_c_sc", float),
    "recovery.m_max": ("recovery_m_max", int),
    "recovery.k_max": ("recovery_k_max", int),
    "estimator.c_r": ("estimator_c_r", float),
    "estimator.regularized": ("estimator_regularized",
                              lambda v: v.lower() in ("1", "true", "yes", "on")),
}


def parse_config(path=None, overrides=(), text=None) -> ExperimentConfig:
    """Parse the flat ``key = value`` format with dotted section keys.

    ``overrides`` are extra ``key=value`` strings (CLI --set flags) applied
    after the file.
    """
    entries = []
    if text is None and path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    if text:
        for line_no, line in enumerate(text.splitlines(), 1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ValueError(f"line {line_no}: expected key = value")
            key, value = stripped.split("=", 1)
            entries.append((key.strip(), value.strip()))
    for item in overrides:
        if "=" not in item:
            raise ValueError(f"override {item!r}: expected key=value")
        key, value = item.split("=", 1)
        entries.append((key.strip(), value.strip()))

    kwargs = {}
    for key, value in entries:
        lower = key.lower()
        if lower == "times.list":
            kwargs["times"] = tuple(float(v) for v in value.split(","))
        elif lower == "times.range":
            lo, hi, count = value.split(",")
            kwargs["times_range"] = (float(lo), float(hi), int(count))
        elif lower == "n_values":
            kwargs["n_values"] = tuple(int(v) for v in value.split(","))
        elif lower in _KEY_MAP:
            attr, conv = _KEY_MAP[lower]
            kwargs[attr] = conv(value)
        else:
            raise ValueError(f"unknown config key {key!r}")
    cfg = ExperimentConfig(**kwargs)
    cfg.validate()
    return cfg


def _workers() -> int:
    return max(1, int(os.environ.get("UOSDIFF_WORKERS", "1")))


def build_target(cfg: ExperimentConfig) -> target_mod.UoSTarget:
    rng = seeding.substream(cfg.seed, seeding.TARGET)
    return target_mod.random_target(
        cfg.d, cfg.M, cfg.k, rng, n_mix=cfg.target_n_mix,
        mean_radius=cfg.target_mean_radius,
        eig_range=(cfg.target_eig_min, cfg.target_eig_max),
        c_p=cfg.target_c_p)


def _train_replicate(cfg: ExperimentConfig, target, n: int, *seed_path):
    """Generate data, split, recover, classify, train. Raises RecoveryFailed."""
    data_rng = seeding.substream(cfg.seed, seeding.DATA, *seed_path)
    samples = target_mod.sample(target, n, data_rng)
    n0 = required_n0(cfg.M, cfg.k, n, c_sc=cfg.recovery_c_sc)
    m_max = cfg.recovery_m_max or cfg.M
    k_max = cfg.recovery_k_max or cfg.k
    try:
        rec = recover(samples[:n0], m_max, k_max,
                      rng=seeding.substream(cfg.seed, seeding.RECOVERY,
                                            *seed_path))
    except BudgetExceeded as exc:
        raise RecoveryFailed(str(exc)) from exc
    if rec.n_subspaces == 0:
        raise RecoveryFailed("no subspaces recovered")
    estimation = samples[n0:]
    labels = classify(rec, estimation)
    counts = np.bincount(labels, minlength=rec.n_subspaces)
    if np.any(counts == 0):
        raise RecoveryFailed("a recovered component received no samples")
    return train(rec.subspaces, estimation, labels, c_radius=cfg.estimator_c_r,
                 regularized=cfg.estimator_regularized)


def run_score_error_experiment(cfg: ExperimentConfig) -> ResultTable:
    """Score-error pipeline; one CSV row per (t, replicate) plus aggregates."""
    cfg.validate()
    target = build_target(cfg)
    times = cfg.time_grid()

    def one_replicate(rep: int):
        rows = []
        try:
            model = _train_replicate(cfg, target, cfg.n, rep)
        except RecoveryFailed:
            return [(float(t), rep, float("nan"), float("nan"), cfg.n_eval,
                     0, "failed") for t in times]
        for ti, t in enumerate(times):
            rng = seeding.substream(cfg.seed, seeding.EVAL, rep, ti)
            row = metrics.score_mse(model, target, float(t), cfg.n_eval, rng,
                                    replicate=rep)
            rows.append((row.t, rep, row.mse, row.stderr, row.n_eval,
                         row.n_train, "ok"))
        return rows

    replicate_rows = _map_workers(one_replicate, range(cfg.replicates))
    rows = [row for chunk in replicate_rows for row in chunk]
    rows.sort(key=lambda r: (r[0], r[1]))

    agg = _aggregate(rows, key_idx=0, val_idx=2,
                     make_row=lambda t, mean, sem, count, proto:
                     (t, "agg", mean, sem, proto[4], proto[5],
                      f"agg:{count}"))
    table = ResultTable(columns=SCORE_ERROR_COLUMNS, rows=rows + agg)
    _emit(cfg, table, "score_error", x_col="t", y_col="mse",
          xlabel="diffusion time t", ylabel="L2 score error")
    return table


def run_sampling_experiment(cfg: ExperimentConfig) -> ResultTable:
    """Sampling pipeline: train, sample, exact W1 against fresh target draws."""
    cfg.validate()
    n_fresh = cfg.sampler_n_fresh or cfg.sampler_n_gen
    if max(cfg.sampler_n_gen, n_fresh) > metrics.W1_EXACT_CAP:
        raise ValueError("sampler.n_gen/n_fresh must fit the exact-W1 cap")
    if n_fresh % cfg.sampler_n_gen:
        raise ValueError("sampler.n_fresh must be a multiple of sampler.n_gen")
    target = build_target(cfg)

    def one_cell(args):
        n, rep = args
        try:
            if cfg.sampler_oracle:
                model_score = None
            else:
                model = _train_replicate(cfg, target, n, n, rep)
                model_score = model.vp_score
        except RecoveryFailed:
            return (n, rep, float("nan"), cfg.sampler_n_gen, "failed")
        tau = cfg.sampler_tau if cfg.sampler_tau is not None \
            else float(n) ** (-2.0 / max(cfg.k, 2))
        t_end = cfg.sampler_T if cfg.sampler_T is not None else math.log(n)
        scfg = SamplerConfig(tau=tau, T=t_end, steps=cfg.sampler_steps,
                             grid_kind=cfg.sampler_grid)
        if cfg.sampler_oracle:
            from . import clock

            def model_score(t, x):
                return clock.vp_score_from_ve(
                    lambda tv, xv: target_mod.true_score(target, tv, xv), t, x)
        gen = sample_batch(model_score, scfg, cfg.sampler_n_gen, cfg.d,
                           seeding.substream(cfg.seed, seeding.SAMPLER, n, rep),
                           workers=1)
        fresh = target_mod.sample(
            target, n_fresh,
            seeding.substream(cfg.seed, seeding.FRESH, n, rep))
        return (n, rep, metrics.w1_exact(gen, fresh), cfg.sampler_n_gen, "ok")

    cells = [(n, rep) for n in cfg.n_values for rep in range(cfg.replicates)]
    rows = _map_workers(one_cell, cells)
    rows.sort(key=lambda r: (r[0], r[1]))
    agg = _aggregate(rows, key_idx=0, val_idx=2,
                     make_row=lambda n, mean, sem, count, proto:
                     (n, "agg", mean, proto[3], f"agg:{count}"))
    table = ResultTable(columns=SAMPLING_COLUMNS, rows=rows + agg)
    _emit(cfg, table, "sampling", x_col="n", y_col="w1",
          xlabel="training sample size n", ylabel="W1 distance")
    return table


def _map_workers(fn, items):
    items = list(items)
    workers = _workers()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _aggregate(rows, key_idx, val_idx, make_row):
    keys = sorted({row[key_idx] for row in rows})
    out = []
    for key in keys:
        vals = [row[val_idx] for row in rows
                if row[key_idx] == key and row[-1] == "ok"]
        proto = next(row for row in rows if row[key_idx] == key)
        if vals:
            mean = float(np.mean(vals))
            sem = float(np.std(vals, ddof=1) / np.sqrt(len(vals))) \
                if len(vals) > 1 else 0.0
        else:
            mean, sem = float("nan"), float("nan")
        out.append(make_row(key, mean, sem, len(vals), proto))
    return out


def _emit(cfg: ExperimentConfig, table: ResultTable, name: str,
          x_col: str, y_col: str, xlabel: str, ylabel: str):
    os.makedirs(cfg.outputs, exist_ok=True)
    csv_path = os.path.join(cfg.outputs, f"{name}_{cfg.seed}.csv")
    table.to_csv(csv_path)
    agg = [row for row in table.rows if str(row[1]) == "agg"]
    xi = table.columns.index(x_col)
    yi = table.columns.index(y_col)
    points = [(float(row[xi]), float(row[yi])) for row in agg
              if float(row[yi]) == float(row[yi])]
    if points:
        svg_path = os.path.join(cfg.outputs, f"{name}_{cfg.seed}.svg")
        svgplot.loglog_plot(svg_path, [p[0] for p in points],
                            [p[1] for p in points], xlabel=xlabel,
                            ylabel=ylabel, title=name.replace("_", " "))


def fit_loglog_slope(table: ResultTable, x_col: str, y_col: str,
                     fit_range: tuple | None = None):
    """OLS slope of log y against log x over the aggregate rows."""
    rep_idx = table.columns.index("replicate")
    xi = table.columns.index(x_col)
    yi = table.columns.index(y_col)
    points = []
    for row in table.rows:
        if str(row[rep_idx]) != "agg":
            continue
        x, y = float(row[xi]), float(row[yi])
        if y != y or y <= 0:
            continue
        if fit_range and not (fit_range[0] <= x <= fit_range[1]):
            continue
        points.append((math.log(x), math.log(y)))
    if len(points) < 3:
        raise InsufficientPoints(f"need >= 3 points, got {len(points)}")
    lx = np.array([p[0] for p in points])
    ly = np.array([p[1] for p in points])
    xc = lx - lx.mean()
    slope = float(np.dot(xc, ly) / np.dot(xc, xc))
    resid = ly - (ly.mean() + slope * xc)
    dof = len(points) - 2
    if dof > 0:
        stderr = float(np.sqrt(np.dot(resid, resid) / dof / np.dot(xc, xc)))
    else:
        stderr = 0.0
    return slope, stderr
