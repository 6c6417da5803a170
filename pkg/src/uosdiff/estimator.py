"""Regularized kernel score estimator for union-of-subspaces targets.

The full estimator combines, per subspace, a closed-form normal score with a
low-dimensional kernel score (thresholded in low-density regions and clipped
in norm), weighted by kernel-density posterior weights that are zeroed
outside a tube around each subspace.  All kernel sums run in log space.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import clock
from .errors import DimensionMismatch, EmptyComponent, NonpositiveTime
from .geometry import Subspace, residual_norm

_LOG_2PI = np.log(2.0 * np.pi)
_CHUNK = 512  # query block size for the N-sample kernel sweeps


def _check_time(t):
    if not t > 0:
        raise NonpositiveTime(f"t must be > 0, got {t}")


def _sq_dists(x: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Pairwise squared distances (Q, N) without forming a (Q, N, k) tensor."""
    sq = (np.einsum("qk,qk->q", x, x)[:, None]
          + np.einsum("nk,nk->n", pts, pts)[None, :]
          - 2.0 * (x @ pts.T))
    return np.maximum(sq, 0.0)


@dataclass(frozen=True)
class TrainedScoreModel:
    """Classified training samples plus everything needed to evaluate scores.

    ``samples`` is the (N, d) score-estimation split; ``labels`` assigns each
    sample to a subspace; ``low[i]`` caches the (N_i, k_i) projected
    coordinates.  ``regularized=False`` disables thresholding, clipping, and
    the tube indicator (exactness test mode for discrete targets).
    """

    subspaces: list
    samples: np.ndarray
    labels: np.ndarray
    c_radius: float = 2.0
    regularized: bool = True
    low: list = field(default_factory=list)

    def __post_init__(self):
        samples = np.ascontiguousarray(self.samples, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if samples.ndim != 2 or len(samples) != len(labels):
            raise ValueError("samples and labels must align")
        if len(samples) < 2:
            raise ValueError("need at least 2 training samples")
        if np.any(labels < 0) or np.any(labels >= len(self.subspaces)):
            raise ValueError("labels out of range")
        low = [np.ascontiguousarray(samples[labels == i] @ s.basis)
               for i, s in enumerate(self.subspaces)]
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "low", low)

    @property
    def ambient_dim(self) -> int:
        return self.samples.shape[1]

    @property
    def n_components(self) -> int:
        return len(self.subspaces)

    @property
    def total_count(self) -> int:
        return len(self.samples)

    def component_counts(self) -> np.ndarray:
        return np.array([len(u) for u in self.low])

    # -- hyperparameters -------------------------------------------------

    def clip_radius(self, t: float) -> float:
        """Norm cap sqrt(2 log N / t) on the low-dimensional score."""
        return float(np.sqrt(2.0 * np.log(self.total_count) / t))

    def log_threshold(self, t: float, k: int) -> float:
        """log of the density floor log(N) / (N (2 pi t)^{k/2})."""
        n = self.total_count
        return float(np.log(np.log(n)) - np.log(n) - 0.5 * k * np.log(2.0 * np.pi * t))

    def tube_radius(self, t: float, k: int) -> float:
        """Radius C_R sqrt(t d log(N d t^{k/2})) of the weight tube.

        The log argument is clamped below at e^2 so the radius stays real
        and positive at small t.
        """
        n, d = self.total_count, self.ambient_dim
        arg = max(n * d * t ** (0.5 * k), np.exp(2.0))
        return float(self.c_radius * np.sqrt(t * d * np.log(arg)))

    # -- per-component low-dimensional pieces ----------------------------

    def _as_low_batch(self, i: int, u):
        k = self.subspaces[i].intrinsic_dim
        u = np.asarray(u, dtype=np.float64)
        single = u.ndim == 1
        u = np.atleast_2d(u)
        if u.shape[1] != k:
            raise DimensionMismatch(f"expected {k}-vectors for component {i}")
        return u, single

    def low_dim_kde(self, i: int, t: float, u):
        """log density of the t-bandwidth Gaussian KDE and its grad/density ratio."""
        _check_time(t)
        pts = self.low[i]
        if len(pts) == 0:
            raise EmptyComponent(f"component {i} has no samples")
        u, single = self._as_low_batch(i, u)
        k = pts.shape[1]
        log_density = np.empty(len(u))
        ratio = np.empty_like(u)
        for lo in range(0, len(u), _CHUNK):
            blk = u[lo:lo + _CHUNK]
            logk = -_sq_dists(blk, pts) / (2.0 * t)
            lse = logsumexp(logk, axis=1)
            log_density[lo:lo + _CHUNK] = (lse - np.log(len(pts))
                                           - 0.5 * k * np.log(2.0 * np.pi * t))
            resp = np.exp(logk - lse[:, None])
            # sum_j resp_j (P_j - u) / t, using sum_j resp_j = 1
            ratio[lo:lo + _CHUNK] = (resp @ pts - blk) / t
        if single:
            return float(log_density[0]), ratio[0]
        return log_density, ratio

    def low_dim_score(self, i: int, t: float, u):
        """Thresholded and clipped kernel score in the subspace coordinates."""
        _check_time(t)
        u, single = self._as_low_batch(i, u)
        log_g, ratio = self.low_dim_kde(i, t, u)
        log_g = np.atleast_1d(log_g)
        ratio = np.atleast_2d(ratio)
        out = ratio.copy()
        if self.regularized:
            k = self.subspaces[i].intrinsic_dim
            out[log_g < self.log_threshold(t, k)] = 0.0
            radius = self.clip_radius(t)
            norms = np.linalg.norm(out, axis=1)
            over = norms > radius
            if np.any(over):
                out[over] *= (radius / norms[over])[:, None]
        return out[0] if single else out

    def component_score(self, i: int, t: float, x):
        """Normal score -(x - proj(x))/t plus the lifted tangent score."""
        _check_time(t)
        s = self.subspaces[i]
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        if x.shape[1] != self.ambient_dim:
            raise DimensionMismatch("ambient dimension mismatch")
        u = x @ s.basis
        low = np.atleast_2d(self.low_dim_score(i, t, u))
        out = -(x - u @ s.basis.T) / t + low @ s.basis.T
        return out[0] if single else out

    # -- ambient kernel densities and weights ----------------------------

    def ambient_kde(self, t: float, x):
        """log p_hat(x) and per-component log q_hat(i, x).

        Both share the normalization 1/N, so sum_i q_hat = p_hat exactly.
        """
        _check_time(t)
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        d = self.ambient_dim
        if x.shape[1] != d:
            raise DimensionMismatch("ambient dimension mismatch")
        n, m = self.total_count, self.n_components
        log_norm = -np.log(n) - 0.5 * d * np.log(2.0 * np.pi * t)
        label_masks = [self.labels == i for i in range(m)]
        log_p = np.empty(len(x))
        log_q = np.empty((len(x), m))
        for lo in range(0, len(x), _CHUNK):
            blk = x[lo:lo + _CHUNK]
            logk = -_sq_dists(blk, self.samples) / (2.0 * t)
            log_p[lo:lo + _CHUNK] = logsumexp(logk, axis=1) + log_norm
            for i, mask in enumerate(label_masks):
                if np.any(mask):
                    log_q[lo:lo + _CHUNK, i] = (logsumexp(logk[:, mask], axis=1)
                                                + log_norm)
                else:
                    log_q[lo:lo + _CHUNK, i] = -np.inf
        if single:
            return float(log_p[0]), log_q[0]
        return log_p, log_q

    def in_tube(self, t: float, x) -> np.ndarray:
        """Boolean (Q, M) mask of the per-component weight tubes."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        mask = np.empty((len(x), self.n_components), dtype=bool)
        for i, s in enumerate(self.subspaces):
            if self.regularized:
                radius = self.tube_radius(t, s.intrinsic_dim)
                mask[:, i] = residual_norm(s, x) <= radius
            else:
                mask[:, i] = True
        return mask

    def weight(self, i: int, t: float, x):
        """Plug-in posterior weight q_hat/p_hat, zeroed outside the tube."""
        _check_time(t)
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        xb = np.atleast_2d(x)
        log_p, log_q = self.ambient_kde(t, xb)
        w = np.exp(np.atleast_2d(log_q)[:, i] - np.atleast_1d(log_p))
        w = np.where(self.in_tube(t, xb)[:, i], w, 0.0)
        return float(w[0]) if single else w

    def full_score(self, t: float, x):
        """Weighted combination of component scores.

        Components with zero weight are skipped entirely so their normal
        term never contributes.
        """
        _check_time(t)
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        xb = np.atleast_2d(x)
        active = self.in_tube(t, xb)
        log_p, log_q = self.ambient_kde(t, xb)
        log_q = np.atleast_2d(log_q)
        log_p = np.atleast_1d(log_p)
        out = np.zeros_like(xb)
        for i in range(self.n_components):
            rows = np.flatnonzero(active[:, i])
            if rows.size == 0 or len(self.low[i]) == 0:
                continue
            w = np.exp(log_q[rows, i] - log_p[rows])
            out[rows] += w[:, None] * self.component_score(i, t, xb[rows])
        return out[0] if single else out

    def vp_score(self, t: float, x):
        """Score of the OU marginal: (1/c_t) full_score(h(t), x/c_t)."""
        _check_time(t)
        ct = float(clock.c(t))
        return self.full_score(float(clock.h(t)), np.asarray(x) / ct) / ct

    # -- serialization ----------------------------------------------------

    def save(self, path):
        """Flat little-endian binary: header (d, M, N, k_i, N_i), then per
        component its basis and ambient samples as float64."""
        d, m, n = self.ambient_dim, self.n_components, self.total_count
        ks = [s.intrinsic_dim for s in self.subspaces]
        ns = self.component_counts().tolist()
        with open(path, "wb") as fh:
            fh.write(struct.pack("<3q", d, m, n))
            fh.write(struct.pack(f"<{m}q", *ks))
            fh.write(struct.pack(f"<{m}q", *ns))
            for i, s in enumerate(self.subspaces):
                fh.write(s.basis.astype("<f8").tobytes())
                fh.write(self.samples[self.labels == i].astype("<f8").tobytes())

    @classmethod
    def load(cls, path, c_radius: float = 2.0,
             regularized: bool = True) -> "TrainedScoreModel":
        with open(path, "rb") as fh:
            d, m, n = struct.unpack("<3q", fh.read(24))
            ks = struct.unpack(f"<{m}q", fh.read(8 * m))
            ns = struct.unpack(f"<{m}q", fh.read(8 * m))
            subspaces, chunks, labels = [], [], []
            for i in range(m):
                basis = np.frombuffer(fh.read(8 * d * ks[i]),
                                      dtype="<f8").reshape(d, ks[i])
                subspaces.append(Subspace(basis=basis.copy()))
                pts = np.frombuffer(fh.read(8 * ns[i] * d),
                                    dtype="<f8").reshape(ns[i], d)
                chunks.append(pts.copy())
                labels.append(np.full(ns[i], i, dtype=np.int64))
        return cls(subspaces=subspaces, samples=np.concatenate(chunks),
                   labels=np.concatenate(labels), c_radius=c_radius,
                   regularized=regularized)


def train(subspaces, samples, labels=None, c_radius: float = 2.0,
          regularized: bool = True) -> TrainedScoreModel:
    """Build a model from recovered subspaces and the estimation split.

    When ``labels`` is omitted, samples are classified to the nearest
    subspace by residual (the recovery classification rule).
    """
    samples = np.asarray(samples, dtype=np.float64)
    if labels is None:
        resid = np.stack([residual_norm(s, samples) for s in subspaces], axis=1)
        labels = np.argmin(resid, axis=1)
    return TrainedScoreModel(subspaces=list(subspaces), samples=samples,
                             labels=np.asarray(labels, dtype=np.int64),
                             c_radius=c_radius, regularized=regularized)
