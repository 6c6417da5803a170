"""Synthetic union-of-subspaces targets with closed-form smoothed oracles.

Each component places a Gaussian mixture inside one linear subspace.  The
Gaussian-smoothed density, its score, and the per-component posterior weights
are all available in closed form, which gives exact ground truth for testing
the kernel estimator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import NonpositiveTime
from .geometry import Subspace, random_subspace, residual_norm, subspaces_equal

_LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class SubspaceComponent:
    """One mixture component: a GMM living inside a subspace.

    ``weights`` (m,), ``means`` (m, k), ``covs`` (m, k, k) define the
    low-dimensional mixture; ``mass`` is the probability of the component.
    """

    subspace: Subspace
    mass: float
    weights: np.ndarray
    means: np.ndarray
    covs: np.ndarray

    def __post_init__(self):
        k = self.subspace.intrinsic_dim
        weights = np.asarray(self.weights, dtype=np.float64)
        means = np.asarray(self.means, dtype=np.float64).reshape(-1, k)
        covs = np.asarray(self.covs, dtype=np.float64).reshape(-1, k, k)
        if not (0.0 < self.mass <= 1.0):
            raise ValueError("component mass must lie in (0, 1]")
        if np.any(weights <= 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("gmm weights must be positive and sum to 1")
        if len(weights) != len(means) or len(weights) != len(covs):
            raise ValueError("inconsistent gmm sizes")
        for cov in covs:
            if np.max(np.abs(cov - cov.T)) > 1e-12:
                raise ValueError("covariance not symmetric")
            if np.min(np.linalg.eigvalsh(cov)) < -1e-12:
                raise ValueError("covariance not positive semidefinite")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covs", covs)

    @property
    def n_gauss(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class UoSTarget:
    """Target distribution supported on a union of subspaces."""

    ambient_dim: int
    components: list = field(default_factory=list)
    c_p: float = 4.0

    def __post_init__(self):
        masses = np.array([c.mass for c in self.components])
        m = len(self.components)
        if m == 0:
            raise ValueError("need at least one component")
        if abs(masses.sum() - 1.0) > 1e-12:
            raise ValueError("component masses must sum to 1")
        if np.any(masses < 1.0 / (self.c_p * m) - 1e-12):
            raise ValueError(f"each mass must be >= 1/({self.c_p}*M)")
        for c in self.components:
            if c.subspace.ambient_dim != self.ambient_dim:
                raise ValueError("component ambient dim mismatch")
        for i in range(m):
            for j in range(i + 1, m):
                if subspaces_equal(self.components[i].subspace,
                                   self.components[j].subspace):
                    raise ValueError(f"components {i} and {j} share a subspace")

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def masses(self) -> np.ndarray:
        return np.array([c.mass for c in self.components])


def _gmm_sqrt_covs(comp: SubspaceComponent) -> np.ndarray:
    # Symmetric PSD square roots; handles singular covariances.
    roots = np.empty_like(comp.covs)
    for j, cov in enumerate(comp.covs):
        lam, vec = np.linalg.eigh(cov)
        lam = np.clip(lam, 0.0, None)
        roots[j] = (vec * np.sqrt(lam)) @ vec.T
    return roots


def sample(target: UoSTarget, n: int, rng: np.random.Generator,
           return_labels: bool = False):
    """Draw n i.i.d. ambient samples; each lies exactly on its subspace."""
    if n < 1:
        raise ValueError("n must be >= 1")
    labels = rng.choice(target.n_components, size=n, p=target.masses)
    out = np.zeros((n, target.ambient_dim))
    for i, comp in enumerate(target.components):
        idx = np.flatnonzero(labels == i)
        if idx.size == 0:
            continue
        which = rng.choice(comp.n_gauss, size=idx.size, p=comp.weights)
        xi = rng.standard_normal((idx.size, comp.subspace.intrinsic_dim))
        roots = _gmm_sqrt_covs(comp)
        z = comp.means[which] + np.einsum("njk,nk->nj", roots[which], xi)
        out[idx] = z @ comp.subspace.basis.T
    if return_labels:
        return out, labels
    return out


def _component_terms(target: UoSTarget, t: float, x: np.ndarray):
    """Per-(component, gaussian) log densities and Gaussian scores.

    The smoothed covariance A S A^T + t I is inverted through the subspace
    split: quadratic form = ||x - proj(x)||^2 / t + u^T (S + tI)^{-1} u with
    u = A^T x - mu, and log det = (d - k) log t + log det(S + tI).

    Returns (log_terms, scores) with shapes (Q, total) and (Q, total, d),
    plus the flat (component index, log mixture weight) bookkeeping.
    """
    d = target.ambient_dim
    q = x.shape[0]
    log_terms = []
    scores = []
    comp_idx = []
    for i, comp in enumerate(target.components):
        a = comp.subspace.basis
        k = comp.subspace.intrinsic_dim
        u_all = x @ a  # (Q, k)
        resid = x - u_all @ a.T  # (Q, d)
        resid_sq = np.einsum("qd,qd->q", resid, resid)
        for j in range(comp.n_gauss):
            sm = comp.covs[j] + t * np.eye(k)
            chol = np.linalg.cholesky(sm)
            u = u_all - comp.means[j]  # (Q, k)
            w = np.linalg.solve(chol, u.T)  # (k, Q)
            quad = resid_sq / t + np.einsum("kq,kq->q", w, w)
            logdet = (d - k) * np.log(t) + 2.0 * np.sum(np.log(np.diag(chol)))
            log_norm = -0.5 * (d * _LOG_2PI + logdet + quad)
            log_terms.append(np.log(comp.mass) + np.log(comp.weights[j])
                             + log_norm)
            # -C^{-1} (x - A mu) = -(resid / t + A (S + tI)^{-1} u)
            sinv_u = np.linalg.solve(chol.T, w).T  # (Q, k)
            scores.append(-(resid / t + sinv_u @ a.T))
            comp_idx.append(i)
    return (np.stack(log_terms, axis=1),
            np.stack(scores, axis=1),
            np.asarray(comp_idx))


def _as_batch(x, d):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != d:
        raise ValueError(f"expected points of dimension {d}")
    return x, single


def _check_time(t):
    if not t > 0:
        raise NonpositiveTime(f"t must be > 0, got {t}")


def smoothed_density(target: UoSTarget, t: float, x) -> np.ndarray:
    """log p_t(x) for p_t = p* convolved with N(0, t I_d)."""
    _check_time(t)
    x, single = _as_batch(x, target.ambient_dim)
    log_terms, _, _ = _component_terms(target, t, x)
    out = logsumexp(log_terms, axis=1)
    return out[0] if single else out


def true_score(target: UoSTarget, t: float, x) -> np.ndarray:
    """Analytic score of the smoothed target (VE process ground truth)."""
    _check_time(t)
    x, single = _as_batch(x, target.ambient_dim)
    log_terms, scores, _ = _component_terms(target, t, x)
    log_norm = logsumexp(log_terms, axis=1, keepdims=True)
    resp = np.exp(log_terms - log_norm)  # (Q, total)
    out = np.einsum("qj,qjd->qd", resp, scores)
    return out[0] if single else out


def true_weight(target: UoSTarget, t: float, i: int, x) -> np.ndarray:
    """Posterior probability that a smoothed observation came from subspace i."""
    _check_time(t)
    if not (0 <= i < target.n_components):
        raise IndexError("component index out of range")
    x, single = _as_batch(x, target.ambient_dim)
    log_terms, _, comp_idx = _component_terms(target, t, x)
    log_p = logsumexp(log_terms, axis=1)
    log_q = logsumexp(log_terms[:, comp_idx == i], axis=1)
    out = np.exp(log_q - log_p)
    return out[0] if single else out


def random_target(d: int, m: int, k: int, rng: np.random.Generator,
                  n_mix: int = 2, mean_radius: float = 3.0,
                  eig_range: tuple = (0.05, 1.0), c_p: float = 4.0) -> UoSTarget:
    """Randomized target: m random k-dim subspaces, each with an n_mix GMM.

    Means are clamped to ||mu|| <= mean_radius and covariance eigenvalues to
    eig_range, which keeps the subgaussian scale comparable across seeds.
    """
    masses = rng.uniform(0.5, 1.5, size=m)
    masses /= masses.sum()  # every mass >= 1/(3m) > 1/(c_p m) for c_p = 4
    components = []
    for _ in range(m):
        sub = random_subspace(d, k, rng)
        weights = rng.uniform(0.3, 1.0, size=n_mix)
        weights /= weights.sum()
        means = rng.standard_normal((n_mix, k))
        norms = np.linalg.norm(means, axis=1, keepdims=True)
        scale = np.minimum(1.0, mean_radius / np.maximum(norms, 1e-12))
        means = means * scale * rng.uniform(0.3, 1.0, size=(n_mix, 1))
        covs = np.empty((n_mix, k, k))
        for j in range(n_mix):
            q, _ = np.linalg.qr(rng.standard_normal((k, k)))
            lam = rng.uniform(eig_range[0], eig_range[1], size=k)
            covs[j] = (q * lam) @ q.T
            covs[j] = 0.5 * (covs[j] + covs[j].T)
        components.append(SubspaceComponent(
            subspace=sub, mass=masses[len(components)],
            weights=weights, means=means, covs=covs))
    return UoSTarget(ambient_dim=d, components=components, c_p=c_p)
