"""Isotropic Gaussian mixture targets and the benchmark layouts.

All responsibilities and densities go through log-sum-exp, so the score
stays finite far out in the tails.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from asvgd.errors import ValidationError
from asvgd.particles import ParticleSet

LOG_2PI = math.log(2.0 * math.pi)

# Benchmark layouts. Concrete numbers are choices of this package.
UNIVARIATE5_MEANS = (-3.0, -1.5, 0.0, 1.5, 3.0)
UNIVARIATE5_SIGMA = 0.25
GRID16_SPACING = 3.0
GRID16_SIGMA = 0.5
IRREGULAR_WEIGHTS = (0.35, 0.25, 0.2, 0.15, 0.05)
IRREGULAR_MEANS = ((-1.8, 1.5), (1.5, 1.8), (0.0, 0.0), (1.8, -1.5), (-1.5, -1.8))
IRREGULAR_SIGMA = 0.5
HIGHDIM_COMPONENTS = 5
HIGHDIM_MEAN_SCALE = 2.0  # means ~ N(0, 4 I)
HIGHDIM_SIGMA = 1.0


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    """Mixture of isotropic Gaussians ``sum_i w_i N(mu_i, sigma_i^2 I)``.

    Weights are normalized on construction.

    Attributes:
        weights: Shape ``(K,)``.
        means: Shape ``(K, d)``.
        sigmas: Per-component standard deviations, shape ``(K,)``.
    """

    weights: np.ndarray
    means: np.ndarray
    sigmas: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64).reshape(-1)
        mu = np.array(self.means, dtype=np.float64)
        if mu.ndim == 1:
            mu = mu[:, None]
        s = np.array(self.sigmas, dtype=np.float64).reshape(-1)
        if s.size == 1 and w.size > 1:
            s = np.full(w.size, s[0])
        problems = []
        if w.size < 1:
            problems.append("mixture needs at least one component")
        if mu.ndim != 2 or mu.shape[0] != w.size:
            problems.append(f"means shape {mu.shape} does not match {w.size} weights")
        if s.size != w.size:
            problems.append(f"{s.size} sigmas for {w.size} weights")
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            problems.append("weights must be positive and finite")
        if np.any(~np.isfinite(s)) or np.any(s <= 0):
            problems.append("sigmas must be positive and finite")
        if not np.all(np.isfinite(mu)):
            problems.append("means must be finite")
        if problems:
            raise ValidationError("; ".join(problems), problems)
        w = w / w.sum()
        for a in (w, mu, s):
            a.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", np.ascontiguousarray(mu))
        object.__setattr__(self, "sigmas", s)

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def n_components(self) -> int:
        return self.weights.size

    def _points(self, x):
        X = np.asarray(x, dtype=np.float64)
        single = False
        if X.ndim == 0:
            X, single = X.reshape(1, 1), True
        elif X.ndim == 1 and X.size == self.dim:
            X, single = X[None, :], True
        elif X.ndim == 1 and self.dim == 1:
            # flat array of scalars for a 1-D mixture
            X = X[:, None]
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise ValidationError(f"dimension mismatch: mixture has d={self.dim}, got shape {np.shape(x)}")
        bad = np.flatnonzero(~np.isfinite(X).all(axis=1))
        if bad.size:
            raise ValidationError(f"point {bad[0]} has non-finite coordinates")
        return X, single

    def _log_components(self, X):
        # (n, K) log w_k + log N(x; mu_k, sigma_k^2 I)
        d = self.dim
        out = np.empty((X.shape[0], self.n_components))
        for k in range(self.n_components):
            diff = X - self.means[k]
            sq = np.einsum("ij,ij->i", diff, diff)
            var = self.sigmas[k] ** 2
            out[:, k] = math.log(self.weights[k]) - 0.5 * d * (LOG_2PI + math.log(var)) - 0.5 * sq / var
        return out

    def log_density(self, x):
        """Log density at one point ``(d,)`` or many ``(n, d)``."""
        X, single = self._points(x)
        lp = logsumexp(self._log_components(X), axis=1)
        return float(lp[0]) if single else lp

    def responsibilities(self, x) -> np.ndarray:
        """Posterior component probabilities, shape ``(n, K)``."""
        X, _ = self._points(x)
        lc = self._log_components(X)
        return np.exp(lc - logsumexp(lc, axis=1, keepdims=True))

    def score(self, x):
        """Gradient of the log density, ``sum_k r_k(x) (mu_k - x) / sigma_k^2``."""
        X, single = self._points(x)
        lc = self._log_components(X)
        R = np.exp(lc - logsumexp(lc, axis=1, keepdims=True)) / self.sigmas**2
        S = R @ self.means - X * R.sum(axis=1, keepdims=True)
        return S[0] if single else S

    def sample(self, count: int, seed=None) -> np.ndarray:
        """Ancestral samples, shape ``(count, d)``; deterministic given ``seed``."""
        if count < 1:
            raise ValidationError(f"sample count must be positive, got {count}")
        rng = np.random.default_rng(seed)
        comps = rng.choice(self.n_components, size=count, p=self.weights)
        noise = rng.standard_normal((count, self.dim))
        return self.means[comps] + self.sigmas[comps, None] * noise

    def mean(self) -> np.ndarray:
        return self.weights @ self.means

    def covariance(self) -> np.ndarray:
        m = self.mean()
        second = np.einsum("k,ki,kj->ij", self.weights, self.means, self.means)
        second += np.eye(self.dim) * float(self.weights @ self.sigmas**2)
        return second - np.outer(m, m)

    def to_dict(self) -> dict:
        return {
            "components": [
                {"weight": float(w), "mean": [float(v) for v in mu], "sigma": float(s)}
                for w, mu, s in zip(self.weights, self.means, self.sigmas)
            ]
        }

    @classmethod
    def from_components(cls, components) -> "GaussianMixture":
        """Build from an iterable of ``{weight, mean, sigma}`` mappings."""
        comps = list(components)
        if not comps:
            raise ValidationError("mixture needs at least one component")
        try:
            w = [float(c["weight"]) for c in comps]
            mu = [np.atleast_1d(np.asarray(c["mean"], dtype=float)) for c in comps]
            s = [float(c["sigma"]) for c in comps]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad mixture component: {exc}") from None
        if len({m.shape for m in mu}) != 1:
            raise ValidationError("all component means must have the same dimension")
        return cls(w, np.stack(mu), s)


def log_density(m: GaussianMixture, x):
    return m.log_density(x)


def score(m: GaussianMixture, x):
    return m.score(x)


def sample_exact(m: GaussianMixture, count: int, seed=None) -> ParticleSet:
    """Exact draws from ``m`` wrapped as a :class:`ParticleSet`."""
    return ParticleSet(m.sample(count, seed))


def univariate5() -> GaussianMixture:
    return GaussianMixture(np.full(5, 0.2), np.array(UNIVARIATE5_MEANS)[:, None], UNIVARIATE5_SIGMA)


def grid16(spacing: float = GRID16_SPACING, sigma: float = GRID16_SIGMA) -> GaussianMixture:
    """16 equal components on a 4x4 grid centred at the origin."""
    axis = spacing * np.array([-1.5, -0.5, 0.5, 1.5])
    means = np.array([(a, b) for a in axis for b in axis])
    return GaussianMixture(np.full(16, 1 / 16), means, sigma)


def irregular() -> GaussianMixture:
    return GaussianMixture(IRREGULAR_WEIGHTS, np.array(IRREGULAR_MEANS), IRREGULAR_SIGMA)


def highdim(d: int = 100, seed=0, components: int = HIGHDIM_COMPONENTS,
            sigma: float = HIGHDIM_SIGMA) -> GaussianMixture:
    """Equal-weight mixture in ``d`` dimensions with means drawn from N(0, 4 I)."""
    if d < 1 or components < 1:
        raise ValidationError("highdim needs d >= 1 and components >= 1")
    rng = np.random.default_rng(seed)
    means = HIGHDIM_MEAN_SCALE * rng.standard_normal((components, d))
    return GaussianMixture(np.full(components, 1 / components), means, sigma)


PAPER_TARGETS = {
    "univariate5": univariate5,
    "grid16": grid16,
    "irregular": irregular,
    "highdim": highdim,
}


def paper_targets(name: str, **params) -> GaussianMixture:
    """Named benchmark mixture; ``params`` go to the layout builder."""
    try:
        builder = PAPER_TARGETS[name]
    except KeyError:
        raise ValidationError(f"unknown target {name!r}; expected one of {sorted(PAPER_TARGETS)}") from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for target {name!r}: {exc}") from None
