"""Sample-quality diagnostics: MMD, mode assignment, coverage, distances."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from asvgd import _backend
from asvgd.errors import ValidationError
from asvgd.kernels import DEFAULT_FLOOR, median_heuristic
from asvgd.particles import ParticleSet
from asvgd.targets import GaussianMixture

DEFAULT_RADIUS = 2.0
DEFAULT_BINS = 50
DEFAULT_REFERENCE_SAMPLES = 1000


def _array(points, name="particles") -> np.ndarray:
    if isinstance(points, ParticleSet):
        return points.positions
    X = np.ascontiguousarray(points, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValidationError(f"{name} must have shape (n, d), got {X.shape}")
    return X


def mmd2_unbiased(X, Y, bandwidth: float | None = None, backend=None) -> float:
    """Unbiased (U-statistic) estimate of the squared MMD between two samples.

    Uses the RBF kernel ``exp(-|x - y|^2 / h)``. With ``bandwidth=None`` the
    median heuristic is applied to the pooled sample. The estimate can be
    slightly negative when the two distributions match.
    """
    X = _array(X, "X")
    Y = _array(Y, "Y")
    n, m = len(X), len(Y)
    if n < 2 or m < 2:
        raise ValidationError(f"MMD needs at least 2 points per sample, got {n} and {m}")
    if X.shape[1] != Y.shape[1]:
        raise ValidationError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if bandwidth is None:
        bandwidth = median_heuristic(np.vstack([X, Y]), floor=DEFAULT_FLOOR)
    elif not (bandwidth > 0 and math.isfinite(bandwidth)):
        raise ValidationError(f"bandwidth must be positive, got {bandwidth}")
    ops = _backend.get(backend)
    kxx = ops.kernel_sum(X, X, bandwidth, True)
    kyy = ops.kernel_sum(Y, Y, bandwidth, True)
    kxy = ops.kernel_sum(X, Y, bandwidth, False)
    return kxx / (n * (n - 1)) + kyy / (m * (m - 1)) - 2.0 * kxy / (n * m)


def _mode_sqdist(X: np.ndarray, mixture: GaussianMixture) -> np.ndarray:
    if X.shape[1] != mixture.dim:
        raise ValidationError(f"particles have d={X.shape[1]}, mixture has d={mixture.dim}")
    out = np.empty((len(X), mixture.n_components))
    for k, mu in enumerate(mixture.means):
        diff = X - mu
        out[:, k] = np.einsum("ij,ij->i", diff, diff)
    return out


def assign_modes(particles, mixture: GaussianMixture) -> np.ndarray:
    """Index of the nearest component mean per particle; ties go to the lowest index."""
    return np.argmin(_mode_sqdist(_array(particles), mixture), axis=1)


@dataclass(frozen=True)
class Coverage:
    modes_covered: int
    mode_fractions: np.ndarray


def coverage_stats(particles, mixture: GaussianMixture,
                   radius_multiplier: float = DEFAULT_RADIUS) -> Coverage:
    """Mode coverage and per-mode particle fractions.

    A component counts as covered when at least one particle lies within
    ``radius_multiplier * sigma_k`` of its mean. Fractions come from
    :func:`assign_modes`.
    """
    if not radius_multiplier > 0:
        raise ValidationError(f"radius_multiplier must be positive, got {radius_multiplier}")
    X = _array(particles)
    sq = _mode_sqdist(X, mixture)
    radius = radius_multiplier * mixture.sigmas
    covered = int(np.count_nonzero((np.sqrt(sq) <= radius).any(axis=0)))
    labels = np.argmin(sq, axis=1)
    fractions = np.bincount(labels, minlength=mixture.n_components) / len(X)
    return Coverage(covered, fractions)


@dataclass(frozen=True)
class ModeHistogram:
    mode_index: int
    bin_edges: np.ndarray
    counts: np.ndarray

    def to_dict(self) -> dict:
        return {
            "mode_index": int(self.mode_index),
            "bin_edges": [float(e) for e in self.bin_edges],
            "counts": [int(c) for c in self.counts],
        }


def mode_distances(particles, mixture: GaussianMixture) -> np.ndarray:
    """Euclidean distance of every particle to every mean, shape ``(n, K)``."""
    return np.sqrt(_mode_sqdist(_array(particles), mixture))


def distance_histogram(particles, mixture: GaussianMixture, bins: int = DEFAULT_BINS,
                       max_distance: float | None = None) -> list[ModeHistogram]:
    """Per-mode histograms of particle-to-mean distances on shared bin edges.

    Edges run uniformly from 0 to ``max_distance`` (default: the largest
    observed distance over all modes), so every mode's counts sum to n.
    """
    if bins < 1:
        raise ValidationError(f"bins must be at least 1, got {bins}")
    D = mode_distances(particles, mixture)
    top = float(D.max()) if max_distance is None else float(max_distance)
    if not top > 0:
        top = 1.0
    edges = np.linspace(0.0, top, bins + 1)
    out = []
    for k in range(mixture.n_components):
        # clip so distances beyond a caller-supplied edge land in the last bin
        counts, _ = np.histogram(np.minimum(D[:, k], top), bins=edges)
        out.append(ModeHistogram(k, edges, counts))
    return out


@dataclass
class DiagnosticsRecord:
    iteration: int
    gamma: float
    mmd2: float
    modes_covered: int | None
    mode_fractions: np.ndarray
    distance_histogram: list | None = None


@dataclass
class DiagnosticsTracker:
    """Observer that records a :class:`DiagnosticsRecord` at every checkpoint.

    ``reference`` is a fixed exact sample from the target, reused at every
    checkpoint so the MMD series is comparable over time. Pass ``None`` to
    skip MMD (recorded as NaN).
    """

    mixture: GaussianMixture
    reference: np.ndarray | None = None
    coverage: bool = True
    radius_multiplier: float = DEFAULT_RADIUS
    backend: str | None = None
    records: list = field(default_factory=list)

    def __call__(self, t: int, gamma: float, snapshot: ParticleSet) -> None:
        X = snapshot.positions
        mmd2 = math.nan
        if self.reference is not None and len(X) >= 2:
            mmd2 = mmd2_unbiased(X, self.reference, backend=self.backend)
        if self.coverage:
            cov = coverage_stats(X, self.mixture, self.radius_multiplier)
            covered, fractions = cov.modes_covered, cov.mode_fractions
        else:
            covered, fractions = None, np.full(self.mixture.n_components, math.nan)
        self.records.append(DiagnosticsRecord(t, gamma, mmd2, covered, fractions))
