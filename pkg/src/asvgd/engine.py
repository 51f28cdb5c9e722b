"""SVGD and annealed SVGD particle evolution.

For particles ``x_1..x_n`` the update direction at ``x_i`` is

    phi(x_i) = 1/n sum_j [ gamma k(x_j, x_i) grad log p(x_j) + grad_{x_j} k(x_j, x_i) ]

and all rows move together: ``x_i <- x_i + eps * phi(x_i)``, every row
computed from the pre-step positions. ``gamma = 1`` is plain SVGD.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple

import numpy as np

from asvgd import _backend
from asvgd.errors import NumericalError, ValidationError
from asvgd.kernels import KernelSpec
from asvgd.particles import ParticleSet
from asvgd.schedules import AnnealingSchedule
from asvgd.targets import GaussianMixture

logger = logging.getLogger(__name__)

Observer = Callable[[int, float, ParticleSet], None]


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Everything needed to reproduce one particle run.

    ``init_mean`` may be a scalar (broadcast to all coordinates) or a point.
    """

    target: GaussianMixture
    kernel: KernelSpec
    schedule: AnnealingSchedule
    step_size: float
    total_steps: int
    n_particles: int
    init_mean: object = 0.0
    init_scale: float = 1.0
    seed: int = 0
    checkpoint_every: int = 0

    def __post_init__(self):
        problems = []
        if not (self.step_size >= 0 and math.isfinite(self.step_size)):
            problems.append(f"step_size must be a nonnegative number, got {self.step_size}")
        if not isinstance(self.total_steps, (int, np.integer)) or self.total_steps < 0:
            problems.append(f"total_steps must be a nonnegative integer, got {self.total_steps!r}")
        elif self.total_steps > 0 and self.schedule.total_steps != self.total_steps:
            problems.append(
                f"schedule covers {self.schedule.total_steps} steps but the run has {self.total_steps}"
            )
        if not isinstance(self.n_particles, (int, np.integer)) or self.n_particles < 1:
            problems.append(f"n_particles must be a positive integer, got {self.n_particles!r}")
        if not (self.init_scale >= 0 and math.isfinite(self.init_scale)):
            problems.append(f"init_scale must be nonnegative, got {self.init_scale}")
        mean = np.atleast_1d(np.asarray(self.init_mean, dtype=float))
        if mean.ndim != 1 or mean.size not in (1, self.target.dim):
            problems.append(f"init_mean must be a scalar or a point of dimension {self.target.dim}")
        elif not np.all(np.isfinite(mean)):
            problems.append("init_mean must be finite")
        if not isinstance(self.checkpoint_every, (int, np.integer)) or self.checkpoint_every < 0:
            problems.append(f"checkpoint_every must be a nonnegative integer, got {self.checkpoint_every!r}")
        elif self.total_steps and self.checkpoint_every > self.total_steps:
            problems.append("checkpoint_every must not exceed total_steps")
        if problems:
            raise ValidationError("; ".join(problems), problems)

    @property
    def dim(self) -> int:
        return self.target.dim

    def init_point(self) -> np.ndarray:
        mean = np.atleast_1d(np.asarray(self.init_mean, dtype=float))
        return np.broadcast_to(mean, (self.dim,)).copy()


class Checkpoint(NamedTuple):
    iteration: int
    gamma: float
    particles: ParticleSet | None


@dataclass
class RunResult:
    final: ParticleSet
    checkpoints: list = field(default_factory=list)


def init_particles(config: RunConfig) -> ParticleSet:
    """``n`` i.i.d. draws from N(init_mean, init_scale^2 I), seeded."""
    rng = np.random.default_rng(config.seed)
    noise = rng.standard_normal((config.n_particles, config.dim))
    return ParticleSet(config.init_point() + config.init_scale * noise, iteration=0)


def _positions(particles) -> np.ndarray:
    if isinstance(particles, ParticleSet):
        return particles.positions
    X = np.ascontiguousarray(particles, dtype=np.float64)
    return X[:, None] if X.ndim == 1 else X


def _target_score(target: GaussianMixture, X: np.ndarray, step=None) -> np.ndarray:
    S = np.ascontiguousarray(target.score(X))
    bad = np.flatnonzero(~np.isfinite(S).all(axis=1))
    if bad.size:
        raise NumericalError(f"non-finite score at particle {bad[0]}", step=step, index=int(bad[0]))
    return S


def update_components(particles, target: GaussianMixture, bandwidth: float, gamma: float,
                      backend=None, sqdist=None) -> tuple[np.ndarray, np.ndarray]:
    """Driving and repulsive parts of the update direction, each ``(n, d)``.

    Args:
        particles: :class:`ParticleSet` or ``(n, d)`` array.
        target: Mixture supplying the score.
        bandwidth: Resolved kernel bandwidth ``h > 0``.
        gamma: Annealing factor in ``[0, 1]``.
        backend: ``"compiled"``, ``"python"`` or ``None`` for the active one.
        sqdist: Optional precomputed condensed squared distances.
    """
    if not (bandwidth > 0 and math.isfinite(bandwidth)):
        raise ValidationError(f"bandwidth must be positive, got {bandwidth}")
    if not 0.0 <= gamma <= 1.0:
        raise ValidationError(f"gamma must lie in [0, 1], got {gamma}")
    X = _positions(particles)
    if X.shape[1] != target.dim:
        raise ValidationError(f"particles have d={X.shape[1]}, target has d={target.dim}")
    ops = _backend.get(backend)
    S = _target_score(target, X, getattr(particles, "iteration", None))
    if sqdist is None:
        sqdist = ops.condensed_sqdist(X)
    K = ops.rbf_gram(sqdist, X.shape[0], float(bandwidth))
    drive = np.empty_like(X)
    repulse = np.empty_like(X)
    ops.svgd_forces(X, S, K, float(bandwidth), float(gamma), drive, repulse)
    return drive, repulse


def update_direction(particles, target: GaussianMixture, bandwidth: float, gamma: float = 1.0,
                     backend=None) -> np.ndarray:
    """Annealed SVGD direction for every particle, shape ``(n, d)``."""
    drive, repulse = update_components(particles, target, bandwidth, gamma, backend)
    return drive + repulse


def _advance(X, t, target, kernel, schedule, step_size, ops):
    sqdist = ops.condensed_sqdist(X)
    try:
        h = kernel.resolve(X, sqdist)
    except ValidationError as exc:
        # overflowing distances mean the particles have already blown up
        raise NumericalError(f"kernel bandwidth broke down at step {t}: {exc}", step=t) from None
    g = schedule.gamma(t)
    S = _target_score(target, X, t)
    K = ops.rbf_gram(sqdist, X.shape[0], h)
    drive = np.empty_like(X)
    repulse = np.empty_like(X)
    ops.svgd_forces(X, S, K, h, g, drive, repulse)
    X_new = X + step_size * (drive + repulse)
    if not np.isfinite(X_new).all():
        row = int(np.flatnonzero(~np.isfinite(X_new).all(axis=1))[0])
        raise NumericalError(f"particle {row} became non-finite at step {t}", step=t, index=row)
    return X_new


def step(particles: ParticleSet, target: GaussianMixture, kernel: KernelSpec,
         schedule: AnnealingSchedule, step_size: float, backend=None) -> ParticleSet:
    """One synchronous update at iteration ``particles.iteration``.

    A median-heuristic kernel is re-resolved from the pre-step positions.
    """
    ops = _backend.get(backend)
    X = _advance(particles.positions, particles.iteration, target, kernel, schedule, step_size, ops)
    return ParticleSet(X, particles.iteration + 1)


def run(config: RunConfig, observers: Iterable[Observer] = (), keep_snapshots: bool = True,
        backend=None) -> RunResult:
    """Evolve ``config.n_particles`` particles for ``config.total_steps`` steps.

    Checkpoints are taken at iteration 0, every ``checkpoint_every`` steps,
    and at the end. Each observer is called as ``observer(t, gamma, snapshot)``
    at every checkpoint, where ``gamma`` is the factor applied at step ``t``
    (the terminal value 1 for the final state).

    Args:
        config: Run description.
        observers: Callables invoked sequentially at each checkpoint.
        keep_snapshots: Store particle snapshots in the returned checkpoints.
        backend: Kernel backend name, ``None`` for the active one.

    Raises:
        NumericalError: A score or position became non-finite; ``step``
            holds the iteration.
    """
    ops = _backend.get(backend)
    observers = list(observers)
    T = config.total_steps
    every = config.checkpoint_every
    current = init_particles(config)
    X = np.array(current.positions)
    checkpoints = []

    def checkpoint(t):
        snap = ParticleSet(X, t)
        g = config.schedule.gamma(min(t, T - 1)) if T > 0 else 1.0
        for obs in observers:
            obs(t, g, snap)
        checkpoints.append(Checkpoint(t, g, snap if keep_snapshots else None))
        return snap

    last = checkpoint(0)
    for t in range(T):
        X = _advance(X, t, config.target, config.kernel, config.schedule, config.step_size, ops)
        if (every and (t + 1) % every == 0) or t + 1 == T:
            last = checkpoint(t + 1)
    logger.debug("run finished after %d steps", T)
    return RunResult(last, checkpoints)
