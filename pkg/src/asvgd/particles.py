from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from asvgd.errors import NumericalError, ValidationError


@dataclass(frozen=True, eq=False)
class ParticleSet:
    """Particle positions ``(n, d)`` and the iteration that produced them.

    The array is copied on construction and marked read-only, so a snapshot
    handed to an observer can never change under it.
    """

    positions: np.ndarray
    iteration: int = 0

    def __post_init__(self):
        X = np.array(self.positions, dtype=np.float64, order="C", copy=True)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValidationError(f"positions must have shape (n, d) with n, d >= 1, got {X.shape}")
        if self.iteration < 0:
            raise ValidationError(f"iteration must be nonnegative, got {self.iteration}")
        bad = np.flatnonzero(~np.isfinite(X).all(axis=1))
        if bad.size:
            raise NumericalError(
                f"particle {bad[0]} has non-finite coordinates", step=self.iteration, index=int(bad[0])
            )
        X.setflags(write=False)
        object.__setattr__(self, "positions", X)
        object.__setattr__(self, "iteration", int(self.iteration))

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, ParticleSet):
            return NotImplemented
        return self.iteration == other.iteration and np.array_equal(self.positions, other.positions)
