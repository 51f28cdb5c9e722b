"""Annealing schedules gamma(t) in [0, 1] that scale the driving force.

Every schedule is forced to 1 on a final window of steps so the last
iterations always run against the untempered target.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from asvgd.errors import ValidationError

FAMILIES = ("constant", "linear", "hyperbolic", "cyclical")
# 1.3 is the fixed time stretch inside the tanh ramp
HYPERBOLIC_STRETCH = 1.3
DEFAULT_P = {"hyperbolic": 5.0, "cyclical": 2.0}
DEFAULT_CLAMP = 0.05


@dataclass(frozen=True)
class AnnealingSchedule:
    """One annealing schedule over ``total_steps`` iterations.

    Attributes:
        family: ``constant``, ``linear``, ``hyperbolic`` or ``cyclical``.
        total_steps: Number of iterations T.
        p: Exponent of the hyperbolic and cyclical families. ``None`` picks
            the family default (5 for hyperbolic, 2 for cyclical).
        cycles: Number of cycles C of the cyclical family.
        gamma0: Value of the constant family.
        final_clamp_fraction: Fraction of trailing steps held at gamma = 1.
    """

    family: str
    total_steps: int
    p: float | None = None
    cycles: int = 5
    gamma0: float = 1.0
    final_clamp_fraction: float = DEFAULT_CLAMP

    def __post_init__(self):
        problems = []
        if self.family not in FAMILIES:
            problems.append(f"unknown schedule family {self.family!r}; expected one of {FAMILIES}")
        if not isinstance(self.total_steps, (int, np.integer)) or self.total_steps < 1:
            problems.append(f"total_steps must be a positive integer, got {self.total_steps!r}")
        if self.p is not None and not (self.p > 0 and math.isfinite(self.p)):
            problems.append(f"p must be positive, got {self.p}")
        if not isinstance(self.cycles, (int, np.integer)) or self.cycles < 1:
            problems.append(f"cycles must be a positive integer, got {self.cycles!r}")
        if not 0.0 <= self.gamma0 <= 1.0:
            problems.append(f"gamma0 must lie in [0, 1], got {self.gamma0}")
        if not 0.0 <= self.final_clamp_fraction < 1.0:
            problems.append(f"final_clamp_fraction must lie in [0, 1), got {self.final_clamp_fraction}")
        if problems:
            raise ValidationError("; ".join(problems), problems)
        if self.p is None and self.family in DEFAULT_P:
            object.__setattr__(self, "p", DEFAULT_P[self.family])

    @classmethod
    def standard(cls, total_steps: int) -> "AnnealingSchedule":
        """Unannealed SVGD: gamma = 1 throughout."""
        return cls("constant", total_steps, gamma0=1.0)

    @property
    def cycle_length(self) -> int:
        return math.ceil(self.total_steps / self.cycles)

    @property
    def clamp_start(self) -> int:
        """First step of the gamma = 1 window; the last step is always inside it."""
        T = self.total_steps
        held = math.floor(self.final_clamp_fraction * T + 1e-9)
        return min(T - held, T - 1)

    def raw(self, t: float) -> float:
        """Family formula without the final clamp, for ``0 <= t <= T``."""
        T = self.total_steps
        if self.family == "constant":
            return float(self.gamma0)
        if self.family == "linear":
            return 1.0 if T == 1 else min(t / (T - 1), 1.0)
        if self.family == "hyperbolic":
            return math.tanh((HYPERBOLIC_STRETCH * t / T) ** self.p)
        L = self.cycle_length
        return ((t % L) / L) ** self.p

    def gamma(self, t: int) -> float:
        """Annealing factor at step ``t`` (``0 <= t < T``)."""
        if not 0 <= t < self.total_steps:
            raise ValidationError(f"step {t} outside [0, {self.total_steps})")
        if t >= self.clamp_start:
            return 1.0
        return self.raw(t)

    def temperature(self, t: int) -> float:
        """Temperature ``1 / gamma(t)``; infinite where gamma is 0."""
        g = self.gamma(t)
        return math.inf if g == 0.0 else 1.0 / g

    def values(self) -> np.ndarray:
        """gamma(t) for every step, as an array of length T."""
        return np.array([self.gamma(t) for t in range(self.total_steps)])

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "p": self.p,
            "cycles": self.cycles,
            "gamma0": self.gamma0,
            "final_clamp_fraction": self.final_clamp_fraction,
        }


def gamma(schedule: AnnealingSchedule, t: int) -> float:
    """Functional form of :meth:`AnnealingSchedule.gamma`."""
    return schedule.gamma(t)
