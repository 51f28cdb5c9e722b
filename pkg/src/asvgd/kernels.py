"""RBF kernel, its gradient and bandwidth selection.

The kernel is parameterized as ``k(x, y) = exp(-|x - y|^2 / h)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from asvgd import _backend
from asvgd.errors import ValidationError

DEFAULT_FLOOR = 1e-8
MEDIAN = "median"


@dataclass(frozen=True)
class KernelSpec:
    """RBF kernel with either a fixed bandwidth or the median heuristic.

    Attributes:
        bandwidth: Fixed ``h > 0``, or ``None`` for the median heuristic.
        floor: Lower bound applied to every resolved bandwidth.
    """

    bandwidth: float | None = None
    floor: float = DEFAULT_FLOOR
    family: str = "rbf"

    def __post_init__(self):
        if self.family != "rbf":
            raise ValidationError(f"unsupported kernel family {self.family!r}")
        if not (self.floor > 0 and math.isfinite(self.floor)):
            raise ValidationError(f"bandwidth floor must be positive, got {self.floor}")
        if self.bandwidth is not None:
            if not (self.bandwidth > 0 and math.isfinite(self.bandwidth)):
                raise ValidationError(f"fixed bandwidth must be positive, got {self.bandwidth}")

    @property
    def is_median(self) -> bool:
        return self.bandwidth is None

    @property
    def label(self) -> str:
        return MEDIAN if self.is_median else repr(float(self.bandwidth))

    def resolve(self, positions, sqdist=None) -> float:
        """Bandwidth to use for ``positions`` (an ``(n, d)`` array).

        ``sqdist`` may carry precomputed condensed squared distances. A
        single particle has no pairs; the floor is returned in that case.
        """
        if not self.is_median:
            return max(float(self.bandwidth), self.floor)
        if len(positions) < 2:
            return self.floor
        return median_heuristic(positions, floor=self.floor, sqdist=sqdist)

    @classmethod
    def from_value(cls, value, floor=DEFAULT_FLOOR) -> "KernelSpec":
        """Build from a config value: a positive number or ``"median"``."""
        if value is None or (isinstance(value, str) and value.lower() == MEDIAN):
            return cls(None, floor)
        try:
            h = float(value)
        except (TypeError, ValueError):
            raise ValidationError(f"bandwidth must be a positive number or 'median', got {value!r}") from None
        return cls(h, floor)


def _as_point(x, name):
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 0:
        a = a.reshape(1)
    if a.ndim != 1:
        raise ValidationError(f"{name} must be a point (1-D array), got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} contains non-finite values")
    return a


def _check_pair(x, y, h):
    x = _as_point(x, "x")
    y = _as_point(y, "y")
    if x.shape != y.shape:
        raise ValidationError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    if not (h > 0 and math.isfinite(h)):
        raise ValidationError(f"bandwidth must be positive, got {h}")
    return x, y


def kernel_eval(x, y, h: float) -> float:
    """``exp(-|x - y|^2 / h)`` for two points of equal dimension."""
    x, y = _check_pair(x, y, h)
    diff = x - y
    return math.exp(-float(diff @ diff) / h)


def kernel_grad_first(x, y, h: float) -> np.ndarray:
    """Gradient of the kernel with respect to its first argument.

    ``grad_x k(x, y) = -(2 / h) (x - y) k(x, y)``.
    """
    x, y = _check_pair(x, y, h)
    diff = x - y
    return (-2.0 / h) * diff * math.exp(-float(diff @ diff) / h)


def lower_median(values) -> float:
    """Median of a 1-D array; the lower-middle element for even lengths."""
    values = np.asarray(values)
    if values.size == 0:
        raise ValidationError("median of an empty set")
    k = (values.size - 1) // 2
    return float(np.partition(values, k)[k])


def median_heuristic(positions, floor: float = DEFAULT_FLOOR, sqdist=None) -> float:
    """Median-heuristic bandwidth ``h = med^2 / log(n)``.

    ``med`` is the median of the ``n(n-1)/2`` pairwise Euclidean distances.
    The median is taken directly over squared distances, which selects the
    same pair and avoids a square root round trip.

    Args:
        positions: Particle positions, shape ``(n, d)`` with ``n >= 2``.
        floor: Returned whenever the heuristic falls below it, e.g. when all
            particles coincide.
        sqdist: Optional precomputed condensed squared distances.

    Returns:
        The bandwidth, never below ``floor``.
    """
    X = np.ascontiguousarray(positions, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if n < 2:
        raise ValidationError(f"median heuristic needs at least 2 particles, got {n}")
    if sqdist is None:
        sqdist = _backend.get().condensed_sqdist(X)
    h = lower_median(sqdist) / math.log(n)
    if not math.isfinite(h):
        raise ValidationError("median heuristic produced a non-finite bandwidth")
    return max(h, floor)


def gram(positions, h: float, sqdist=None) -> np.ndarray:
    """Kernel matrix ``K[i, j] = k(x_i, x_j)`` for one particle set."""
    X = np.ascontiguousarray(positions, dtype=np.float64)
    ops = _backend.get()
    if sqdist is None:
        sqdist = ops.condensed_sqdist(X)
    return ops.rbf_gram(sqdist, X.shape[0], float(h))
