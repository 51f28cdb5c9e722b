import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from asvgd.errors import ValidationError
from asvgd.kernels import KernelSpec, kernel_eval, kernel_grad_first, lower_median, median_heuristic

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


def test_kernel_at_coincident_points_is_one():
    assert kernel_eval([0.3, -1.2], [0.3, -1.2], 0.7) == 1.0


@pytest.mark.parametrize(
    "x, y, h, expected",
    [
        ([0.0], [1.0], 1.0, math.exp(-1.0)),
        ([0.0, 0.0], [3.0, 4.0], 25.0, math.exp(-1.0)),
    ],
)
def test_kernel_hand_values(x, y, h, expected):
    assert kernel_eval(x, y, h) == pytest.approx(expected, rel=1e-15)
    assert expected == pytest.approx(0.367879, abs=1e-6)


def test_grad_hand_value():
    g = kernel_grad_first([1.0], [-1.0], 1.0)
    assert g[0] == pytest.approx(-4 * math.exp(-4), rel=1e-14)
    assert g[0] == pytest.approx(-0.073263, abs=1e-6)


def test_grad_vanishes_at_coincident_points():
    np.testing.assert_array_equal(kernel_grad_first([2.0, 1.0], [2.0, 1.0], 3.0), 0.0)


def _fd_grad(x, y, h, step=1e-5):
    out = np.empty_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = step
        out[k] = (kernel_eval(x + e, y, h) - kernel_eval(x - e, y, h)) / (2 * step)
    return out


@pytest.mark.parametrize("d", [1, 2, 10])
def test_grad_matches_finite_differences(rng, d):
    for _ in range(50):
        x = rng.uniform(-5, 5, d)
        y = rng.uniform(-5, 5, d)
        # keep the kernel away from underflow so relative error is meaningful
        h = float(np.sum((x - y) ** 2)) + rng.uniform(0.5, 2.0)
        g = kernel_grad_first(x, y, h)
        fd = _fd_grad(x, y, h)
        assert np.linalg.norm(g - fd) <= 1e-6 * max(np.linalg.norm(g), 1e-12)


@given(arrays(float, 3, elements=finite), arrays(float, 3, elements=finite), st.floats(0.01, 100))
def test_symmetry_bounds_and_antisymmetric_gradient(x, y, h):
    k = kernel_eval(x, y, h)
    assert k == kernel_eval(y, x, h)
    assert 0.0 <= k <= 1.0
    if np.array_equal(x, y):
        assert k == 1.0
    elif np.sum((x - y) ** 2) / h > 1e-12:
        # strictly below 1 once the exponent is representable
        assert k < 1.0
    np.testing.assert_allclose(kernel_grad_first(x, y, h), -kernel_grad_first(y, x, h), rtol=0, atol=0)


def test_dimension_mismatch_and_nonfinite_rejected():
    with pytest.raises(ValidationError):
        kernel_eval([0.0, 1.0], [0.0], 1.0)
    with pytest.raises(ValidationError):
        kernel_grad_first([np.nan], [0.0], 1.0)
    with pytest.raises(ValidationError):
        kernel_eval([0.0], [1.0], 0.0)


def test_median_heuristic_hand_value():
    h = median_heuristic(np.array([[0.0], [1.0], [2.0]]))
    assert h == pytest.approx(1 / math.log(3), rel=1e-15)
    assert h == pytest.approx(0.910239, abs=1e-6)


def test_median_heuristic_degenerate_returns_floor():
    assert median_heuristic(np.ones((6, 2)), floor=1e-8) == 1e-8


def test_median_heuristic_needs_two_particles():
    with pytest.raises(ValidationError):
        median_heuristic(np.zeros((1, 3)))
    # a kernel spec still resolves for a single particle
    assert KernelSpec().resolve(np.zeros((1, 3))) == KernelSpec().floor


def test_lower_median_even_length():
    assert lower_median([4.0, 1.0, 3.0, 2.0]) == 2.0


def test_median_heuristic_scales_quadratically(rng):
    X = rng.normal(size=(30, 3))
    c = 2.5
    assert median_heuristic(c * X) == pytest.approx(c**2 * median_heuristic(X), rel=1e-12)


@settings(max_examples=30)
@given(st.integers(2, 25), st.integers(0, 2**31 - 1))
def test_median_heuristic_permutation_invariant(n, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 2))
    perm = rng.permutation(n)
    assert median_heuristic(X[perm]) == median_heuristic(X)


def test_kernel_spec_validation():
    with pytest.raises(ValidationError):
        KernelSpec(bandwidth=-1.0)
    with pytest.raises(ValidationError):
        KernelSpec.from_value("wide")
    assert KernelSpec.from_value("median").is_median
    assert KernelSpec.from_value(0.1).resolve(np.zeros((4, 1))) == 0.1
