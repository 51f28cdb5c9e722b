import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from asvgd import _backend
from asvgd import _fallback

pytestmark = pytest.mark.skipif("compiled" not in _backend.BACKENDS, reason="compiled core not built")


def pair():
    return _backend.BACKENDS["compiled"], _fallback


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.sampled_from([1, 2, 3, 8, 17]), st.integers(0, 2**31))
def test_distances_agree(n, d, seed):
    core, py = pair()
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    Y = rng.normal(size=(n + 3, d))
    np.testing.assert_allclose(core.cross_sqdist(X, Y), py.cross_sqdist(X, Y), rtol=1e-10, atol=1e-11)
    np.testing.assert_allclose(core.condensed_sqdist(X), py.condensed_sqdist(X), rtol=1e-10, atol=1e-11)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 40), st.sampled_from([1, 2, 9, 30]), st.floats(0.05, 20), st.floats(0, 1),
       st.integers(0, 2**31))
def test_forces_agree(n, d, h, gamma, seed):
    core, py = pair()
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    S = rng.normal(size=(n, d))
    out = []
    for ops in (core, py):
        K = ops.rbf_gram(ops.condensed_sqdist(X), n, h)
        drive, repulse = np.empty_like(X), np.empty_like(X)
        ops.svgd_forces(X, S, K, h, gamma, drive, repulse)
        out.append((K, drive, repulse))
    for a, b in zip(*out):
        np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("skip", [True, False])
def test_kernel_sum_agrees(rng, skip):
    core, py = pair()
    X, Y = rng.normal(size=(33, 4)), rng.normal(size=(33, 4))
    assert core.kernel_sum(X, Y, 1.3, skip) == pytest.approx(py.kernel_sum(X, Y, 1.3, skip), rel=1e-12)


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.get("fortran")


def test_active_backend_is_listed():
    assert _backend.name in _backend.BACKENDS
    assert _backend.get() is _backend.ops
