import math

import numpy as np
import pytest

from asvgd.engine import RunConfig, init_particles, run, step, update_components, update_direction
from asvgd.errors import NumericalError, ValidationError
from asvgd.kernels import KernelSpec
from asvgd.particles import ParticleSet
from asvgd.schedules import AnnealingSchedule
from asvgd.targets import GaussianMixture, paper_targets

from oracles import svgd_direction

STD_NORMAL = GaussianMixture([1.0], [[0.0]], [1.0])


def config(target=STD_NORMAL, T=20, n=10, schedule=None, kernel=None, **kw):
    return RunConfig(
        target=target,
        kernel=kernel or KernelSpec(),
        schedule=schedule or AnnealingSchedule("hyperbolic", max(T, 1)),
        step_size=kw.pop("step_size", 0.1),
        total_steps=T,
        n_particles=n,
        **kw,
    )


def test_two_particle_hand_value(backend):
    X = np.array([[-1.0], [1.0]])
    phi = update_direction(X, STD_NORMAL, 1.0, 1.0, backend=backend)
    expected = (1 - 5 * math.exp(-4)) / 2
    assert phi[0, 0] == pytest.approx(expected, rel=1e-14)
    assert phi[1, 0] == pytest.approx(-expected, rel=1e-14)
    assert expected == pytest.approx(0.454211, abs=1e-6)


def test_single_particle_is_scaled_score(backend):
    m = paper_targets("irregular")
    x = np.array([[0.7, -1.1]])
    for g in (0.0, 0.3, 1.0):
        np.testing.assert_allclose(update_direction(x, m, 2.0, g, backend=backend), g * m.score(x), rtol=1e-15)


def test_gamma_zero_is_pure_repulsion(rng, backend):
    m = paper_targets("grid16")
    X = rng.normal(size=(15, 2))
    drive, repulse = update_components(X, m, 0.8, 0.0, backend=backend)
    np.testing.assert_array_equal(drive, 0.0)
    np.testing.assert_allclose(repulse, svgd_direction(X, np.zeros_like(X), 0.8, 0.0), atol=1e-15)


@pytest.mark.parametrize("gamma", [0.0, 0.25, 1.0])
@pytest.mark.parametrize("d", [1, 3, 12])
def test_matches_reference_loops(rng, backend, gamma, d):
    m = GaussianMixture(rng.uniform(0.2, 1, 3), rng.normal(size=(3, d)), rng.uniform(0.5, 1.5, 3))
    X = rng.normal(scale=2.0, size=(17, d))
    h = 1.7
    expected = svgd_direction(X, m.score(X), h, gamma)
    np.testing.assert_allclose(update_direction(X, m, h, gamma, backend=backend), expected, rtol=1e-11, atol=1e-13)


def test_components_sum_to_direction(rng):
    m = paper_targets("irregular")
    X = rng.normal(size=(9, 2))
    drive, repulse = update_components(X, m, 1.3, 0.6)
    np.testing.assert_array_equal(drive + repulse, update_direction(X, m, 1.3, 0.6))


def test_permutation_equivariance(rng, backend):
    m = paper_targets("irregular")
    X = rng.normal(size=(20, 2))
    perm = rng.permutation(20)
    a = update_direction(X, m, 1.1, 0.5, backend=backend)
    b = update_direction(X[perm], m, 1.1, 0.5, backend=backend)
    np.testing.assert_allclose(b, a[perm], rtol=1e-12, atol=1e-14)


def test_translation_equivariance(rng):
    m = paper_targets("irregular")
    v = np.array([3.0, -7.0])
    shifted = GaussianMixture(m.weights, m.means + v, m.sigmas)
    X = rng.normal(size=(12, 2))
    np.testing.assert_allclose(
        update_direction(X + v, shifted, 0.9, 0.7), update_direction(X, m, 0.9, 0.7), rtol=1e-9, atol=1e-11
    )


def test_nonfinite_score_names_particle():
    class Broken(GaussianMixture):
        def score(self, x):
            s = super().score(x)
            s[3] = np.nan
            return s

    m = Broken([1.0], [[0.0]], [1.0])
    with pytest.raises(NumericalError) as err:
        update_direction(np.linspace(-1, 1, 6)[:, None], m, 1.0, 1.0)
    assert err.value.index == 3


def test_invalid_gamma_and_bandwidth():
    X = np.zeros((2, 1))
    with pytest.raises(ValidationError):
        update_direction(X, STD_NORMAL, 1.0, 1.5)
    with pytest.raises(ValidationError):
        update_direction(X, STD_NORMAL, 0.0, 1.0)


def test_step_fixed_point_at_mode():
    m = GaussianMixture([1.0], [[2.0, -1.0]], [0.5])
    p = ParticleSet([[2.0, -1.0]])
    s = AnnealingSchedule("constant", 5)
    out = step(p, m, KernelSpec(), s, 0.1)
    assert out.iteration == 1
    np.testing.assert_array_equal(out.positions, p.positions)


def test_step_preserves_mirror_symmetry(backend):
    m = GaussianMixture([0.5, 0.5], [[-2.0], [2.0]], [0.6, 0.6])
    s = AnnealingSchedule("linear", 50)
    p = ParticleSet([[-0.3], [0.3]])
    for _ in range(30):
        p = step(p, m, KernelSpec(), s, 0.2, backend=backend)
        assert p.positions[0, 0] == -p.positions[1, 0]


def test_step_uses_pre_step_state(rng):
    m = paper_targets("irregular")
    X = rng.normal(size=(8, 2))
    s = AnnealingSchedule("constant", 3)
    p = step(ParticleSet(X), m, KernelSpec(0.9), s, 0.05)
    expected = X + 0.05 * svgd_direction(X, m.score(X), 0.9, 1.0)
    np.testing.assert_allclose(p.positions, expected, rtol=1e-12, atol=1e-14)


def test_zero_step_size_keeps_particles():
    cfg = config(T=15, n=12, step_size=0.0, seed=4)
    res = run(cfg)
    assert res.final == ParticleSet(init_particles(cfg).positions, 15)


def test_empty_run_returns_initial_particles():
    cfg = config(T=0, n=6, seed=1)
    res = run(cfg)
    assert res.final == init_particles(cfg)
    assert [c.iteration for c in res.checkpoints] == [0]


def test_init_degenerate_and_deterministic():
    cfg = config(n=7, init_mean=[1.5], init_scale=0.0)
    np.testing.assert_array_equal(init_particles(cfg).positions, 1.5)
    cfg = config(n=7, seed=9)
    assert init_particles(cfg) == init_particles(cfg)


def test_init_concentration_highdim():
    m = paper_targets("highdim", d=100, seed=0)
    cfg = RunConfig(m, KernelSpec(), AnnealingSchedule("constant", 1), 0.3, 1, 5000, 0.0, 1.0, seed=2)
    X = init_particles(cfg).positions
    assert np.abs(X.mean(axis=0)).max() <= 4 / math.sqrt(5000)


def test_run_checkpoints_and_observers():
    seen = []
    cfg = config(T=25, n=5, checkpoint_every=10, seed=3)
    res = run(cfg, observers=[lambda t, g, snap: seen.append((t, g, snap.iteration))])
    assert [c.iteration for c in res.checkpoints] == [0, 10, 20, 25]
    assert [s[0] for s in seen] == [0, 10, 20, 25]
    assert all(s[0] == s[2] for s in seen)
    assert seen[-1][1] == 1.0
    assert res.final.iteration == 25


def test_run_deterministic():
    cfg = config(target=paper_targets("irregular"), T=40, n=30, checkpoint_every=10, seed=8)
    a, b = run(cfg), run(cfg)
    for ca, cb in zip(a.checkpoints, b.checkpoints):
        assert ca.particles.positions.tobytes() == cb.particles.positions.tobytes()


def test_constant_one_matches_reference_trajectory(rng):
    m = GaussianMixture(rng.uniform(0.2, 1, 4), rng.uniform(-3, 3, (4, 2)), rng.uniform(0.5, 1.2, 4))
    cfg = RunConfig(m, KernelSpec(), AnnealingSchedule("constant", 100), 0.1, 100, 20, 0.0, 1.0, seed=5)
    res = run(cfg)
    X = init_particles(cfg).positions.copy()
    from oracles import median_bandwidth

    for _ in range(100):
        X = X + 0.1 * svgd_direction(X, m.score(X), median_bandwidth(X), 1.0)
    assert np.max(np.abs(res.final.positions - X)) <= 1e-12


def test_divergence_aborts_with_step():
    m = GaussianMixture([1.0], [[0.0]], [1e-3])
    cfg = RunConfig(m, KernelSpec(), AnnealingSchedule("constant", 50), 10.0, 50, 3, 0.0, 1.0, seed=0)
    with pytest.raises(NumericalError) as err:
        run(cfg)
    assert err.value.step is not None


def test_stationarity_on_unimodal_gaussian():
    m = GaussianMixture([1.0], [[1.0, -1.0]], [0.8])
    cfg = RunConfig(m, KernelSpec(), AnnealingSchedule("constant", 2000), 0.2, 2000, 20, 0.0, 1.0, seed=0)
    res = run(cfg)
    X = res.final.positions
    h = KernelSpec().resolve(X)
    assert np.linalg.norm(update_direction(X, m, h, 1.0), axis=1).max() <= 1e-3


def test_config_validation():
    with pytest.raises(ValidationError) as err:
        RunConfig(STD_NORMAL, KernelSpec(), AnnealingSchedule("linear", 10), -1.0, 12, 0, 0.0, 1.0,
                  checkpoint_every=20)
    assert len(err.value.problems) >= 3
