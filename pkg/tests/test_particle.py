import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmlimits import (
    ParticleState,
    PotentialSpec,
    SingularEvaluation,
    StiffnessWarning,
    dissipation_residual,
    free_energy,
    rhs,
    simulate,
    step,
)
from swarmlimits import _kernels
from swarmlimits.particle import dissipation_rate, dissipation_rate_derivative, min_separation, rk4_step

SMOOTH = PotentialSpec(interaction="gaussian", communication="bump", radius=1.0, kappa=1.0)


def random_state(rng, N, d=1, gamma=0.5, epsilon=1.0, spread=2.0):
    return ParticleState(rng.uniform(-spread, spread, (N, d)), rng.normal(size=(N, d)), gamma, epsilon)


def test_rhs_single_particle():
    dx, dv = rhs(ParticleState([2.0], [0.0], gamma=1.0), PotentialSpec())
    assert dx[0, 0] == 0.0 and dv[0, 0] == -2.0


def test_rhs_alignment_pulls_toward_mean():
    spec = PotentialSpec(confinement="none", communication="bump", radius=1e8, kappa=1.0)
    _, dv = rhs(ParticleState([0.0, 0.5], [1.0, -1.0]), spec)
    assert np.allclose(dv[:, 0], [-1.0, 1.0], rtol=1e-15)


def test_rhs_one_dimensional_coulomb_repels():
    spec = PotentialSpec(confinement="none", interaction="coulomb")
    _, dv = rhs(ParticleState([0.0, 1.0], [0.0, 0.0]), spec)
    # W = -|x|/2: each particle is pushed away from the other with force (1/N) * 1/2
    assert np.array_equal(dv[:, 0], [-0.25, 0.25])


def test_rhs_rejects_singular_coincidence():
    spec = PotentialSpec(confinement="none", interaction="riesz", alpha=0.5)
    with pytest.raises(SingularEvaluation):
        rhs(ParticleState([0.0, 0.0, 1.0], [0.0, 0.0, 0.0]), spec)


def test_rhs_dimension_mismatch():
    with pytest.raises(ValueError):
        rhs(ParticleState(np.zeros((2, 2)), np.zeros((2, 2))), PotentialSpec(dimension=1))


def test_state_validation():
    with pytest.raises(ValueError):
        ParticleState([0.0, 1.0], [0.0])
    with pytest.raises(ValueError):
        ParticleState([0.0], [0.0], epsilon=0.0)
    with pytest.raises(ValueError):
        ParticleState([0.0], [0.0], gamma=-1.0)


def test_rk4_matches_damped_oscillator():
    traj = simulate(ParticleState([2.0], [0.0], gamma=1.0), PotentialSpec(), 1e-3, 1.0)
    w = np.sqrt(3) / 2
    t = traj.times
    exact = np.exp(-t / 2) * (2 * np.cos(w * t) + np.sin(w * t) / w)
    assert np.max(np.abs(traj.x[:, 0, 0] - exact)) <= 1e-8


def test_step_rejects_bad_dt_and_method():
    s = ParticleState([1.0], [0.0])
    with pytest.raises(ValueError):
        step(s, PotentialSpec(), 0.0)
    with pytest.raises(ValueError):
        step(s, PotentialSpec(), 1e-3, method="leapfrog")


def test_stiffness_warning():
    s = ParticleState([1.0], [0.0], gamma=5.0, epsilon=1e-3)
    with pytest.warns(StiffnessWarning):
        step(s, PotentialSpec(), 1e-3)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        step(s, PotentialSpec(), 1e-3, method="semi_implicit")


def test_semi_implicit_is_stable_for_tiny_inertia():
    s = ParticleState([1.0, -0.5], [3.0, 2.0], gamma=5.0, epsilon=1e-6)
    traj = simulate(s, SMOOTH, 1e-2, 1.0, method="semi_implicit")
    assert np.all(np.isfinite(traj.x)) and np.max(np.abs(traj.v[-1])) < 1.0


def test_step_advances_time():
    s = step(ParticleState([1.0], [0.0], t=0.25), PotentialSpec(), 0.5)
    assert s.t == 0.75


@pytest.mark.parametrize("method", ["rk4", "semi_implicit"])
def test_mirrored_pairs_stay_mirrored(rng, method):
    x = rng.uniform(0.1, 2, (4, 1))
    v = rng.normal(size=(4, 1))
    s = ParticleState(np.vstack([x, -x]), np.vstack([v, -v]), gamma=0.3)
    traj = simulate(s, SMOOTH, 1e-2, 1.0, method=method)
    assert np.allclose(traj.x[-1, :4], -traj.x[-1, 4:], rtol=0, atol=1e-14)
    assert np.allclose(traj.v[-1, :4], -traj.v[-1, 4:], rtol=0, atol=1e-14)


def test_free_energy_examples():
    assert free_energy(ParticleState([0.0], [2.0]), PotentialSpec()).total == 2.0
    coulomb = PotentialSpec(confinement="none", interaction="coulomb")
    F = free_energy(ParticleState([0.0, 1.0], [0.0, 0.0]), coulomb)
    assert F.total == -0.25 and F.interaction == -0.25
    zero = PotentialSpec(confinement="none")
    assert free_energy(ParticleState([1.0, 3.0], [0.0, 0.0]), zero).total == 0.0


def test_free_energy_components_sum(rng):
    F = free_energy(random_state(rng, 10), SMOOTH)
    assert F.total == F.kinetic + F.confinement + F.interaction


def test_free_energy_rejects_coincidence():
    spec = PotentialSpec(interaction="log")
    with pytest.raises(SingularEvaluation):
        free_energy(ParticleState([1.0, 1.0], [0.0, 0.0]), spec)


def test_dissipation_single_damped_particle():
    traj = simulate(ParticleState([2.0], [0.0], gamma=1.0), PotentialSpec(), 1e-3, 1.0)
    assert dissipation_residual(traj, PotentialSpec()) <= 1e-6


def test_energy_conserved_without_dissipation_at_rk4_order(rng):
    spec = PotentialSpec(interaction="gaussian")
    s = random_state(rng, 8, gamma=0.0)
    r1 = dissipation_residual(simulate(s, spec, 0.05, 2.0), spec)
    r2 = dissipation_residual(simulate(s, spec, 0.025, 2.0), spec)
    assert r1 / r2 >= 16


def test_dissipation_residual_shrinks_with_dt(rng):
    s = random_state(rng, 16, gamma=1.0)
    r1 = dissipation_residual(simulate(s, SMOOTH, 0.02, 1.0), SMOOTH)
    r2 = dissipation_residual(simulate(s, SMOOTH, 0.01, 1.0), SMOOTH)
    assert 7.0 < r1 / r2 < 9.0


def test_corrected_quadrature_is_more_accurate(rng):
    s = random_state(rng, 16, gamma=1.0)
    traj = simulate(s, SMOOTH, 0.02, 1.0)
    assert dissipation_residual(traj, SMOOTH, "corrected") < 0.1 * dissipation_residual(traj, SMOOTH)


def test_dissipation_rate_derivative_matches_finite_difference(rng):
    s = random_state(rng, 12, gamma=0.7)
    w = np.full(12, 1 / 12)
    h = 1e-4
    ends = []
    for dt in (h, -h):
        x, v = rk4_step(s.x, s.v, w, SMOOTH, s.gamma, s.epsilon, dt)
        ends.append(dissipation_rate(ParticleState(x, v, s.gamma), SMOOTH))
    fd = (ends[0] - ends[1]) / (2 * h)
    assert dissipation_rate_derivative(s, SMOOTH) == pytest.approx(fd, rel=1e-6)


def test_free_energy_nonincreasing(rng):
    s = random_state(rng, 20, gamma=0.5)
    traj = simulate(s, SMOOTH, 1e-2, 2.0)
    F = np.array([free_energy(st, SMOOTH).total for st in traj])
    assert np.all(np.diff(F) <= 1e-12)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), N=st.integers(2, 12))
def test_momentum_conserved_without_damping_or_confinement(seed, N):
    rng = np.random.default_rng(seed)
    spec = PotentialSpec(confinement="none", interaction="gaussian", communication="bump")
    s = random_state(rng, N, gamma=0.0)
    traj = simulate(s, spec, 0.01, 0.5)
    p = traj.v.sum(axis=1)
    assert np.allclose(p, p[0], rtol=0, atol=1e-12)


def test_permutation_equivariance(rng):
    s = random_state(rng, 15)
    perm = rng.permutation(15)
    a = simulate(s, SMOOTH, 1e-2, 0.5)
    b = simulate(ParticleState(s.x[perm], s.v[perm], s.gamma, s.epsilon), SMOOTH, 1e-2, 0.5)
    assert np.allclose(a.x[:, perm], b.x, rtol=0, atol=1e-13)
    assert np.allclose(a.v[:, perm], b.v, rtol=0, atol=1e-13)


def test_row_parallel_kernel_matches_serial(rng):
    x = rng.normal(size=(40, 2))
    v = rng.normal(size=(40, 2))
    w = rng.dirichlet(np.ones(40))
    outs = []
    for kern in (_kernels.pair_terms, _kernels.pair_terms_rows):
        f, a, s = np.empty_like(x), np.empty_like(x), np.empty(40)
        assert kern(x, v, w, 4, 1.0, 0.5, 1, 1.5, 1.0, f, a, s) == -1
        outs.append((f, a, s))
    for p, q in zip(*outs):
        assert np.allclose(p, q, rtol=1e-12, atol=1e-14)


def test_collision_monitor_repulsive_coulomb_2d(rng):
    spec = PotentialSpec(dimension=2, interaction="coulomb", communication="bump", radius=1.0)
    angles = np.linspace(0, 2 * np.pi, 12, endpoint=False)
    x = np.column_stack([np.cos(angles), np.sin(angles)]) * rng.uniform(0.5, 1.5, (12, 1))
    v = -0.8 * x + 0.1 * rng.normal(size=x.shape)
    traj = simulate(ParticleState(x, v, gamma=1.0), spec, 1e-3, 1.0, monitor_separation=True)
    assert traj.min_separation.min() > 0.05


def test_min_separation():
    assert min_separation(np.array([[0.0], [3.0], [1.0]])) == 1.0
    assert min_separation(np.array([[0.0, 0.0], [3.0, 4.0]])) == 5.0
    assert min_separation(np.array([[1.0]])) == np.inf


def test_simulate_validates_horizon():
    with pytest.raises(ValueError):
        simulate(ParticleState([0.0], [1.0]), PotentialSpec(), 0.3, 1.0)
    with pytest.raises(ValueError):
        simulate(ParticleState([0.0], [1.0]), PotentialSpec(), 0.1, 1.0, every=3)
