import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmlimits import (
    ContinuumState,
    InitialData,
    QuadratureFailure,
    init_from_density,
    modulated_kinetic_energy,
    sample_particles,
)
from swarmlimits.harness.scans import fit_slope
from swarmlimits.metrics import DiscreteMeasure, dbl
from swarmlimits.sampling import alternating_signs, sample_positions

from conftest import truncated_gaussian


def uniform01(x):
    return np.ones_like(np.asarray(x, dtype=float))


def gaussian_data(**kw):
    return InitialData(truncated_gaussian(), -4.0, 4.0, **kw)


def test_uniform_quantile_midpoints():
    x = sample_positions(InitialData(uniform01, 0.0, 1.0), 4)
    assert np.allclose(x, [0.125, 0.375, 0.625, 0.875], atol=1e-12)


def test_gaussian_quantiles_against_scipy():
    from scipy.stats import truncnorm
    x = sample_positions(gaussian_data(), 101)
    p = (np.arange(1, 102) - 0.5) / 101
    assert np.allclose(x, truncnorm.ppf(p, -4, 4), atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(p=st.floats(0.0, 1.0))
def test_quantile_inverts_cdf(p):
    data = gaussian_data()
    x = data.quantile(np.array([p]))
    assert abs(data.cdf(x)[0] - p) <= 1e-11


def test_cdf_endpoints():
    data = gaussian_data()
    assert data.cdf(np.array([-4.0]))[0] == 0.0
    assert abs(data.cdf(np.array([4.0]))[0] - 1.0) <= 1e-12


def test_density_normalization_enforced():
    with pytest.raises(ValueError):
        InitialData(lambda x: 2 * uniform01(x), 0.0, 1.0)


def test_negative_density_rejected():
    with pytest.raises(QuadratureFailure):
        InitialData(lambda x: 2 * np.asarray(x), -1.0, 1.0)


def test_quantile_out_of_range():
    with pytest.raises(QuadratureFailure):
        InitialData(uniform01, 0.0, 1.0).quantile(np.array([1.5]))


def test_invalid_arguments():
    with pytest.raises(ValueError):
        InitialData(uniform01, 1.0, 0.0)
    with pytest.raises(ValueError):
        InitialData(uniform01, 0.0, 1.0, mode="sobol")
    with pytest.raises(ValueError):
        InitialData(uniform01, 0.0, 1.0, perturbation=-1.0)
    with pytest.raises(ValueError):
        sample_positions(InitialData(uniform01, 0.0, 1.0), 0)


def test_quantile_and_seeded_iid_are_bit_reproducible():
    for mode in ("quantile", "iid"):
        a = sample_particles(gaussian_data(mode=mode, seed=7, velocity=np.tanh), 333)
        b = sample_particles(gaussian_data(mode=mode, seed=7, velocity=np.tanh), 333)
        assert np.array_equal(a.x, b.x) and np.array_equal(a.v, b.v)


def test_iid_seed_changes_sample():
    a = sample_positions(gaussian_data(mode="iid", seed=1), 50)
    b = sample_positions(gaussian_data(mode="iid", seed=2), 50)
    assert not np.array_equal(a, b)
    assert np.all(np.diff(a) >= 0)


def test_alternating_perturbation():
    assert np.array_equal(alternating_signs(5), [1, -1, 1, -1, 1])
    p = sample_particles(InitialData(uniform01, 0.0, 1.0, velocity=lambda x: 3 * x, perturbation=0.1), 4)
    assert np.allclose(p.v[:, 0] - 3 * p.x[:, 0], [0.1, -0.1, 0.1, -0.1])
    assert abs(alternating_signs(1000).sum()) == 0


def test_particle_state_parameters():
    p = sample_particles(gaussian_data(), 8, epsilon=0.01, gamma=5.0)
    assert p.x.shape == (8, 1) and p.epsilon == 0.01 and p.gamma == 5.0
    assert np.array_equal(p.v, np.zeros((8, 1)))


def fine_reference(M=2**16):
    ref = init_from_density(truncated_gaussian(), -4.0, 4.0, M)
    return DiscreteMeasure(ref.nodes, ref.weights)


def test_quantile_sampling_rate():
    ref = fine_reference()
    Ns = 2 ** np.arange(6, 12)
    errs = [dbl(DiscreteMeasure.empirical(sample_positions(gaussian_data(), int(N))), ref) for N in Ns]
    fit = fit_slope(np.column_stack([Ns, errs]))
    assert -1.25 <= fit.slope <= -0.75


def test_iid_sampling_is_slower_than_quantile():
    ref = fine_reference(2**14)
    N = 1024
    q = dbl(DiscreteMeasure.empirical(sample_positions(gaussian_data(), N)), ref)
    iid = np.mean([dbl(DiscreteMeasure.empirical(sample_positions(gaussian_data(mode="iid", seed=s), N)), ref)
                   for s in range(8)])
    assert iid > 5 * q


def test_zero_perturbation_is_monokinetic_up_to_interpolation():
    vals = []
    for M in (256, 1024, 4096):
        ref = init_from_density(truncated_gaussian(), -4.0, 4.0, M, velocity=lambda x: -0.5 * np.tanh(x))
        p = sample_particles(gaussian_data(velocity=lambda x: -0.5 * np.tanh(x)), 500)
        vals.append(modulated_kinetic_energy(p, ref))
    assert vals[-1] <= 1e-10
    assert vals[0] / vals[1] > 8 and vals[1] / vals[2] > 8


@pytest.mark.parametrize("eps", [1e-1, 1e-2, 1e-3])
def test_sqrt_epsilon_perturbation_scales_kinetic_term(eps):
    c = 0.7
    ref = ContinuumState(np.linspace(-4, 4, 64), np.full(64, 1 / 64), np.zeros(64))
    p = sample_particles(gaussian_data(perturbation=c * np.sqrt(eps)), 256, epsilon=eps)
    assert modulated_kinetic_energy(p, ref) == pytest.approx(0.5 * c**2 * eps, rel=1e-12)
