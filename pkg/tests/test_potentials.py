import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from swarmlimits import PotentialSpec, SingularEvaluation, V, W, grad_V, grad_W, grad_psi, psi
from swarmlimits.potentials import unit_ball_volume

FAMILIES = [
    PotentialSpec(dimension=1, interaction="gaussian", strength=1.3, width=0.7),
    PotentialSpec(dimension=2, interaction="gaussian"),
    PotentialSpec(dimension=3, interaction="gaussian", strength=-0.5, width=2.0),
    PotentialSpec(dimension=1, interaction="coulomb"),
    PotentialSpec(dimension=2, interaction="coulomb"),
    PotentialSpec(dimension=3, interaction="coulomb"),
    PotentialSpec(dimension=1, interaction="riesz", alpha=0.5),
    PotentialSpec(dimension=2, interaction="riesz", alpha=1.2),
    PotentialSpec(dimension=3, interaction="riesz", alpha=2.5),
    PotentialSpec(dimension=1, interaction="log"),
    PotentialSpec(dimension=2, interaction="log"),
]
BUMPS = [PotentialSpec(dimension=d, communication="bump", radius=1.5, kappa=0.8) for d in (1, 2, 3)]


def central_difference(f, x, h):
    g = np.empty_like(x)
    for q in range(x.size):
        e = np.zeros_like(x)
        e[q] = h
        g[q] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def random_points(rng, d, n=100, rmin=0.2, rmax=3.0):
    dirs = rng.normal(size=(n, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return dirs * rng.uniform(rmin, rmax, size=(n, 1))


def assert_fd_match(grad, f, pts):
    for x in pts:
        h = 1e-6 * (1 + np.linalg.norm(x))
        g = grad(x)
        fd = central_difference(f, x, h)
        scale = np.maximum(np.abs(g), np.max(np.abs(g)))
        assert np.all(np.abs(fd - g) <= 1e-5 * scale + 1e-12), (x, g, fd)


def test_grad_V_examples():
    spec = PotentialSpec(dimension=2)
    assert np.array_equal(grad_V(spec, np.array([3.0, -1.0])), [3.0, -1.0])
    assert np.array_equal(grad_V(spec, np.zeros(2)), np.zeros(2))
    assert np.array_equal(grad_V(PotentialSpec(dimension=2, confinement="none"), np.array([5.0, 2.0])), [0, 0])


def test_grad_W_examples():
    coulomb = PotentialSpec(interaction="coulomb")
    assert grad_W(coulomb, 0.7)[0] == -0.5
    riesz = PotentialSpec(interaction="riesz", alpha=0.5)
    for r in (1.0, -1.0):
        assert grad_W(riesz, r)[0] == pytest.approx(-0.5 * r, rel=1e-15)
    gauss = PotentialSpec(interaction="gaussian")
    assert np.array_equal(grad_W(gauss, 0.0), [0.0])


def test_closed_form_coulomb_gradients():
    x = np.array([0.3, -0.4])
    g2 = grad_W(PotentialSpec(dimension=2, interaction="coulomb"), x)
    assert np.allclose(g2, -x / (2 * np.pi * 0.25), rtol=1e-14)
    x3 = np.array([1.0, 2.0, 2.0])
    g3 = grad_W(PotentialSpec(dimension=3, interaction="coulomb"), x3)
    assert np.allclose(g3, -x3 / (4 * np.pi * 27.0), rtol=1e-14)
    assert unit_ball_volume(3) == pytest.approx(4 * np.pi / 3)


def test_psi_examples():
    spec = PotentialSpec(communication="bump", radius=2.0, kappa=0.7)
    assert psi(spec, 2.0) == 0.0
    assert psi(spec, 0.0) == 0.7
    assert psi(spec, 4.0) == 0.0


@pytest.mark.parametrize("spec", FAMILIES, ids=lambda s: f"{s.interaction}-d{s.dimension}")
def test_grad_W_matches_finite_differences(spec, rng):
    pts = random_points(rng, spec.dimension)
    assert_fd_match(lambda x: grad_W(spec, x), lambda x: float(W(spec, x)), pts)


@pytest.mark.parametrize("spec", BUMPS, ids=lambda s: f"bump-d{s.dimension}")
def test_grad_psi_matches_finite_differences(spec, rng):
    # keep away from the support edge, where psi is only C^1
    pts = random_points(rng, spec.dimension, rmin=0.0, rmax=1.4)
    assert_fd_match(lambda x: grad_psi(spec, x), lambda x: float(psi(spec, x)), pts)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_grad_V_matches_finite_differences(d, rng):
    spec = PotentialSpec(dimension=d)
    assert_fd_match(lambda x: grad_V(spec, x), lambda x: float(V(spec, x)), random_points(rng, d))


@pytest.mark.parametrize("spec", FAMILIES, ids=lambda s: f"{s.interaction}-d{s.dimension}")
@settings(max_examples=50, deadline=None)
@given(data=st.data())
def test_W_even_and_grad_W_odd_bitwise(spec, data):
    r = data.draw(arrays(np.float64, spec.dimension, elements=st.floats(-50, 50, allow_subnormal=False)))
    bounded = spec.interaction == "coulomb" and spec.dimension == 1
    if spec.singular and not bounded and np.sum(r * r) < np.finfo(float).tiny:
        with pytest.raises(SingularEvaluation):
            grad_W(spec, r)
        return
    # parity is only meaningful where the force is representable
    with np.errstate(over="ignore", invalid="ignore"):
        assume(np.all(np.isfinite(grad_W(spec, r))))
    assert np.array_equal(W(spec, -r), W(spec, r))
    assert np.array_equal(grad_W(spec, -r), -grad_W(spec, r))


@pytest.mark.parametrize("spec", BUMPS, ids=lambda s: f"bump-d{s.dimension}")
@settings(max_examples=50, deadline=None)
@given(data=st.data())
def test_psi_even_nonnegative_compact(spec, data):
    r = data.draw(arrays(np.float64, spec.dimension, elements=st.floats(-10, 10)))
    p = psi(spec, r)
    assert p >= 0
    assert psi(spec, -r) == p
    if np.linalg.norm(r) >= spec.radius:
        assert p == 0.0


@pytest.mark.parametrize("spec", [s for s in FAMILIES if s.singular and s.kernel_params()[0] != 2],
                         ids=lambda s: f"{s.interaction}-d{s.dimension}")
def test_singular_evaluation_at_origin(spec):
    with pytest.raises(SingularEvaluation):
        grad_W(spec, np.zeros(spec.dimension))
    with pytest.raises(SingularEvaluation):
        W(spec, np.zeros(spec.dimension))


def test_one_dimensional_coulomb_uses_zero_sign_at_origin():
    assert grad_W(PotentialSpec(interaction="coulomb"), 0.0)[0] == 0.0


@pytest.mark.parametrize("d,alpha", [(1, 1.0), (1, -0.1), (2, 2.0), (3, 0.5), (3, 3.0)])
def test_riesz_exponent_range_enforced(d, alpha):
    with pytest.raises(ValueError):
        PotentialSpec(dimension=d, interaction="riesz", alpha=alpha)


def test_spec_validation():
    with pytest.raises(ValueError):
        PotentialSpec(interaction="yukawa")
    with pytest.raises(ValueError):
        PotentialSpec(dimension=3, interaction="log")
    with pytest.raises(ValueError):
        PotentialSpec(dimension=0)
    with pytest.raises(ValueError):
        PotentialSpec(communication="bump", radius=0.0)


def test_vectorized_evaluation_shapes(rng):
    spec = PotentialSpec(dimension=2, interaction="riesz", alpha=0.5, communication="bump")
    r = rng.normal(size=(7, 2))
    assert grad_W(spec, r).shape == (7, 2)
    assert psi(spec, r).shape == (7,)
    assert W(spec, r).shape == (7,)
