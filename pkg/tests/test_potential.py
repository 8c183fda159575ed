import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.spatial.distance import pdist
from scipy.spatial.transform import Rotation

from bcfg.errors import (CollisionError, DimensionMismatch, NotNormalized, ValidationError,
                         ZeroConfiguration)
from bcfg.potential import (balanced_residual, center_of_mass, distances, mass_inner,
                            normalize_to_sphere, potential_gradient, potential_hessian,
                            s_inner, s_norm2, total_potential)
from helpers import random_config


def fd_gradient(f, x, h=1e-5):
    g = np.zeros(x.size)
    for k in range(x.size):
        e = np.zeros(x.size)
        e[k] = h
        g[k] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def pair_potential(q, m):
    # independent oracle: scipy condensed distances
    i, j = np.triu_indices(len(m), 1)
    return np.sum(m[i] * m[j] / pdist(q))


@st.composite
def configurations(draw, nmin=2, nmax=5):
    n = draw(st.integers(nmin, nmax))
    d = draw(st.sampled_from([2, 3]))
    seed = draw(st.integers(0, 2**31 - 1))
    rng = np.random.default_rng(seed)
    m = rng.uniform(0.1, 3.0, n)
    return random_config(rng, n, d), m


def test_two_body_potential():
    q = np.array([[0.0, 1.0], [0.0, -1.0]])
    assert total_potential(q, [1, 1]) == pytest.approx(0.5, abs=1e-15)


def test_unit_triangle_potential():
    t = 2 * np.pi * np.arange(3) / 3
    q = np.column_stack([np.cos(t), np.sin(t)]) / np.sqrt(3)
    assert total_potential(q, [1, 1, 1]) == pytest.approx(3.0, rel=1e-14)


def test_potential_matches_pdist_oracle(rng):
    for n, d in [(3, 2), (4, 3), (5, 3)]:
        q = random_config(rng, n, d)
        m = rng.uniform(0.5, 2.0, n)
        assert total_potential(q, m) == pytest.approx(pair_potential(q, m), rel=1e-13)


def test_two_body_gradient():
    q = np.array([[0.0, 1.0], [0.0, -1.0]])
    g = potential_gradient(q, [1, 1])
    np.testing.assert_allclose(g, [[0, -0.25], [0, 0.25]], atol=1e-15)


def test_two_body_hessian_block():
    q = np.array([[0.0, 1.0], [0.0, -1.0]])
    H = potential_hessian(q, [1, 1])
    np.testing.assert_allclose(H[0:2, 2:4], np.diag([1, -2]) / 8, atol=1e-15)


def test_gradient_finite_differences(rng):
    for n in (3, 4, 5):
        q = random_config(rng, n, 3)
        m = rng.uniform(0.5, 2.0, n)
        fd = fd_gradient(lambda x: pair_potential(x.reshape(n, 3), m), q.ravel())
        g = potential_gradient(q, m).ravel()
        assert np.linalg.norm(g - fd) / np.linalg.norm(g) < 1e-6


def test_hessian_finite_differences(rng):
    n = 5
    q = random_config(rng, n, 3)
    m = rng.uniform(0.5, 2.0, n)
    H = potential_hessian(q, m)
    fd = np.array([fd_gradient(lambda x: potential_gradient(x.reshape(n, 3), m).ravel()[k], q.ravel())
                   for k in range(3 * n)])
    assert np.linalg.norm(H - fd) / np.linalg.norm(H) < 1e-5


@given(configurations())
def test_euler_identity(cfg):
    q, m = cfg
    U = total_potential(q, m)
    assert abs(np.sum(potential_gradient(q, m) * q) + U) < 1e-12 * U


@given(configurations())
def test_translation_invariance(cfg):
    q, m = cfg
    n, d = q.shape
    H = potential_hessian(q, m)
    blocks = H.reshape(n, d, n, d).sum(axis=2)
    assert np.abs(blocks).max() < 1e-12 * np.abs(H).max()
    g = potential_gradient(q, m)
    assert np.abs(g.sum(axis=0)).max() < 1e-12 * np.abs(g).max()


@given(configurations())
def test_hessian_exactly_symmetric(cfg):
    H = potential_hessian(*cfg)
    assert np.array_equal(H, H.T)


@given(configurations(), st.sampled_from([0.5, 2.0]))
def test_homogeneity(cfg, k):
    q, m = cfg
    U, g, H = total_potential(q, m), potential_gradient(q, m), potential_hessian(q, m)
    assert total_potential(k * q, m) == pytest.approx(U / k, rel=1e-12)
    np.testing.assert_allclose(potential_gradient(k * q, m), g / k**2, rtol=1e-12,
                               atol=1e-14 * np.abs(g).max())
    np.testing.assert_allclose(potential_hessian(k * q, m), H / k**3, rtol=1e-12,
                               atol=1e-13 * np.abs(H).max())


@given(configurations(nmin=3), st.integers(0, 2**31 - 1))
def test_rotation_invariance(cfg, seed):
    q, m = cfg
    d = q.shape[1]
    if d == 3:
        R = Rotation.random(random_state=seed).as_matrix()
    else:
        t = np.random.default_rng(seed).uniform(0, 2 * np.pi)
        R = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
    assert total_potential(q @ R.T, m) == pytest.approx(total_potential(q, m), rel=1e-12)


def test_collision_detected():
    q = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    with pytest.raises(CollisionError):
        total_potential(q, [1, 1, 1])


def test_mass_validation():
    with pytest.raises(ValidationError):
        total_potential(np.eye(2), [1, -1])
    with pytest.raises(DimensionMismatch):
        total_potential(np.eye(3), [1, 1])


def test_s_inner_examples():
    a = np.array([[1.0, 0.0], [-1.0, 0.0]])
    assert s_inner(a, a, [1, 1], 2.0) == pytest.approx(4.0)
    b = np.array([[0.3, 2.0], [1.0, -0.5]])
    assert s_inner(a, b, [2, 3], 1.0) == pytest.approx(np.sum(np.array([[2], [3]]) * a * b))
    assert mass_inner(a, b, [2, 3]) == s_inner(a, b, [2, 3], 1.0)
    with pytest.raises(DimensionMismatch):
        s_inner(a, np.ones(3), [1, 1], 1.0)


@given(arrays(float, (4, 3), elements=st.floats(-5, 5)), st.floats(1, 10))
def test_s_inner_positive(a, s):
    m = [1.0, 2.0, 0.5, 1.5]
    # squares of subnormal entries underflow to zero
    if np.any(np.abs(a) > 1e-150):
        assert s_inner(a, a, m, s) > 0


def test_center_of_mass_examples():
    np.testing.assert_allclose(center_of_mass([[0, 1], [0, -1]], [1, 1]), [0, 0])
    np.testing.assert_allclose(center_of_mass([[0, 4], [0, 0]], [1, 3]), [0, 1])
    q = np.array([[0.2, 1.0], [3.0, -1.0], [0.5, 0.5]])
    t = np.array([1.5, -2.0])
    m = [1, 2, 3]
    np.testing.assert_allclose(center_of_mass(q + t, m), center_of_mass(q, m) + t)


def test_normalize_examples():
    q = np.array([[0.0, 1.0], [0.0, -1.0]])
    np.testing.assert_allclose(normalize_to_sphere(q, [1, 1], 3.0), q / np.sqrt(2))
    p = normalize_to_sphere(np.array([[0.3, 0.1, 0.2], [-0.3, -0.1, -0.2]]), [1, 1], 1.7)
    assert s_norm2(p, [1, 1], 1.7) == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(normalize_to_sphere(p, [1, 1], 1.7), p, atol=1e-14)
    with pytest.raises(ZeroConfiguration):
        normalize_to_sphere(np.zeros((2, 2)), [1, 1], 1.0)


def test_residual_lagrange_triangle():
    t = 2 * np.pi * np.arange(3) / 3
    q = normalize_to_sphere(np.column_stack([np.cos(t), np.sin(t)]), [1, 1, 1], 1.0)
    assert np.linalg.norm(balanced_residual(q, [1, 1, 1], 1.0)) < 1e-12


@pytest.mark.parametrize("s", [1.0, 1.3, 2.0, 5.0])
def test_residual_planar_square_all_s(s):
    q = np.array([[0, 1, 0], [0, 0, 1], [0, -1, 0], [0, 0, -1]], dtype=float)
    q = normalize_to_sphere(q, [1] * 4, s)
    assert np.linalg.norm(balanced_residual(q, [1] * 4, s)) < 1e-12


def test_residual_generic_nonzero_and_normalization(rng):
    m = np.ones(4)
    q = random_config(rng, 4, 3)
    q = normalize_to_sphere(q - center_of_mass(q, m), m, 2.0)
    assert np.linalg.norm(balanced_residual(q, m, 2.0)) > 1e-3
    with pytest.raises(NotNormalized):
        balanced_residual(2 * q, m, 2.0)


def test_distances_order(rng):
    q = random_config(rng, 5, 3)
    np.testing.assert_allclose(distances(q), pdist(q), rtol=1e-15)
