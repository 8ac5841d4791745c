import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ldgcore.fields import (SQRT2, SQRT3, H_plus, augment_L, compute_D_a, grad_P, hedgehog_U_star,
                            normalize, potential_F_a, potential_P, potential_S, q_from_u)

from conftest import random_unit

unit3 = st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda v: np.linalg.norm(v) > 1e-3).map(
    lambda v: np.asarray(v) / np.linalg.norm(v))


def test_hedgehog_examples():
    assert np.allclose(hedgehog_U_star(0.0, 1.0), [0, 1, 0], atol=0)
    assert np.allclose(hedgehog_U_star(1.0, 0.0), [SQRT3 / 2, -0.5, 0], atol=1e-15)
    assert np.allclose(hedgehog_U_star(0.0, 0.0), [0, 1, 0], atol=0)


def test_hedgehog_unit_and_on_P_maximum(rng):
    t = rng.uniform(0, np.pi, 10_000)
    r = rng.uniform(0.01, 1.0, 10_000)
    u = hedgehog_U_star(r * np.sin(t), r * np.cos(t))
    assert np.abs(np.linalg.norm(u, axis=-1) - 1).max() < 1e-14
    assert np.abs(potential_P(u) - 1 / 3).max() < 1e-12


def test_augment_examples(rng):
    for th in rng.uniform(0, 2 * np.pi, 5):
        assert np.allclose(augment_L([0, 1, 0], th), [0, 0, 1, 0, 0])
    assert np.allclose(augment_L([1, 0, 0], 0.0), [1, 0, 0, 0, 0])


def test_augment_is_isometric(rng):
    u = rng.normal(size=(1000, 3))
    th = rng.uniform(0, 2 * np.pi, 1000)
    assert np.allclose(np.linalg.norm(augment_L(u, th), axis=-1), np.linalg.norm(u, axis=-1))


def test_q_examples():
    q = q_from_u([0, 1, 0])
    assert np.allclose(q, SQRT3 / 2 * (np.diag([0, 0, 1.0]) - np.eye(3) / 3))
    assert np.allclose(np.linalg.eigvalsh(q), [-SQRT3 / 6, -SQRT3 / 6, SQRT3 / 3])
    assert np.array_equal(q_from_u([0, 0, 0]), np.zeros((3, 3)))


def test_q_axis_rejects_off_axis_values():
    with pytest.raises(ValueError):
        q_from_u([0.1, 0.9, 0.0], rho=0.0)
    q_from_u([0.0, -1.0, 0.0], rho=0.0)


def test_q_traceless_symmetric(rng):
    u = random_unit(rng, 500)
    q = q_from_u(u, 1.0, 0.0, rng.uniform(0, 2 * np.pi, 500))
    assert np.abs(np.trace(q, axis1=-2, axis2=-1)).max() < 1e-14
    assert np.array_equal(q, np.swapaxes(q, -1, -2))
    # unit u <-> |Q|^2 = 1/2 ... fixed normalization
    assert np.allclose(np.sum(q * q, axis=(-2, -1)), 0.5)


def test_P_examples():
    assert potential_P([0, 1, 0]) == pytest.approx(1 / 3)
    assert potential_P([0, -1, 0]) == pytest.approx(-1 / 3)


def test_S_of_L_is_P(rng):
    u = rng.normal(size=(10_000, 3))
    th = rng.uniform(0, 2 * np.pi, 10_000)
    assert np.abs(potential_S(augment_L(u, th)) - potential_P(u)).max() < 1e-12
    assert potential_S([0, 0, 1, 0, 0]) == pytest.approx(1 / 3)
    assert potential_S([1, 0, 0, 0, 0]) == 0.0


def test_rearrangement(rng):
    v = rng.normal(size=(10_000, 3))
    w = np.stack([np.abs(v[:, 0]), v[:, 1], np.abs(v[:, 2])], axis=-1)
    assert np.all(potential_P(v) <= potential_P(w) + 1e-14)


def test_max_of_P_on_sphere(rng):
    u = random_unit(rng, 1_000_000)
    assert potential_P(u).max() <= 1 / 3 + 1e-9


def test_grad_P_matches_fd(rng):
    v = rng.normal(size=(50, 3))
    eps = 1e-6
    for k in range(3):
        e = np.zeros(3)
        e[k] = eps
        fd = (potential_P(v + e) - potential_P(v - e)) / (2 * eps)
        assert np.allclose(fd, grad_P(v)[:, k], atol=1e-8)


def test_H_plus():
    assert H_plus(SQRT2) == pytest.approx(2.0)


@pytest.mark.parametrize("a", [1.0, SQRT2, 10.0])
def test_D_a_makes_min_zero(a):
    d = compute_D_a(a, check=True)   # raises if the grid search disagrees
    t = SQRT2 * H_plus(a) / a
    assert potential_F_a([0, t, 0], a, d) == pytest.approx(0.0, abs=1e-8)
    rng = np.random.default_rng(0)
    assert potential_F_a(rng.normal(size=(10_000, 3)) * t, a, d).min() >= -1e-8


@pytest.mark.parametrize("a", [0.0, -1.0])
def test_D_a_bad(a):
    with pytest.raises(ValueError):
        compute_D_a(a)
    with pytest.raises(ValueError):
        potential_F_a([0, 1, 0], a)


@settings(max_examples=200, deadline=None)
@given(unit3, st.floats(0, 2 * np.pi))
def test_S_of_L_property(u, th):
    assert potential_S(augment_L(u, th)) == pytest.approx(float(potential_P(u)), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(unit3)
def test_P_bounded_on_sphere(u):
    assert abs(float(potential_P(u))) <= 1 / 3 + 1e-12


def test_normalize_handles_zero():
    out = normalize(np.array([[0.0, 0, 0], [3.0, 4, 0]]))
    assert np.array_equal(out[0], [0, 0, 0])
    assert np.allclose(out[1], [0.6, 0.8, 0])
