import numpy as np
import pytest

from ldgcore import _kernels
from ldgcore.energy import (discrete_energy, energy, energy_gradient, euler_lagrange_residual,
                            l2_distance_to_hedgehog, localized_energy, localized_profile)
from ldgcore.fields import Field3, hedgehog_field, normalize
from ldgcore.mesh import NodeClass, build_mesh
from ldgcore.optimizer import ObstacleSpec, SolverConfig, initial_guess, minimize

TWENTY_FOUR_PI = 24 * np.pi


def perturbed(mesh, rng, amp=0.1):
    V = hedgehog_field(mesh).values.copy()
    V[mesh.free] += amp * rng.normal(size=(int(mesh.free.sum()), 3))
    return Field3(mesh, normalize(V))


@pytest.mark.parametrize("n,tol", [(128, 0.015), (256, 0.005)])
def test_hedgehog_energy(n, tol):
    tot = energy(hedgehog_field(build_mesh(n)), 10.0).total
    assert abs(tot / TWENTY_FOUR_PI - 1) < tol


def test_hedgehog_energy_converges_first_order():
    errs = [abs(energy(hedgehog_field(build_mesh(n)), 0.0).total / TWENTY_FOUR_PI - 1)
            for n in (32, 64, 128)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[0] / errs[2] > 3


def test_hedgehog_potential_vanishes(mesh32):
    u = hedgehog_field(mesh32)
    a, b = energy(u, 0.0), energy(u, 100.0)
    assert abs(a.total - b.total) < 1e-10
    assert abs(b.potential) < 1e-10


def test_constant_field_zero(mesh32):
    V = np.zeros(mesh32.shape + (3,))
    V[..., 1] = 1.0
    u = Field3(mesh32, V)
    assert energy(u, 0.0).total == 0.0
    assert np.array_equal(energy_gradient(u, 0.0), np.zeros_like(V))


def test_errors(mesh32):
    with pytest.raises(TypeError):
        energy(np.zeros(mesh32.shape + (3,)), 1.0)
    with pytest.raises(ValueError):
        energy(hedgehog_field(mesh32), -1.0)
    with pytest.raises(ValueError):
        Field3(mesh32, np.zeros((4, 4, 3)))


def test_gradient_fd(mesh32, rng):
    u = perturbed(mesh32, rng)
    de = discrete_energy(mesh32)
    g = energy_gradient(u, 10.0)
    R, Z = mesh32.coords()
    for _ in range(5):
        d = rng.normal(size=u.values.shape)
        d[~mesh32.free | (np.hypot(R, Z) > 0.9)] = 0
        eps = 1e-5
        fd = (de.value(u.values + eps * d, 10.0) - de.value(u.values - eps * d, 10.0)) / (2 * eps)
        assert fd == pytest.approx(float(np.sum(g * d)), rel=1e-6)


def test_gradient_zero_on_fixed_nodes(mesh32, rng):
    g = energy_gradient(perturbed(mesh32, rng), 1.0)
    assert np.all(g[~mesh32.free] == 0)


def test_axis_gradient_symmetric_components(mesh32):
    # axis values are pinned to (0, +-1, 0): after the constraint handling the
    # descent direction has no u1/u3 component there
    from ldgcore.optimizer import _Problem
    u = initial_guess(mesh32, "PLUS", 0.2)
    pb = _Problem(mesh32, 10.0, ObstacleSpec.plus(), SolverConfig())
    gT = pb.projected_gradient(u.values, energy_gradient(u, 10.0))
    ax = mesh32.node_class == NodeClass.AXIS
    assert np.all(gT[ax][:, [0, 2]] == 0)


def test_numba_kernels_match_reference(mesh32, rng):
    u = perturbed(mesh32, rng, 0.3)
    de = discrete_energy(mesh32)
    V = u.values
    v = _kernels.value(V, de.w_rho, de.w_z, de.m_sing, de.m_pot, 10.0)
    assert v == pytest.approx(de.value(V, 10.0), rel=1e-12)
    G = np.empty_like(V)
    _kernels.gradient(V, de.w_rho, de.w_z, de.m_sing, de.m_pot, 10.0, de.free, G)
    assert np.allclose(G, de.gradient(V, 10.0), rtol=1e-12, atol=1e-13)


def test_z_mirror_symmetry(mesh32, rng):
    # flipping u3 -> -u3 is the reflection z -> -z; energy unchanged
    u = perturbed(mesh32, rng)
    w = u.copy()
    w.values[..., 2] *= -1
    assert energy(u, 5.0).total == pytest.approx(energy(w, 5.0).total, rel=1e-14)


def test_localized_energy_hedgehog_flat():
    u = hedgehog_field(build_mesh(256))
    prof = localized_profile(u, 10.0, [0.1, 0.25, 0.5, 0.75, 1.0])
    assert np.ptp(prof) / prof.mean() < 0.02


def test_localized_energy_at_one(mesh32, rng):
    u = perturbed(mesh32, rng)
    assert localized_energy(u, 3.0, 1.0) == pytest.approx(energy(u, 3.0).total / (4 * np.pi), rel=1e-12)


@pytest.mark.parametrize("r", [0.0, -0.1, 1.5, 0.05])
def test_localized_energy_bad_radius(mesh32, r):
    with pytest.raises(ValueError):
        localized_energy(hedgehog_field(mesh32), 1.0, r)


def test_el_residual_hedgehog_second_order():
    vals = [euler_lagrange_residual(hedgehog_field(build_mesh(n)), 10.0, r_min=0.25).l2
            for n in (32, 64, 128)]
    assert vals[0] / vals[1] > 3 and vals[1] / vals[2] > 3


def test_el_residual_random_field_large(mesh32, rng):
    u = perturbed(mesh32, rng, 0.5)
    assert euler_lagrange_residual(u, 10.0).max > 0.1


def test_el_residual_minimizer_refines():
    cfg = SolverConfig(grad_tol=1e-6)
    out = []
    for n in (32, 64):
        m = build_mesh(n)
        u, _, _ = minimize(initial_guess(m, "MINUS", 0.2), 10.0, ObstacleSpec.minus(0.5), cfg)
        out.append(euler_lagrange_residual(u, 10.0, rho_min=0.1, arc_margin=0.1).l2)
    assert out[0] / out[1] > 3


def test_distance_to_hedgehog(mesh32, rng):
    assert l2_distance_to_hedgehog(hedgehog_field(mesh32)) == 0.0
    assert l2_distance_to_hedgehog(perturbed(mesh32, rng)) > 0
