import numpy as np
import pytest

from ldgcore.fields import hedgehog_field
from ldgcore.mesh import NodeClass, apply_stencil, build_mesh, gradient_stencil


def test_small_mesh_shape_and_axis():
    m = build_mesh(8)
    assert m.shape == (9, 9)
    assert m.h == pytest.approx(1 / 8)
    axis = m.node_class[0]
    # axis nodes up to the Dirichlet layer of width h
    assert np.all(axis[:7] == NodeClass.AXIS)
    assert np.all(axis[7:] == NodeClass.ARC)


def test_boundary_node_is_arc():
    m = build_mesh(8)
    assert m.node_class[8, 0] == NodeClass.ARC


@pytest.mark.parametrize("n", [8, 16, 32])
def test_class_invariants(n):
    m = build_mesh(n)
    R, Z = m.coords()
    r = np.hypot(R, Z)
    nc = m.node_class
    assert np.all(R[nc == NodeClass.AXIS] == 0)
    eq = nc == NodeClass.EQUATOR
    assert np.all(Z[eq] == 0) and np.all(R[eq] > 0)
    assert np.all(r[nc == NodeClass.ARC] >= 1 - m.h - 1e-12)
    assert np.all(r[nc == NodeClass.OUTSIDE] > 1)


@pytest.mark.parametrize("n", [16, 64])
def test_interior_nodes_have_in_domain_neighbours(n):
    m = build_mesh(n)
    for i, j in zip(*np.nonzero(m.node_class == NodeClass.INTERIOR)):
        for a, b in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
            assert m.node_class[a, b] != NodeClass.OUTSIDE


def test_quadrature_converges_to_one_third():
    errs = [abs(build_mesh(n).cell_weights.sum() - 1 / 3) for n in (8, 32, 128)]
    assert errs[-1] < 1e-5
    for n, e in zip((8, 32, 128), errs):
        assert e < 1 / n


def test_deterministic():
    a, b = build_mesh(24), build_mesh(24)
    assert np.array_equal(a.cell_weights, b.cell_weights)
    assert np.array_equal(a.node_class, b.node_class)


@pytest.mark.parametrize("n", [0, 7, -3, 8.5])
def test_bad_sizes(n):
    with pytest.raises(ValueError):
        build_mesh(n)


def test_ball_weights_volume():
    m = build_mesh(128)
    for r in (0.25, 0.5, 1.0):
        assert m.ball_cell_weights(r).sum() == pytest.approx(r**3 / 3, rel=2e-3)


def test_equator_ghosts_follow_parity():
    m = build_mesh(16)
    u = np.zeros(m.shape + (3,))
    u[:, 1, :] = [0.3, 0.4, 0.5]
    st = gradient_stencil(m, (5, 0))
    assert st.node_class == NodeClass.EQUATOR
    (lo, clo, slo), (hi, chi, shi) = st.d_z
    assert lo == hi == (5, 1)
    ghost = slo * u[lo]
    assert ghost[2] == pytest.approx(-0.5)   # odd component
    assert ghost[1] == pytest.approx(0.4)    # even component
    _, dz = apply_stencil(st, u)
    # even components: zero z-derivative at the equator; odd one: u3(h)/h
    assert dz[0] == pytest.approx(0) and dz[1] == pytest.approx(0)
    assert dz[2] == pytest.approx(0.5 / m.h)


def test_interior_stencil_central():
    m = build_mesh(16)
    st = gradient_stencil(m, (4, 5))
    assert st.node_class == NodeClass.INTERIOR
    assert [c for _, c, _ in st.d_rho] == pytest.approx([-8.0, 8.0])
    assert [nb for nb, _, _ in st.d_z] == [(4, 4), (4, 6)]


def test_outside_stencil_rejected():
    m = build_mesh(8)
    with pytest.raises(ValueError):
        gradient_stencil(m, (8, 8))
    with pytest.raises(ValueError):
        gradient_stencil(m, (9, 0))


def test_reflection_consistency_second_order():
    # even extension: discrete d/dz of u2 vanishes at z = 0 for any smooth even field
    errs = []
    for n in (16, 32, 64):
        m = build_mesh(n)
        R, Z = m.coords()
        u = np.stack([R * 0, np.cos(Z) * (1 + R), np.sin(Z)], axis=-1)
        st = gradient_stencil(m, (n // 4, 0))
        _, dz = apply_stencil(st, u)
        errs.append((abs(dz[1]), abs(dz[2] - 1.0)))
    assert all(e[0] < 1e-14 for e in errs)
    assert errs[0][1] / errs[2][1] > 12   # O(h^2) for the odd component


def test_hedgehog_fixed_on_dirichlet_layer():
    m = build_mesh(32)
    u = hedgehog_field(m)
    assert u.unit_defect() < 1e-14
