"""Quarter-disk grid on the (rho, z) half plane.

The unit ball reduces, under axial symmetry and the z-parity of the
fields, to the quarter disk {rho >= 0, z >= 0, rho^2 + z^2 <= 1}.  Nodes
sit on a uniform Cartesian grid with spacing h = 1/n; cells straddling the
unit circle keep only the part of their rho-weighted area inside the disk.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np


class NodeClass(IntEnum):
    INTERIOR = 0
    AXIS = 1
    EQUATOR = 2
    ARC = 3
    OUTSIDE = 4


# parity of (u1, u2, u3) under z -> -z and under rho -> -rho
Z_PARITY = np.array([1.0, 1.0, -1.0])
RHO_PARITY = np.array([1.0, 1.0, -1.0])

_SUBSAMPLES = 16


@dataclass(frozen=True, eq=False)
class Mesh:
    n: int
    h: float
    rho: np.ndarray          # (n+1,) node coordinates along rho
    z: np.ndarray            # (n+1,) node coordinates along z
    node_class: np.ndarray   # (n+1, n+1) NodeClass codes, indexed [i_rho, j_z]
    cell_weights: np.ndarray  # (n, n) integral of rho over cell ∩ disk
    rho_center: np.ndarray   # (n,) cell-centre rho, >= h/2

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n + 1, self.n + 1)

    @property
    def free(self) -> np.ndarray:
        """Nodes whose values are unknowns of the minimization."""
        nc = self.node_class
        return (nc == NodeClass.INTERIOR) | (nc == NodeClass.AXIS) | (nc == NodeClass.EQUATOR)

    @property
    def fixed(self) -> np.ndarray:
        return ~self.free

    @property
    def active_cells(self) -> np.ndarray:
        return self.cell_weights > 0.0

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.rho, self.z, indexing="ij")

    def node_mass(self) -> np.ndarray:
        """Lumped nodal quadrature weight: a quarter of every adjacent cell weight."""
        w = self.cell_weights / 4.0
        m = np.zeros(self.shape)
        m[:-1, :-1] += w
        m[1:, :-1] += w
        m[:-1, 1:] += w
        m[1:, 1:] += w
        return m

    def ball_cell_weights(self, radius: float) -> np.ndarray:
        """Cell weights restricted to the disk of the given radius about the origin."""
        return self.disk_cell_weights((0.0, 0.0), radius)

    def disk_cell_weights(self, center: tuple[float, float], radius: float) -> np.ndarray:
        """Cell weights restricted to the (rho, z) disk |x - center| < radius."""
        h, n = self.h, self.n
        lo = np.arange(n) * h
        # nearest / farthest distance from the centre over each cell
        dr_near = np.maximum(np.maximum(lo - center[0], center[0] - (lo + h)), 0.0)
        dz_near = np.maximum(np.maximum(lo - center[1], center[1] - (lo + h)), 0.0)
        dr_far = np.maximum(np.abs(lo - center[0]), np.abs(lo + h - center[0]))
        dz_far = np.maximum(np.abs(lo - center[1]), np.abs(lo + h - center[1]))
        near = np.hypot(dr_near[:, None], dz_near[None, :])
        far = np.hypot(dr_far[:, None], dz_far[None, :])
        out = np.where(far <= radius, self.cell_weights, 0.0)
        cut = (near < radius) & (far > radius) & (self.cell_weights > 0)
        idx = np.argwhere(cut)
        if len(idx):
            m = _SUBSAMPLES
            off = (np.arange(m) + 0.5) * h / m
            rs = idx[:, 0, None, None] * h + off[None, :, None]
            zs = idx[:, 1, None, None] * h + off[None, None, :]
            ok = (rs**2 + zs**2 < 1.0) & ((rs - center[0]) ** 2 + (zs - center[1]) ** 2 < radius**2)
            out[idx[:, 0], idx[:, 1]] = np.where(ok, rs, 0.0).sum(axis=(1, 2)) * (h / m) ** 2
        return out


def build_mesh(n: int) -> Mesh:
    """Build the quarter-disk mesh with n intervals per side."""
    if int(n) != n or n < 8:
        raise ValueError(f"mesh needs an integer n >= 8, got {n!r}")
    n = int(n)
    h = 1.0 / n
    coord = np.arange(n + 1) * h
    R, Z = np.meshgrid(coord, coord, indexing="ij")
    r = np.hypot(R, Z)
    tol = 1e-12

    nc = np.full((n + 1, n + 1), NodeClass.INTERIOR, dtype=np.int8)
    nc[0, :] = NodeClass.AXIS
    nc[1:, 0] = NodeClass.EQUATOR
    nc[r >= 1.0 - h - tol] = NodeClass.ARC
    nc[r > 1.0 + tol] = NodeClass.OUTSIDE

    # rho-weighted area of each cell inside the unit disk, by midpoint
    # subsampling (exact for cells fully inside)
    m = _SUBSAMPLES
    off = (np.arange(m) + 0.5) / m
    sub = (coord[:-1, None] + off[None, :] * h)  # (n, m)
    rs = sub[:, None, :, None]
    zs = sub[None, :, None, :]
    inside = rs**2 + zs**2 < 1.0
    weights = np.where(inside, rs * (h / m) ** 2, 0.0).sum(axis=(2, 3))

    return Mesh(n=n, h=h, rho=coord, z=coord.copy(), node_class=nc,
                cell_weights=weights, rho_center=coord[:-1] + h / 2)


@dataclass(frozen=True)
class Stencil:
    """Central-difference stencil at one node.

    Each entry of ``d_rho`` / ``d_z`` is ``(neighbour, coefficient, signs)``:
    the derivative is sum(coefficient * signs * u[neighbour]).  ``signs`` is
    the per-component reflection applied when the neighbour is a ghost
    mirrored across the axis or the equator.
    """

    node: tuple[int, int]
    node_class: NodeClass
    d_rho: tuple[tuple[tuple[int, int], float, np.ndarray], ...]
    d_z: tuple[tuple[tuple[int, int], float, np.ndarray], ...]


def gradient_stencil(mesh: Mesh, node: tuple[int, int]) -> Stencil:
    i, j = node
    if not (0 <= i <= mesh.n and 0 <= j <= mesh.n):
        raise ValueError(f"node {node} is off the grid")
    cls = NodeClass(mesh.node_class[i, j])
    if cls == NodeClass.OUTSIDE:
        raise ValueError(f"node {node} lies outside the unit disk")
    c = 1.0 / (2.0 * mesh.h)
    ones = np.ones(3)

    def axis_pair(k, parity, size):
        # (minus neighbour, plus neighbour) along one direction with mirror ghosts
        if k == 0:
            return ((1, -c, parity), (1, c, ones))
        if k == size:
            # last grid line; fall back to a one-sided difference
            return ((k - 1, -2 * c, ones), (k, 2 * c, ones))
        return ((k - 1, -c, ones), (k + 1, c, ones))

    drho = tuple(((a, j), coef, s) for a, coef, s in axis_pair(i, RHO_PARITY, mesh.n))
    dz = tuple(((i, b), coef, s) for b, coef, s in axis_pair(j, Z_PARITY, mesh.n))
    return Stencil(node=(i, j), node_class=cls, d_rho=drho, d_z=dz)


def apply_stencil(stencil: Stencil, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate (d_rho u, d_z u) at the stencil node for a nodal field u."""
    drho = sum(coef * s * u[nb] for nb, coef, s in stencil.d_rho)
    dz = sum(coef * s * u[nb] for nb, coef, s in stencil.d_z)
    return drho, dz
