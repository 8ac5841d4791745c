"""Discrete limiting energy E_mu on the quarter-disk mesh.

Quadrature: each cell carries w = ∫ rho over cell ∩ disk.  Gradients use the
two edge differences per direction (trapezoid in the cross direction);
the singular term (4 u1^2 + u3^2)/rho^2 and the potential are lumped to the
four corners with 1/rho evaluated at the cell centre, so nothing divides by
zero on the axis.  Totals are full-ball values: factor 2 for the lower half
and 2 pi for the azimuth.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict
from functools import lru_cache

import numpy as np

from .fields import (SQRT2, Field3, augment_L, grad_P, potential_P, potential_S,
                     tangent_project)
from .mesh import Mesh, NodeClass

BALL_FACTOR = 4.0 * np.pi  # 2 (z-mirror) * 2 pi (azimuth)


@dataclass
class EnergyReport:
    dirichlet: float
    singular: float
    potential: float
    total: float
    mu: float

    def to_dict(self) -> dict:
        return asdict(self)


class DiscreteEnergy:
    """Precomputed edge and lumped weights for one mesh."""

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        h = mesh.h
        W = BALL_FACTOR * mesh.cell_weights
        n = mesh.n
        # rho-edge (i,j)-(i+1,j) is shared by cells (i,j-1) and (i,j)
        self.w_rho = np.zeros((n, n + 1))
        self.w_rho[:, :-1] += W
        self.w_rho[:, 1:] += W
        self.w_rho /= 2.0 * h * h
        self.w_z = np.zeros((n + 1, n))
        self.w_z[:-1, :] += W
        self.w_z[1:, :] += W
        self.w_z /= 2.0 * h * h
        q = W / 4.0
        qs = q / mesh.rho_center[:, None] ** 2
        self.m_pot = _scatter_corners(q)
        self.m_sing = _scatter_corners(qs)
        self.free = mesh.free

    def parts(self, U: np.ndarray, mu: float) -> tuple[float, float, float]:
        dr = U[1:, :, :] - U[:-1, :, :]
        dz = U[:, 1:, :] - U[:, :-1, :]
        dirichlet = float(np.sum(self.w_rho * np.einsum("ijk,ijk->ij", dr, dr))
                          + np.sum(self.w_z * np.einsum("ijk,ijk->ij", dz, dz)))
        singular = float(np.sum(self.m_sing * (4.0 * U[..., 0] ** 2 + U[..., 2] ** 2)))
        if mu:
            potential = float(SQRT2 * mu * np.sum(self.m_pot * (1.0 - 3.0 * potential_P(U))))
        else:
            potential = 0.0
        return dirichlet, singular, potential

    def value(self, U: np.ndarray, mu: float) -> float:
        return sum(self.parts(U, mu))

    def gradient(self, U: np.ndarray, mu: float) -> np.ndarray:
        """Exact derivative of ``value`` with respect to the nodal values; fixed nodes zeroed."""
        g = np.zeros_like(U)
        fr = 2.0 * self.w_rho[..., None] * (U[1:, :, :] - U[:-1, :, :])
        g[1:, :, :] += fr
        g[:-1, :, :] -= fr
        fz = 2.0 * self.w_z[..., None] * (U[:, 1:, :] - U[:, :-1, :])
        g[:, 1:, :] += fz
        g[:, :-1, :] -= fz
        g[..., 0] += 8.0 * self.m_sing * U[..., 0]
        g[..., 2] += 2.0 * self.m_sing * U[..., 2]
        if mu:
            g -= 3.0 * SQRT2 * mu * self.m_pot[..., None] * grad_P(U)
        g[~self.free] = 0.0
        return g

    def cell_density(self, U: np.ndarray, mu: float, use_S: bool = False) -> np.ndarray:
        """Per-cell energy density (per unit rho dρ dz), the integrand of E_D."""
        h = self.mesh.h
        a, b, c, d = U[:-1, :-1], U[1:, :-1], U[:-1, 1:], U[1:, 1:]
        sq = lambda x: np.einsum("ijk,ijk->ij", x, x)
        dirichlet = (sq(b - a) + sq(d - c) + sq(c - a) + sq(d - b)) / (2.0 * h * h)
        s = 4.0 * U[..., 0] ** 2 + U[..., 2] ** 2
        lumped = _corner_mean(s) / self.mesh.rho_center[:, None] ** 2
        if mu:
            pot = potential_S(augment_L(U, 0.0)) if use_S else potential_P(U)
            lumped = lumped + SQRT2 * mu * _corner_mean(1.0 - 3.0 * pot)
        return dirichlet + lumped


def _scatter_corners(q: np.ndarray) -> np.ndarray:
    n = q.shape[0]
    m = np.zeros((n + 1, n + 1))
    m[:-1, :-1] += q
    m[1:, :-1] += q
    m[:-1, 1:] += q
    m[1:, 1:] += q
    return m


def _corner_mean(f: np.ndarray) -> np.ndarray:
    return 0.25 * (f[:-1, :-1] + f[1:, :-1] + f[:-1, 1:] + f[1:, 1:])


@lru_cache(maxsize=8)
def discrete_energy(mesh: Mesh) -> DiscreteEnergy:
    return DiscreteEnergy(mesh)


def _check_field(u: Field3, mu: float):
    if not isinstance(u, Field3):
        raise TypeError("expected a Field3")
    if mu < 0:
        raise ValueError("mu must be non-negative")


def energy(u: Field3, mu: float) -> EnergyReport:
    """Full-ball energy E_mu[u] = 2 pi E_D[u] with its three parts."""
    _check_field(u, mu)
    d, s, p = discrete_energy(u.mesh).parts(u.values, mu)
    return EnergyReport(dirichlet=d, singular=s, potential=p, total=d + s + p, mu=float(mu))


def energy_gradient(u: Field3, mu: float) -> np.ndarray:
    _check_field(u, mu)
    return discrete_energy(u.mesh).gradient(u.values, mu)


def localized_energy(u: Field3, mu: float, r: float) -> float:
    """r^-1 times the energy of W = L[u] over the upper half ball B_r^+.

    The azimuthal integral is divided out, i.e. the value is the cross-section
    integral over {rho, z >= 0, rho^2 + z^2 < r^2} with weight rho, so that at
    r = 1 it equals total / (4 pi).  The potential is evaluated through S[L[u]].
    """
    mesh = u.mesh
    if not 0 < r <= 1.0:
        raise ValueError("radius must lie in (0, 1]")
    if r < 2.0 * mesh.h:
        raise ValueError(f"radius {r} is below the resolvable scale 2h = {2 * mesh.h}")
    dens = discrete_energy(mesh).cell_density(u.values, mu, use_S=True)
    w = mesh.ball_cell_weights(r)
    return float(np.sum(w * dens) / r)


def localized_profile(u: Field3, mu: float, radii) -> np.ndarray:
    return np.array([localized_energy(u, mu, r) for r in radii])


@dataclass
class ResidualReport:
    max: float
    l2: float
    field: np.ndarray  # per-node tangential residual magnitude, NaN where not evaluated


def euler_lagrange_residual(u: Field3, mu: float, rho_min: float | None = None,
                            r_min: float = 0.0, arc_margin: float | None = None) -> ResidualReport:
    """Tangential residual of the strong Euler-Lagrange system.

    -(1/rho) D.(rho D u) + (4u1, 0, u3)/rho^2 - (3 sqrt2 / 2) mu grad P(u),
    projected onto the tangent plane at u, with second-order central
    differences on interior nodes having rho > rho_min (default 4h),
    |x| > r_min and |x| < 1 - arc_margin (default 3h; next to the jagged
    Dirichlet layer the cut-cell quadrature is only first order).
    """
    mesh = u.mesh
    h = mesh.h
    if rho_min is None:
        rho_min = 4.0 * h
    U = u.values
    R, Z = mesh.coords()
    nc = mesh.node_class
    mask = np.zeros(mesh.shape, dtype=bool)
    mask[1:-1, 1:-1] = True
    if arc_margin is None:
        arc_margin = 3.0 * h
    rr_ = np.hypot(R, Z)
    mask &= (nc == NodeClass.INTERIOR) & (R > rho_min) & (rr_ > r_min) & (rr_ < 1.0 - arc_margin)
    lap = np.zeros_like(U)
    c = U[1:-1, 1:-1]
    rr = R[1:-1, 1:-1, None]
    lap[1:-1, 1:-1] = ((U[2:, 1:-1] - 2 * c + U[:-2, 1:-1]) / h**2
                       + (U[2:, 1:-1] - U[:-2, 1:-1]) / (2 * h * rr)
                       + (U[1:-1, 2:] - 2 * c + U[1:-1, :-2]) / h**2)
    with np.errstate(divide="ignore", invalid="ignore"):
        sing = np.stack([4.0 * U[..., 0], np.zeros_like(R), U[..., 2]], axis=-1) / R[..., None] ** 2
    op = -lap + sing - 1.5 * SQRT2 * mu * grad_P(U)
    res = np.linalg.norm(tangent_project(U, op), axis=-1)
    res = np.where(mask, res, np.nan)
    vals = res[mask]
    if vals.size == 0:
        return ResidualReport(max=0.0, l2=0.0, field=res)
    weights = BALL_FACTOR * R[mask] * h * h
    return ResidualReport(max=float(vals.max()),
                          l2=float(np.sqrt(np.sum(weights * vals**2))), field=res)


def l2_distance_to_hedgehog(u: Field3) -> float:
    """||L[u] - L[U*]||_{L^2(B_1)}, which equals the 3-D L^2 norm of u - U*."""
    from .fields import hedgehog_U_star
    mesh = u.mesh
    R, Z = mesh.coords()
    d = u.values - hedgehog_U_star(R, Z)
    m = discrete_energy(mesh).m_pot
    return float(np.sqrt(np.sum(m * np.einsum("ijk,ijk->ij", d, d))))
