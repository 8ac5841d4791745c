"""Oracle suite behind `ldg verify`: cheap identity and quadrature checks."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import analysis, tangent
from .energy import energy, discrete_energy
from .fields import (Field3, augment_L, hedgehog_field, hedgehog_U_star, normalize, potential_P,
                     potential_S, q_from_u)
from .mesh import build_mesh


@dataclass
class Check:
    name: str
    value: float
    tol: float
    passed: bool
    seconds: float


def _unit(rng, k):
    x = rng.normal(size=(k, 3))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _mutated_eigenvalues(u):
    ev = analysis.eigenvalues(u)
    ev.l1 = ev.l1 * (1.0 + 1e-6)   # fault injection
    return ev


def run_checks(seed: int = 0, mutate: str | None = None) -> list[Check]:
    rng = np.random.default_rng(seed)
    eig = _mutated_eigenvalues if mutate == "eigen" else analysis.eigenvalues
    out: list[Check] = []

    def check(name, tol, fn, below=True):
        t = time.perf_counter()
        v = float(fn())
        ok = v < tol if below else v > tol
        out.append(Check(name, v, tol, bool(ok), time.perf_counter() - t))

    def eig_oracle():
        u = _unit(rng, 10_000)
        th = rng.uniform(0, 2 * np.pi, len(u))
        num = np.linalg.eigvalsh(q_from_u(u, 1.0, 0.0, th))
        return np.abs(np.sort(num, axis=1) - eig(u).sorted()).max()

    def s_of_l():
        u = rng.normal(size=(10_000, 3))
        th = rng.uniform(0, 2 * np.pi, len(u))
        return np.abs(potential_S(augment_L(u, th)) - potential_P(u)).max()

    def hedgehog_ids():
        x = _unit(rng, 10_000)[:, :2]
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        U = hedgehog_U_star(np.abs(x[:, 0]), x[:, 1])
        return max(np.abs(np.linalg.norm(U, axis=1) - 1).max(), np.abs(potential_P(U) - 1 / 3).max())

    def kappa_eig():
        u = _unit(rng, 2000)
        k = analysis.director_kappa(u)
        k3 = np.column_stack([k[:, 0], np.zeros(len(k)), k[:, 1]])
        Q = q_from_u(u, 1.0, 0.0, 0.0)
        return np.abs(np.einsum("nij,nj->ni", Q, k3) - analysis.eigenvalues(u).l3[:, None] * k3).max()

    def ode():
        worst = 0.0
        for c in ("II", "III"):
            for b in (0.3, 1.0, 2.0):
                for s in (1, -1):
                    worst = max(worst, tangent.ode_residual(tangent.profile(c, b, s)))
        return worst

    def first_integral():
        worst = 0.0
        for c in ("II", "III"):
            for b in (0.3, 1.0, 2.0):
                for s in (1, -1):
                    worst = max(worst, tangent.first_integral_deviation(tangent.profile(c, b, s)))
        return worst

    def hedgehog_energy():
        return abs(energy(hedgehog_field(build_mesh(128)), 10.0).total / (24 * math.pi) - 1)

    def lambda_energy():
        return abs(tangent.profile_energy(tangent.lambda_pm(1))[1] - 8 * math.pi)

    def hess_tent():
        mu = 10.0
        r, f = tangent.tent(math.ceil(0.8 * math.sqrt(mu)))
        return tangent.hessian_radial(f, mu, r)

    def hess_bump():
        r = np.linspace(0, 1, 10001)
        return tangent.hessian_radial(r * (1 - r), 0.0, r)

    def reduced_F():
        mesh = build_mesh(32)
        R, Z = mesh.coords()
        worst = 0.0
        for _ in range(5):
            v = analysis.boundary_v(R, Z) + 0.3 * rng.normal(size=mesh.shape + (2,))
            v /= np.linalg.norm(v, axis=-1, keepdims=True)
            v[~mesh.free] = analysis.boundary_v(R, Z)[~mesh.free]
            e = energy(Field3(mesh, analysis.reduced_map_u_from_v(v)), 0.0).total
            worst = max(worst, abs(e - 1.5 * analysis.reduced_energy_F(mesh, v)) / e)
        return worst

    def grad_fd():
        mesh = build_mesh(32)
        V = hedgehog_field(mesh).values.copy()
        V[mesh.free] += 0.1 * rng.normal(size=(int(mesh.free.sum()), 3))
        V = normalize(V)
        de = discrete_energy(mesh)
        d = rng.normal(size=V.shape)
        d[~mesh.free] = 0
        eps = 1e-5
        fd = (de.value(V + eps * d, 10.0) - de.value(V - eps * d, 10.0)) / (2 * eps)
        an = float(np.sum(de.gradient(V, 10.0) * d))
        return abs(fd / an - 1)

    check("eigenvalue oracle (max sorted diff)", 1e-10, eig_oracle)
    check("S(L[u]) = P(u)", 1e-10, s_of_l)
    check("|U*| = 1 and P(U*) = 1/3", 1e-10, hedgehog_ids)
    check("kappa is the l3 eigenvector", 1e-10, kappa_eig)
    check("ODE residual, classes II/III", 1e-7, ode)
    check("first integral, classes II/III", 1e-8, first_integral)
    check("E[U*] = 24 pi at n=128 (rel)", 0.015, hedgehog_energy)
    check("B1 energy of Lambda+ = 8 pi", 1e-6, lambda_energy)
    check("Hessian along tent (must be < 0)", 0.0, hess_tent)
    check("Hessian along r(1-r), mu=0 (must be > 0)", 0.0, hess_bump, below=False)
    check("E[u^v] = 1.5 F[v] (rel, max over fields)", 1e-10, reduced_F)
    check("gradient vs central FD (rel)", 1e-6, grad_fd)
    return out


def format_table(checks: list[Check]) -> str:
    w = max(len(c.name) for c in checks)
    lines = [f"{'check':<{w}}  {'value':>12}  {'tol':>9}  result"]
    for c in checks:
        lines.append(f"{c.name:<{w}}  {c.value:12.3e}  {c.tol:9.1e}  {'PASS' if c.passed else 'FAIL'}")
    return "\n".join(lines)
