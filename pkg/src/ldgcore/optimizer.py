"""Projected-gradient minimization over unit fields with obstacle constraints on T."""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from . import _kernels
from .energy import EnergyReport, discrete_energy, energy
from .fields import Field3, hedgehog_field, hedgehog_U_star, normalize, tangent_project
from .mesh import Mesh, NodeClass, build_mesh

log = logging.getLogger(__name__)


class Branch(str, enum.Enum):
    PLUS = "PLUS"
    MINUS = "MINUS"
    NONE = "NONE"


@dataclass(frozen=True)
class ObstacleSpec:
    """u2 >= b on T (PLUS, b in (-1, -1/2]) or u2 <= c on T (MINUS, c in [-1/2, 1))."""
    branch: Branch = Branch.NONE
    bound: float = float("nan")

    def __post_init__(self):
        br = Branch(self.branch)
        object.__setattr__(self, "branch", br)
        b = float(self.bound)
        if br is Branch.PLUS and not (-1.0 < b <= -0.5):
            raise ValueError(f"PLUS bound must lie in (-1, -1/2], got {b}")
        if br is Branch.MINUS and not (-0.5 <= b < 1.0):
            raise ValueError(f"MINUS bound must lie in [-1/2, 1), got {b}")

    @classmethod
    def plus(cls, b: float = -0.5) -> "ObstacleSpec":
        return cls(Branch.PLUS, b)

    @classmethod
    def minus(cls, c: float = 0.5) -> "ObstacleSpec":
        return cls(Branch.MINUS, c)

    @classmethod
    def none(cls) -> "ObstacleSpec":
        return cls(Branch.NONE)

    @property
    def u2_range(self) -> tuple[float, float]:
        if self.branch is Branch.PLUS:
            return self.bound, 1.0
        if self.branch is Branch.MINUS:
            return -1.0, self.bound
        return -1.0, 1.0


@dataclass
class SolverConfig:
    """Solver knobs.

    grad_tol applies to the mass-normalized projected gradient, i.e. the
    discrete strong-form residual sup_i |g_T,i| / m_i, which is resolution
    independent (the raw nodal gradient scales like h^2 times that).
    """
    max_iters: int = 200_000
    grad_tol: float = 1e-3
    energy_rtol: float = 1e-13   # stop when the energy stalls for `stall_window` iterations
    stall_window: int = 500
    c1: float = 1e-4
    shrink: float = 0.5
    tau0: float = 1.0
    tau_max: float = 50.0
    min_step: float = 1e-14
    sector_projection: bool = True
    seed_amplitude: float = 0.2
    flip_every: int = 25
    precondition: bool = True
    log_every: int = 0

    def __post_init__(self):
        for name in ("max_iters", "grad_tol", "c1", "tau0", "tau_max", "min_step", "stall_window"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")
        if not 0 < self.c1 < 1:
            raise ValueError("c1 must lie in (0, 1)")


@dataclass
class SolveTrace:
    energies: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    flips: int = 0
    iterations: int = 0
    status: str = "running"   # converged | stalled | max_iters | line_search_warning
    message: str = ""


class SolverError(RuntimeError):
    pass


def instability_lambda(mu: float) -> int:
    """Tent slope used for the seed: ceil(0.8 sqrt(mu)), at least 1."""
    return max(1, math.ceil(0.8 * math.sqrt(mu)))


def initial_guess(mesh: Mesh, branch, sigma: float, mu: float = 10.0) -> Field3:
    """normalize(U* + sigma * Pi_tan(0, g(r), 0)) with g = max(1 - lam r, 0).

    ``sigma`` is taken with the sign of the branch (PLUS up, MINUS down);
    pass sigma = 0 for U* itself.
    """
    if not abs(sigma) < 1:
        raise ValueError("|sigma| must be < 1")
    branch = Branch(branch)
    s = abs(sigma) * (-1.0 if branch is Branch.MINUS else 1.0)
    base = hedgehog_field(mesh).values
    if s == 0.0:
        return Field3(mesh, base)
    R, Z = mesh.coords()
    g = np.maximum(1.0 - instability_lambda(mu) * np.hypot(R, Z), 0.0)
    pert = np.zeros_like(base)
    pert[..., 1] = g
    vals = normalize(base + s * tangent_project(base, pert))
    vals[~mesh.free] = base[~mesh.free]
    return Field3(mesh, vals)


def _project_values(V: np.ndarray, mesh: Mesh, obs: ObstacleSpec, sector: bool) -> np.ndarray:
    lo, hi = obs.u2_range
    out = np.empty_like(V)
    _kernels.project_step(np.ascontiguousarray(V, dtype=float), np.zeros_like(V, dtype=float), 0.0,
                          mesh.node_class.astype(np.int64), mesh.free, lo, hi, bool(sector), out)
    return out


def project_constraints(u: Field3, obs: ObstacleSpec, sector: bool = True) -> Field3:
    """Feasibility projection.

    EQUATOR: u3 := 0, (u1, u2) renormalized in-plane, u2 clamped to the
    obstacle range, u1 := +sqrt(1 - u2^2).  AXIS: (0, sign(u2), 0) with +1 on
    ties; the origin takes whichever sign the obstacle admits.  Elsewhere:
    optional sector (|u1|, u2, |u3|) and renormalization.  ARC/OUTSIDE nodes
    are left untouched.
    """
    return Field3(u.mesh, _project_values(u.values, u.mesh, obs, sector))


class _Problem:
    def __init__(self, mesh: Mesh, mu: float, obs: ObstacleSpec, cfg: SolverConfig):
        self.mesh, self.mu, self.obs, self.cfg = mesh, float(mu), obs, cfg
        self.de = discrete_energy(mesh)
        de = self.de
        nc = mesh.node_class
        self.cls = nc.astype(np.int64)
        self.free = mesh.free
        self.ax = nc == NodeClass.AXIS
        self.eq = nc == NodeClass.EQUATOR
        self.movable = self.free & ~self.ax
        self.lo, self.hi = obs.u2_range
        self.sector = bool(cfg.sector_projection)
        lap = np.zeros(mesh.shape)
        lap[1:, :] += de.w_rho
        lap[:-1, :] += de.w_rho
        lap[:, 1:] += de.w_z
        lap[:, :-1] += de.w_z
        diag = np.stack([2 * lap + 8 * de.m_sing, 2 * lap, 2 * lap + 2 * de.m_sing], axis=-1)
        if not cfg.precondition:
            diag = np.ones_like(diag) * diag[self.free].max()
        self.dinv = np.where(diag > 0, 1.0 / np.where(diag > 0, diag, 1.0), 0.0)
        self.dmetric = np.where(self.dinv > 0, diag, 0.0)
        self.inv_mass = np.where(self.movable, 1.0 / np.maximum(de.m_pot, 1e-300), 0.0)
        self._G = np.empty(mesh.shape + (3,))

    def value(self, V):
        de = self.de
        return _kernels.value(V, de.w_rho, de.w_z, de.m_sing, de.m_pot, self.mu)

    def gradient(self, V):
        de = self.de
        G = np.empty_like(V)
        _kernels.gradient(V, de.w_rho, de.w_z, de.m_sing, de.m_pot, self.mu, self.free, G)
        return G

    def projected_gradient(self, V, G):
        out = np.empty_like(V)
        _kernels.projected_gradient(V, G, self.cls, self.movable, self.lo, self.hi, self.sector, out)
        return out

    def residual(self, gT):
        return float(np.max(np.sqrt(np.einsum("ijk,ijk->ij", gT, gT)) * self.inv_mass))

    def step(self, V, P, t, out):
        _kernels.project_step(V, P, t, self.cls, self.free, self.lo, self.hi, self.sector, out)
        return out

    def project(self, V):
        return self.step(np.ascontiguousarray(V, dtype=float), np.zeros_like(V), 0.0, np.empty_like(V))

    def flip_axis(self, V) -> int:
        """Red-black sweep flipping axis u2 signs when that lowers the energy.

        Axis nodes only carry (0, +-1, 0), so a sign change is a discrete move
        the gradient step cannot make; each candidate's energy change is local.
        """
        de, mu = self.de, self.mu
        js = np.nonzero(self.ax[0])[0]
        total = 0
        for parity in (0, 1):
            jj = js[js % 2 == parity]
            if jj.size == 0:
                continue
            s = V[0, jj, 1]
            d = 4.0 * s * de.w_rho[0, jj] * V[1, jj, 1]
            d += 4.0 * s * de.w_z[0, jj] * V[0, jj + 1, 1]
            has_dn = jj > 0
            dn = jj[has_dn] - 1
            d[has_dn] += 4.0 * s[has_dn] * de.w_z[0, dn] * V[0, dn, 1]
            d += 2.0 * math.sqrt(2.0) * mu * de.m_pot[0, jj] * s
            flip = d < -1e-14
            if jj[0] == 0 and not self.lo <= -s[0] <= self.hi:
                flip[0] = False
            V[0, jj[flip], 1] = -s[flip]
            total += int(flip.sum())
        return total


def minimize(u0: Field3, mu: float, obs: ObstacleSpec, cfg: SolverConfig | None = None):
    """Preconditioned projected gradient with Armijo backtracking.

    Each iteration: tangential gradient g_T restricted to feasible directions,
    direction p = -D^-1 g_T with D the diagonal of the quadratic part,
    Barzilai-Borwein initial step in the D-metric, backtracking until
    E(x_new) <= E(x) + c1 <g, x_new - x>, x_new = project(x + t p).
    Every ``flip_every`` iterations the axis signs are swept.

    Returns (field, EnergyReport, SolveTrace).  The energy trace is
    non-increasing; every iterate is feasible.
    """
    cfg = cfg or SolverConfig()
    if mu < 0:
        raise ValueError("mu must be non-negative")
    mesh = u0.mesh
    pb = _Problem(mesh, mu, obs, cfg)
    V = pb.project(u0.values)
    E = pb.value(V)
    if not np.isfinite(E):
        raise SolverError("non-finite initial energy")
    trace = SolveTrace()
    trace.energies.append(E)

    def refresh(V):
        g = pb.gradient(V)
        gT = pb.projected_gradient(V, g)
        return g, gT, pb.residual(gT)

    g, gT, res = refresh(V)
    trace.residuals.append(res)
    tau = cfg.tau0
    prev = None
    best_at, E_ref = 0, E
    buf = np.empty_like(V)
    it = 0
    while True:
        if res < cfg.grad_tol:
            trace.status = "converged"
            break
        if it >= cfg.max_iters:
            trace.status = "max_iters"
            break
        if cfg.flip_every and it % cfg.flip_every == 0 and pb.flip_axis(V):
            trace.flips += 1
            E = pb.value(V)
            g, gT, res = refresh(V)
            prev = None
        it += 1
        p = -pb.dinv * gT
        if prev is not None:
            s, y = V - prev[0], gT - prev[1]
            sy = float(np.sum(s * y))
            if sy > 0:
                tau = float(np.sum(pb.dmetric * s * s)) / sy
            tau = min(max(tau, 1e-3), cfg.tau_max)
        t = tau
        while True:
            pb.step(V, p, t, buf)
            En = pb.value(buf)
            if not np.isfinite(En):
                raise SolverError("non-finite energy during line search")
            if En <= E and En <= E + cfg.c1 * float(np.sum(g * (buf - V))):
                break
            t *= cfg.shrink
            if t < cfg.min_step:
                break
        if t < cfg.min_step:
            trace.status = "line_search_warning"
            trace.message = f"line search failed at iteration {it}"
            log.warning(trace.message)
            break
        prev = (V, gT)
        V, buf = buf, np.empty_like(V)
        E = En
        g, gT, res = refresh(V)
        trace.energies.append(E)
        trace.residuals.append(res)
        trace.steps.append(t)
        if cfg.log_every and it % cfg.log_every == 0:
            log.info("it %d E %.10f res %.3e step %.3e", it, E, res, t)
        if E < E_ref - cfg.energy_rtol * abs(E_ref) * cfg.stall_window:
            E_ref, best_at = E, it
        elif it - best_at >= cfg.stall_window:
            if cfg.flip_every and pb.flip_axis(V):
                trace.flips += 1
                E = pb.value(V)
                g, gT, res = refresh(V)
                prev, best_at, E_ref = None, it, E
                continue
            trace.status = "stalled"
            break
    trace.iterations = it
    out = Field3(mesh, V)
    return out, energy(out, mu), trace


@dataclass
class SweepItem:
    value: float
    field: Field3 | None
    energy: EnergyReport | None
    trace: SolveTrace | None
    distance: float | None = None
    defects: object = None
    error: str | None = None


def sweep(parameter: str, values, mesh: Mesh, *, mu: float = 10.0, branch=Branch.PLUS,
          bound: float | None = None, cfg: SolverConfig | None = None, u0: Field3 | None = None,
          analyze: bool = True) -> list[SweepItem]:
    """Warm-started continuation in b, c or mu.

    The first solve starts from ``u0`` (default: the seeded hedgehog); each
    later one from the previous minimizer, re-projected for the new
    constraint.  Failures are recorded per item and the sweep continues from
    the last good field.
    """
    from .analysis import analyze as _analyze
    from .energy import l2_distance_to_hedgehog

    values = [float(v) for v in values]
    if not values:
        raise ValueError("empty value list")
    diffs = np.diff(values)
    if not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise ValueError("sweep values must be strictly monotone")
    if parameter not in ("b", "c", "mu"):
        raise ValueError(f"unknown sweep parameter {parameter!r}")
    cfg = cfg or SolverConfig()
    branch = Branch({"b": "PLUS", "c": "MINUS"}.get(parameter, Branch(branch).value))
    if bound is None:
        bound = -0.5 if branch is Branch.PLUS else 0.5
    out: list[SweepItem] = []
    current = u0
    for val in values:
        m_mu = val if parameter == "mu" else mu
        b = val if parameter in ("b", "c") else bound
        try:
            obs = ObstacleSpec(branch, b) if branch is not Branch.NONE else ObstacleSpec.none()
            start = current if current is not None else initial_guess(mesh, branch, cfg.seed_amplitude, m_mu)
            start = project_constraints(start, obs, cfg.sector_projection)
            u, rep, tr = minimize(start, m_mu, obs, cfg)
        except (ValueError, SolverError) as exc:
            log.error("sweep item %s=%g failed: %s", parameter, val, exc)
            out.append(SweepItem(val, None, None, None, error=str(exc)))
            continue
        item = SweepItem(val, u, rep, tr, distance=l2_distance_to_hedgehog(u))
        if analyze:
            item.defects = _analyze(u)
        out.append(item)
        current = u
    return out
