"""Eigenvalue/phase analysis, defect detection and the reduced 2-vector functional."""
from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .energy import BALL_FACTOR
from .fields import SQRT2, SQRT3, Field3
from .mesh import Mesh, NodeClass

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
UNIAXIAL, BIAXIAL = "UNIAXIAL", "BIAXIAL"
ORDER_321 = "l3>l2>l1"   # torus neighbourhood
ORDER_312 = "l3>l1>l2"   # split-core neighbourhood


class ResolutionWarning(UserWarning):
    pass


@dataclass
class EigenTriple:
    l1: np.ndarray
    l2: np.ndarray
    l3: np.ndarray
    delta: np.ndarray

    def sorted(self) -> np.ndarray:
        return np.sort(np.stack([self.l1, self.l2, self.l3], axis=-1), axis=-1)


def eigenvalues(u) -> EigenTriple:
    """Closed-form eigenvalues of Q-bar[u]; l1 is the e_theta eigenvalue."""
    u = np.asarray(u, dtype=float)
    u1, u2, u3 = u[..., 0], u[..., 1], u[..., 2]
    s = u1 + u2 / SQRT3
    delta = (u1 - SQRT3 * u2) ** 2 + 4.0 * u3**2
    sd = np.sqrt(delta)
    return EigenTriple(l1=-0.5 * s, l2=0.25 * (s - sd), l3=0.25 * (s + sd), delta=delta)


def ordering_tags(u, tol: float = 1e-6) -> np.ndarray:
    """Per-sample tag: '' (uniaxial), ORDER_321, ORDER_312 or 'other'."""
    ev = eigenvalues(u)
    l1, l2, l3 = ev.l1, ev.l2, ev.l3
    gap = np.minimum(np.minimum(np.abs(l1 - l2), np.abs(l2 - l3)), np.abs(l1 - l3))
    tags = np.full(np.shape(l1), "other", dtype=object)
    tags[(l3 > l2) & (l2 > l1)] = ORDER_321
    tags[(l3 > l1) & (l1 > l2)] = ORDER_312
    tags[gap <= tol] = ""
    return tags


def classify_phase(u, tol: float = 1e-6) -> tuple[str, Optional[str]]:
    """(UNIAXIAL | BIAXIAL, ordering tag or None) for a single unit vector."""
    tag = ordering_tags(np.asarray(u, dtype=float)[None], tol)[0]
    if tag == "":
        return UNIAXIAL, None
    return BIAXIAL, (tag if tag != "other" else None)


def director_kappa(u, check: bool = True) -> np.ndarray:
    """Unit eigenvector of l3 as (e_rho, e_z) coefficients.

    kappa_rho = sqrt((1 + a)/2), kappa_z = sign(u3) sqrt((1 - a)/2) with
    a = (u1 - sqrt3 u2)/sqrt(Delta); this equals sqrt2 u3 / (sqrt(Delta)
    sqrt(1 + a)) away from a = -1 and picks +-e_z (sign of u3, + on ties) there.
    """
    u = np.asarray(u, dtype=float)
    u1, u2, u3 = u[..., 0], u[..., 1], u[..., 2]
    delta = (u1 - SQRT3 * u2) ** 2 + 4.0 * u3**2
    bad = delta <= 0.0
    if check and np.any(bad):
        raise ValueError("director undefined where Delta = 0 (u1 = sqrt3 u2, u3 = 0)")
    sd = np.sqrt(np.where(bad, 1.0, delta))
    d = u1 - SQRT3 * u2
    # 1 +- a without cancellation: sqrt(Delta) -+ d = 4 u3^2 / (sqrt(Delta) +- d)
    big = np.where(bad, 1.0, sd + np.abs(d))
    small = 4.0 * u3**2 / big
    one_p = np.where(d >= 0, big, small) / sd
    one_m = np.where(d >= 0, small, big) / sd
    sgn = np.where(u3 < 0.0, -1.0, 1.0)
    k = np.stack([np.sqrt(0.5 * one_p), sgn * np.sqrt(0.5 * one_m)], axis=-1)
    if np.any(bad):
        k[bad] = np.nan
    return k


# ---------------------------------------------------------------- sampling

def _interpolator(u: Field3):
    m = u.mesh
    return RegularGridInterpolator((m.rho, m.z), u.values, method="linear",
                                   bounds_error=False, fill_value=None)


def sample(u: Field3, rho, z, interp=None) -> np.ndarray:
    """Bilinear samples of u at (rho, z), using the z-parity for z < 0; normalized."""
    rho = np.asarray(rho, dtype=float)
    z = np.asarray(z, dtype=float)
    f = interp or _interpolator(u)
    pts = np.stack([np.abs(rho), np.abs(z)], axis=-1)
    v = f(pts.reshape(-1, 2)).reshape(pts.shape[:-1] + (3,))
    v[..., 2] *= np.where(z < 0, -1.0, 1.0)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / np.where(n > 0, n, 1.0)


# ---------------------------------------------------------------- axis

@dataclass
class AxisCrossing:
    z: float
    z_low: float
    z_high: float
    label: str          # "Lambda+" (u2 = +1 above, -1 below) or "Lambda-"


def detect_axis_singularities(u: Field3, resolved: float = 0.5, max_gap: int = 3):
    """Sign changes of u2 along the positive z axis (origin and arc node included).

    Returns (crossings, alternating).  Nodes with |u2| < ``resolved`` are
    treated as transition; more than ``max_gap`` of them in a row triggers a
    ResolutionWarning.
    """
    m = u.mesh
    js = np.nonzero(m.node_class[0] != NodeClass.OUTSIDE)[0]
    z = m.z[js]
    u2 = u.values[0, js, 1]
    ok = np.abs(u2) >= resolved
    idx = np.nonzero(ok)[0]
    out: list[AxisCrossing] = []
    for a, b in zip(idx[:-1], idx[1:]):
        if b - a - 1 > max_gap:
            warnings.warn(f"unresolved axis transition between z={z[a]:.4f} and z={z[b]:.4f}",
                          ResolutionWarning, stacklevel=2)
        if np.sign(u2[a]) != np.sign(u2[b]):
            label = "Lambda+" if u2[b] > 0 else "Lambda-"
            out.append(AxisCrossing(z=0.5 * (z[a] + z[b]), z_low=float(z[a]), z_high=float(z[b]),
                                    label=label))
    alternating = all(p.label != q.label for p, q in zip(out[:-1], out[1:]))
    return out, alternating


# ---------------------------------------------------------------- ring

@dataclass
class RingInfo:
    rho0: float
    ordering_ok: bool
    violation_fraction: float
    winding_half_turns: float
    kappa_quotient: Optional[float] = None


def line_field_winding(kappa: np.ndarray) -> float:
    """Total rotation of a closed loop of line-field samples, in units of 2 pi.

    Increments are taken mod pi (director sign is irrelevant)."""
    ang = np.arctan2(kappa[:, 1], kappa[:, 0])
    d = np.diff(np.concatenate([ang, ang[:1]]))
    d = (d + 0.5 * np.pi) % np.pi - 0.5 * np.pi
    return float(d.sum() / (2.0 * np.pi))


def ring_crossing(u: Field3) -> Optional[float]:
    """Rightmost rho where u2 on T passes from > 1/2 (left) to < 1/2 (right)."""
    m = u.mesh
    idx = np.nonzero(m.node_class[:, 0] != NodeClass.OUTSIDE)[0]
    u2 = u.values[idx, 0, 1]
    rho = m.rho[idx]
    hits = np.nonzero((u2[:-1] > 0.5) & (u2[1:] <= 0.5))[0]
    hits = hits[hits > 0]   # a jump off the axis node is the point defect at the origin
    for k in hits[::-1]:
        # require the sign pattern to persist one node further on each side if available
        if k + 2 < len(u2) and u2[k + 2] > 0.5:
            continue
        t = (u2[k] - 0.5) / (u2[k] - u2[k + 1])
        return float(rho[k] + t * (rho[k + 1] - rho[k]))
    return None


def detect_ring(u: Field3, disk_radius: Optional[float] = None, loop_radius: Optional[float] = None,
                n_loop: int = 256, tol: float = 1e-6) -> Optional[RingInfo]:
    m = u.mesh
    rho0 = ring_crossing(u)
    if rho0 is None:
        return None
    dr = 4 * m.h if disk_radius is None else disk_radius
    lr = 8 * m.h if loop_radius is None else loop_radius
    if rho0 - lr <= 0.0 or rho0 + lr >= 1.0 - m.h:
        raise ValueError(f"winding loop of radius {lr:.4f} around rho0={rho0:.4f} leaves the domain")
    R, Z = m.coords()
    d = np.hypot(R - rho0, Z)
    near = (d > 0) & (d <= dr) & (m.node_class != NodeClass.OUTSIDE)
    tags = ordering_tags(u.values[near], tol)
    viol = float(np.mean(tags != ORDER_321)) if tags.size else 1.0
    psi = np.linspace(0.0, 2.0 * np.pi, n_loop, endpoint=False)
    v = sample(u, rho0 + lr * np.cos(psi), lr * np.sin(psi))
    w = line_field_winding(director_kappa(v))
    return RingInfo(rho0=rho0, ordering_ok=viol < 0.05, violation_fraction=viol,
                    winding_half_turns=w, kappa_quotient=_kappa_quotient(u, rho0))


def _kappa_quotient(u: Field3, rho0: float) -> Optional[float]:
    """One-sided difference quotient of the kappa angle just above (rho0, 0)."""
    h = u.mesh.h
    try:
        k = director_kappa(sample(u, [rho0, rho0], [h, 2 * h]))
    except ValueError:
        return None
    ang = np.arctan2(k[:, 1], k[:, 0])
    return float((ang[1] - ang[0]) / h)


# ---------------------------------------------------------------- dumbbell

@dataclass
class DumbbellInfo:
    z0: float
    delta: float
    half_width: float
    n_nodes: int
    violation_fraction: float
    ordering_ok: bool
    contour_ok: bool
    contour_kz: list = field(default_factory=list)


def dumbbell_half_width(delta: float, eps1: float) -> float:
    return math.sqrt(eps1 * (2.0 * delta - eps1))


def dumbbell_mask(mesh: Mesh, z0: float, delta: float, eps1: float) -> np.ndarray:
    R, Z = mesh.coords()
    w = dumbbell_half_width(delta, eps1)
    inside = (np.hypot(R, Z - z0) < delta) | ((R < w) & (Z <= z0))
    return inside & (R > 0.5 * mesh.h) & (mesh.node_class != NodeClass.OUTSIDE)


def right_contour(z0: float, delta: float, eps1: float, n: int = 400, rho_min: float = 0.0):
    """Points of the right boundary of the dumbbell, from bottom to top."""
    w = dumbbell_half_width(delta, eps1)
    a0 = math.asin(min(w / delta, 1.0))
    # lower disk: angle from -z direction, phi in (0, pi - a0)
    k = n // 3
    ph = np.linspace(0.0, math.pi - a0, k)
    lower = np.stack([delta * np.sin(ph), -z0 - delta * np.cos(ph)], axis=-1)
    zl = -z0 + delta * math.cos(a0)
    mid = np.stack([np.full(k, w), np.linspace(zl, -zl, k)], axis=-1)
    upper = np.stack([lower[::-1, 0], -lower[::-1, 1]], axis=-1)
    pts = np.concatenate([lower, mid[1:-1], upper])
    return pts[pts[:, 0] > rho_min]


def classify_dumbbell(u: Field3, crossings: list, delta: Optional[float] = None,
                      eps1: Optional[float] = None, tol: float = 1e-6) -> DumbbellInfo:
    """Check l3 > l1 > l2 on the dumbbell around the lowest axis singularity and its mirror."""
    if not crossings:
        raise ValueError("no axis singularity to build the dumbbell around")
    m = u.mesh
    delta = 6 * m.h if delta is None else delta
    eps1 = 2 * m.h if eps1 is None else eps1
    z0 = min(c.z for c in crossings)
    mask = dumbbell_mask(m, z0, delta, eps1)
    tags = ordering_tags(u.values[mask], tol)
    viol = float(np.mean(tags != ORDER_312)) if tags.size else 1.0
    pts = right_contour(z0, delta, eps1, rho_min=0.5 * m.h)
    k = director_kappa(sample(u, pts[:, 0], pts[:, 1]), check=False)
    ok = contour_sign_pattern_ok(k)
    kz = [float(k[0, 1]), float(k[len(k) // 2, 1]), float(k[-1, 1])]
    return DumbbellInfo(z0=z0, delta=delta, half_width=dumbbell_half_width(delta, eps1),
                        n_nodes=int(mask.sum()), violation_fraction=viol, ordering_ok=viol < 0.05,
                        contour_ok=ok, contour_kz=kz)


def contour_sign_pattern_ok(kappa: np.ndarray, zero_tol: float = 1e-8) -> bool:
    """kappa_z signs along the contour read -, ..., (0), ..., + with a single change,
    and the midpoint director is close to e_rho."""
    if np.any(~np.isfinite(kappa)):
        return False
    kz = kappa[:, 1]
    s = np.where(np.abs(kz) <= zero_tol, 0, np.sign(kz))
    if s[0] >= 0 or s[-1] <= 0:
        return False
    if np.any(np.diff(s) < 0):
        return False
    mid = kappa[len(kappa) // 2]
    return bool(mid[0] > 0.9)


# ---------------------------------------------------------------- tangent comparison

def tangent_map_distance(u: Field3, crossing: AxisCrossing, radius: Optional[float] = None,
                         n: int = 128) -> float:
    """RMS distance on a half circle around an axis singularity to the matching Lambda profile."""
    m = u.mesh
    r = 8 * m.h if radius is None else radius
    phi = np.linspace(0.0, np.pi, n)
    v = sample(u, r * np.sin(phi), crossing.z + r * np.cos(phi))
    s = 1.0 if crossing.label == "Lambda+" else -1.0
    ref = np.stack([np.zeros_like(phi), s * np.cos(phi), np.sin(phi)], axis=-1)
    return float(np.sqrt(np.mean(np.sum((v - ref) ** 2, axis=-1))))


# ---------------------------------------------------------------- report

@dataclass
class DefectReport:
    axis_crossings: list = field(default_factory=list)
    parity: int = 0
    alternating: bool = True
    ring_radius: Optional[float] = None
    ring_ordering_ok: Optional[bool] = None
    ring_violation_fraction: Optional[float] = None
    winding_half_turns: Optional[float] = None
    kappa_quotient: Optional[float] = None
    dumbbell_ordering_ok: Optional[bool] = None
    dumbbell_violation_fraction: Optional[float] = None
    dumbbell_contour_ok: Optional[bool] = None
    minus_one_interval: Optional[list] = None
    tangent_distances: list = field(default_factory=list)
    orderings: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "DefectReport":
        return cls(**d)


def minus_one_interval(u: Field3) -> Optional[tuple[float, float]]:
    """Longest run of axis nodes with u2 = -1 (z-range), if any."""
    m = u.mesh
    neg = (u.values[0, :, 1] < 0) & (m.node_class[0] != NodeClass.OUTSIDE)
    best, cur = None, None
    for j, f in enumerate(neg):
        if f:
            cur = (cur[0], j) if cur else (j, j)
            if best is None or cur[1] - cur[0] > best[1] - best[0]:
                best = cur
        else:
            cur = None
    if best is None:
        return None
    return float(m.z[best[0]]), float(m.z[best[1]])


def analyze(u: Field3, tol: float = 1e-6) -> DefectReport:
    """Run all detectors on a field; detectors that do not apply leave fields as None."""
    rep = DefectReport()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ResolutionWarning)
        crossings, alt = detect_axis_singularities(u)
    rep.warnings += [str(w.message) for w in caught]
    rep.axis_crossings = [asdict(c) for c in crossings]
    rep.parity = len(crossings)
    rep.alternating = alt
    iv = minus_one_interval(u)
    rep.minus_one_interval = list(iv) if iv else None
    rep.tangent_distances = [tangent_map_distance(u, c) for c in crossings
                             if c.z + 8 * u.mesh.h < 1.0]
    try:
        ring = detect_ring(u, tol=tol)
    except ValueError as exc:
        ring = None
        rep.warnings.append(str(exc))
    if ring is not None:
        rep.ring_radius = ring.rho0
        rep.ring_ordering_ok = ring.ordering_ok
        rep.ring_violation_fraction = ring.violation_fraction
        rep.winding_half_turns = ring.winding_half_turns
        rep.kappa_quotient = ring.kappa_quotient
    if crossings:
        db = classify_dumbbell(u, crossings, tol=tol)
        rep.dumbbell_ordering_ok = db.ordering_ok
        rep.dumbbell_violation_fraction = db.violation_fraction
        rep.dumbbell_contour_ok = db.contour_ok
    tags = ordering_tags(u.values[u.mesh.free], tol)
    rep.orderings = {k or "uniaxial": int(np.sum(tags == k)) for k in ("", ORDER_321, ORDER_312, "other")}
    return rep


# ---------------------------------------------------------------- reduced functional

def reduced_map_u_from_v(v) -> np.ndarray:
    """u^v = (sqrt3 (1 - v1)/4, (1 + 3 v1)/4, sqrt3 v2 / 2)."""
    v = np.asarray(v, dtype=float)
    v1, v2 = v[..., 0], v[..., 1]
    return np.stack([SQRT3 * (1.0 - v1) / 4.0, (1.0 + 3.0 * v1) / 4.0, SQRT3 * v2 / 2.0], axis=-1)


def boundary_v(rho, z) -> np.ndarray:
    """F_2 boundary data (z^2 - rho^2, 2 rho z) on the unit sphere (normalized off it)."""
    rho = np.asarray(rho, dtype=float)
    z = np.asarray(z, dtype=float)
    r2 = rho**2 + z**2
    r2 = np.where(r2 > 0, r2, 1.0)
    out = np.stack([(z**2 - rho**2) / r2, 2.0 * rho * z / r2], axis=-1)
    out[(rho == 0) & (z == 0)] = (1.0, 0.0)
    return out


def reduced_energy_F(mesh: Mesh, v: np.ndarray) -> float:
    """F[v] = int_{B1+} |grad v|^2 + (2/rho^2)(1 - v1), same quadrature as the energy.

    ``v`` has shape mesh.shape + (2,).  Value is the 3-D integral over the
    upper half ball, so E[u^v] (full ball, mu = 0) = 3/2 F[v] for unit v.
    """
    from .energy import discrete_energy
    de = discrete_energy(mesh)
    v = np.asarray(v, dtype=float)
    dr = v[1:] - v[:-1]
    dz = v[:, 1:] - v[:, :-1]
    dirichlet = np.sum(de.w_rho * np.sum(dr * dr, axis=-1)) + np.sum(de.w_z * np.sum(dz * dz, axis=-1))
    singular = np.sum(de.m_sing * 2.0 * (1.0 - v[..., 0]))
    return float(0.5 * (dirichlet + singular))  # BALL_FACTOR counts both halves


def lift_angle(v) -> np.ndarray:
    """alpha with v = (cos 2 alpha, sin 2 alpha), alpha in [0, pi/2] for v2 >= 0."""
    v = np.asarray(v, dtype=float)
    return 0.5 * np.arctan2(v[..., 1], v[..., 0]) % np.pi
