"""Equivariant harmonic-map ODE on [0, pi]: closed-form profiles, residuals,
energies, limiting directors and the radial Hessian forms at U*."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import simpson, solve_ivp
from scipy.optimize import brentq

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
ENDPOINT_EXCLUSION = 1e-3


@dataclass
class TangentProfile:
    phi: np.ndarray
    v: np.ndarray                  # (m, 3)
    cls: str                       # "I", "II", "III", "NUMERIC"
    beta: Optional[float] = None
    variant: int = 1               # +1 / -1 : the two sign choices

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.v.shape != (len(self.phi), 3):
            raise ValueError("v must have shape (len(phi), 3)")


def J(phi):
    """J(phi) = arccos(2 cos(phi) / (1 + cos^2(phi))).

    Evaluated as pi/2 - 2 arctan(cos phi), which is the same function without
    the cancellation of arccos near the endpoints."""
    return 0.5 * np.pi - 2.0 * np.arctan(np.cos(phi))


def _grid(m: int) -> np.ndarray:
    return np.linspace(0.0, np.pi, m)


def profile(cls: str, beta: Optional[float] = None, variant: int = 1, m: int = 10001) -> TangentProfile:
    """Closed-form tangent-map profile.

    I  : (0, +-1, 0)
    II : (0, (cos b +- cos p)/(1 +- cos b cos p), sin b sin p/(1 +- cos b cos p))
    III: (sin b sin J/(1 +- cos b cos J), (cos b +- cos J)/(1 +- cos b cos J), 0)
    """
    if variant not in (1, -1):
        raise ValueError("variant must be +1 or -1")
    phi = _grid(m)
    s = float(variant)
    if cls == "I":
        v = np.zeros((m, 3))
        v[:, 1] = s
        return TangentProfile(phi, v, "I", None, variant)
    if cls not in ("II", "III"):
        raise ValueError(f"unknown class {cls!r}")
    if beta is None or not 0.0 < beta < np.pi:
        raise ValueError("beta must lie in (0, pi)")
    cb, sb = math.cos(beta), math.sin(beta)
    t = phi if cls == "II" else J(phi)
    den = 1.0 + s * cb * np.cos(t)
    a = (cb + s * np.cos(t)) / den
    b = sb * np.sin(t) / den
    v = np.zeros((m, 3))
    if cls == "II":
        v[:, 1], v[:, 2] = a, b
    else:
        v[:, 0], v[:, 1] = b, a
    return TangentProfile(phi, v, cls, float(beta), variant)


def lambda_pm(sign: int = 1, m: int = 10001) -> TangentProfile:
    """Lambda+ (sign=+1): v = (0, cos p, sin p); Lambda-: (0, -cos p, sin p)."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    phi = _grid(m)
    v = np.stack([np.zeros(m), sign * np.cos(phi), np.sin(phi)], axis=-1)
    return TangentProfile(phi, v, "II", math.pi / 2, sign)


def _derivatives(p: TangentProfile):
    """Fourth-order first and second derivatives (one-sided 5-point near the ends)."""
    v, h = p.v, p.phi[1] - p.phi[0]
    d1 = np.empty_like(v)
    d2 = np.empty_like(v)
    d1[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
    d2[2:-2] = (-v[:-4] + 16 * v[1:-3] - 30 * v[2:-2] + 16 * v[3:-1] - v[4:]) / (12 * h * h)
    c1 = np.array([-25, 48, -36, 16, -3]) / (12 * h)
    c2 = np.array([35, -104, 114, -56, 11]) / (12 * h * h)
    for k in (0, 1):
        d1[k] = c1 @ v[k:k + 5]
        d2[k] = c2 @ v[k:k + 5]
        d1[-1 - k] = -(c1 @ v[::-1][k:k + 5])
        d2[-1 - k] = c2 @ v[::-1][k:k + 5]
    return d1, d2


def _interior(p: TangentProfile, excl: float = ENDPOINT_EXCLUSION):
    return (p.phi > excl) & (p.phi < np.pi - excl)


def ode_residual(p: TangentProfile, excl: float = ENDPOINT_EXCLUSION) -> float:
    """max |-(sin v')' + (4v1, 0, v3)/sin - (|v'|^2 sin + (4v1^2 + v3^2)/sin) v|."""
    if len(p.phi) < 1000:
        raise ValueError("need at least 1000 samples")
    d1, d2 = _derivatives(p)
    k = _interior(p, excl)
    phi, v, d1, d2 = p.phi[k], p.v[k], d1[k], d2[k]
    s, c = np.sin(phi)[:, None], np.cos(phi)[:, None]
    lin = np.stack([4 * v[:, 0], np.zeros(len(v)), v[:, 2]], axis=-1) / s
    lam = np.sum(d1 * d1, axis=-1, keepdims=True) * s + (4 * v[:, :1] ** 2 + v[:, 2:] ** 2) / s
    res = -(c * d1 + s * d2) + lin - lam * v
    return float(np.abs(res).max())


def first_integral_deviation(p: TangentProfile, excl: float = ENDPOINT_EXCLUSION) -> float:
    """max | |v'|^2 sin^2 - (4 v1^2 + v3^2) |."""
    d1, _ = _derivatives(p)
    k = _interior(p, excl)
    v = p.v[k]
    lhs = np.sum(d1[k] ** 2, axis=-1) * np.sin(p.phi[k]) ** 2
    return float(np.abs(lhs - 4 * v[:, 0] ** 2 - v[:, 2] ** 2).max())


def e2_density(p: TangentProfile) -> np.ndarray:
    d1, _ = _derivatives(p)
    s = np.sin(p.phi)
    num = 4 * p.v[:, 0] ** 2 + p.v[:, 2] ** 2
    sing = np.divide(num, s, out=np.zeros_like(s), where=s > 1e-300)
    return np.sum(d1 * d1, axis=-1) * s + sing


def profile_energy(p: TangentProfile) -> tuple[float, float]:
    """(E2, 2 pi E2); the second is the Dirichlet energy of the 0-homogeneous map on B_1."""
    e2 = float(simpson(e2_density(p), x=p.phi))
    return e2, 2.0 * math.pi * e2


# ------------------------------------------------------------------ Hessians at U*

def _radial_terms(f, r):
    f = np.asarray(f, dtype=float)
    r = np.linspace(0.0, 1.0, len(f)) if r is None else np.asarray(r, dtype=float)
    if abs(f[-1]) > 1e-12 or abs(r[-1] - 1.0) > 1e-12:
        raise ValueError("f must vanish at r = 1 (samples on [0, 1])")
    df = np.gradient(f, r, edge_order=2)
    return (simpson(df * df * r * r, x=r), simpson(f * f, x=r), simpson(f * f * r * r, x=r))


def hessian_radial(f, mu: float, r=None) -> float:
    """Second variation of E_mu at U* along the radial perturbation P_f.

    (32 pi/5) [int f'^2 r^2 - 3 int f^2] + (72 sqrt2/5) pi mu int f^2 r^2.
    """
    a, b, c = _radial_terms(f, r)
    return float(32.0 * math.pi / 5.0 * (a - 3.0 * b) + 72.0 * SQRT2 / 5.0 * math.pi * mu * c)


def hessian_class3(p: TangentProfile, f, r=None) -> float:
    """(1/2pi) second variation at a Class III map along f(r) sin(alpha) (0,0,0,cos,sin):
    int_0^pi sin^2(alpha) sin(phi) * [int f'^2 r^2 - 3 int f^2], alpha = arccos v2."""
    a, b, _ = _radial_terms(f, r)
    ang = simpson((1.0 - p.v[:, 1] ** 2) * np.sin(p.phi), x=p.phi)
    return float(ang * (a - 3.0 * b))


def tent(lam: float, m: int = 20001):
    """(r, max(1 - lam r, 0))."""
    r = np.linspace(0.0, 1.0, m)
    return r, np.maximum(1.0 - lam * r, 0.0)


def tent_hessian_exact(lam: float, mu: float) -> float:
    """Closed form of hessian_radial for the tent with lam >= 1."""
    return -64.0 * math.pi / (15.0 * lam) + 72.0 * SQRT2 * math.pi * mu / (150.0 * lam**3)


def critical_tent_slope(mu: float) -> float:
    """Slope above which the tent direction is unstable: lam^2 > 9 sqrt2 mu / 80."""
    return math.sqrt(9.0 * SQRT2 * mu / 80.0)


# ------------------------------------------------------------------ limiting directors

def kappa_tangent_formulas(phi: float, which: str, varkappa: float = 0.0) -> np.ndarray:
    """Limiting director (e_rho, e_z coefficients) around the ring or the split-core ends.

    ring       : phi in [-pi, pi], needs varkappa >= 0
    split_plus : polar angle about x0+, phi in [0, pi]
    split_minus: polar angle about x0-, phi in [0, pi]
    """
    if which == "ring":
        if varkappa < 0:
            raise ValueError("varkappa must be non-negative")
        if not -math.pi <= phi <= math.pi:
            raise ValueError("ring angle must lie in [-pi, pi]")
        if phi == -math.pi:
            return np.array([0.0, -1.0])
        if phi == 0.0:
            return np.array([1.0, 0.0])
        if phi == math.pi:
            return np.array([0.0, 1.0])
        ct = math.cos(phi) / math.sin(phi)
        q = 4.0 + varkappa**2 * ct * ct
        s = 1.0 if phi > 0 else -1.0
        x, sq = s * varkappa * ct, math.sqrt(q)
        # 1 + x/sqrt(q); for x < 0 use sqrt(q) + x = 4 / (sqrt(q) - x)
        g = 1.0 + x / sq if x >= 0 else 4.0 / (sq * (sq - x))
        return np.array([SQRT2 / 2 * math.sqrt(g), s * math.sqrt(2.0 / q) / math.sqrt(g)])
    if not 0.0 <= phi <= math.pi:
        raise ValueError("polar angle must lie in [0, pi]")
    q = 3.0 + math.sin(phi) ** 2
    if which == "split_plus":
        if phi == 0.0:
            return np.array([0.0, 1.0])
        g = 1.0 - SQRT3 * math.cos(phi) / math.sqrt(q)
        return np.array([SQRT2 / 2 * math.sqrt(g),
                         math.sqrt(2.0 * math.sin(phi) ** 2 / q) / math.sqrt(g)])
    if which == "split_minus":
        if phi == math.pi:
            return np.array([0.0, -1.0])
        g = 1.0 + SQRT3 * math.cos(phi) / math.sqrt(q)
        return np.array([SQRT2 / 2 * math.sqrt(g),
                         -math.sqrt(2.0 * math.sin(phi) ** 2 / q) / math.sqrt(g)])
    raise ValueError(f"unknown formula {which!r}")


# ------------------------------------------------------------------ shooting

def _rhs(phi, y):
    v, dv = y[:3], y[3:]
    s, c = math.sin(phi), math.cos(phi)
    lam = (dv @ dv) * s + (4 * v[0] ** 2 + v[2] ** 2) / s
    lin = np.array([4 * v[0], 0.0, v[2]]) / s
    return np.concatenate([dv, (-c * dv + lin - lam * v) / s])


def shoot(slope: float, phi0: float = 1e-3, phi1: float = math.pi / 2, rtol: float = 1e-12,
          dense: bool = False):
    """Integrate the ODE from phi0 with the small-angle data of (0, cos a, sin a), a ~ slope*phi."""
    a0 = 2.0 * math.atan(slope * math.tan(phi0 / 2))
    da0 = slope * (1 + math.tan(phi0 / 2) ** 2) / (1 + (slope * math.tan(phi0 / 2)) ** 2)
    y0 = np.array([0.0, math.cos(a0), math.sin(a0), 0.0, -math.sin(a0) * da0, math.cos(a0) * da0])
    return solve_ivp(_rhs, (phi0, phi1), y0, method="DOP853", rtol=rtol, atol=1e-13,
                     dense_output=dense)


def shooting_check(beta: float = 1.0, m: int = 2001) -> dict:
    """Recover the Class II profile by shooting: the initial slope is tuned so that
    v2(pi/2) matches the target, then the trajectory is compared on [1e-3, pi - 1e-3]."""
    target = profile("II", beta, 1, m)
    v2_mid = math.cos(beta)  # closed form at phi = pi/2
    f = lambda c: shoot(c).y[1, -1] - v2_mid
    c = brentq(f, 1e-3, 1e3, xtol=1e-14)
    sol = shoot(c, phi1=math.pi - 1e-3, dense=True)
    k = _interior(target)
    dev = float(np.abs(sol.sol(target.phi[k])[:3].T - target.v[k]).max())
    return {"beta": beta, "slope": c, "slope_expected": math.tan(beta / 2), "max_deviation": dev}


def to_csv(p: TangentProfile, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["phi", "v1", "v2", "v3"])
        for phi, v in zip(p.phi, p.v):
            w.writerow([repr(float(phi))] + [repr(float(x)) for x in v])
