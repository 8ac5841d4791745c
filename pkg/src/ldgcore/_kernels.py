"""Compiled inner loops for the solver.

Same discretization as energy.DiscreteEnergy (which stays the reference
implementation); loops run in a fixed order so results are reproducible.
"""
import math

import numba as nb
import numpy as np

_SQ3 = math.sqrt(3.0)
_SQ2 = math.sqrt(2.0)

# node class codes, mirror mesh.NodeClass
_INTERIOR, _AXIS, _EQUATOR = 0, 1, 2


@nb.njit(cache=True, inline="always")
def _P(a, b, c):
    return -b * a * a + 0.5 * _SQ3 * a * c * c + b * b * b / 3.0 + 0.5 * b * c * c


@nb.njit(cache=True)
def value(V, w_rho, w_z, m_sing, m_pot, mu):
    n1, n2 = V.shape[0], V.shape[1]
    e = 0.0
    for i in range(n1):
        for j in range(n2):
            a, b, c = V[i, j, 0], V[i, j, 1], V[i, j, 2]
            e += m_sing[i, j] * (4.0 * a * a + c * c)
            if mu != 0.0:
                e += _SQ2 * mu * m_pot[i, j] * (1.0 - 3.0 * _P(a, b, c))
            if i + 1 < n1:
                d0 = V[i + 1, j, 0] - a
                d1 = V[i + 1, j, 1] - b
                d2 = V[i + 1, j, 2] - c
                e += w_rho[i, j] * (d0 * d0 + d1 * d1 + d2 * d2)
            if j + 1 < n2:
                d0 = V[i, j + 1, 0] - a
                d1 = V[i, j + 1, 1] - b
                d2 = V[i, j + 1, 2] - c
                e += w_z[i, j] * (d0 * d0 + d1 * d1 + d2 * d2)
    return e


@nb.njit(cache=True)
def gradient(V, w_rho, w_z, m_sing, m_pot, mu, free, G):
    n1, n2 = V.shape[0], V.shape[1]
    G[:] = 0.0
    for i in range(n1):
        for j in range(n2):
            a, b, c = V[i, j, 0], V[i, j, 1], V[i, j, 2]
            G[i, j, 0] += 8.0 * m_sing[i, j] * a
            G[i, j, 2] += 2.0 * m_sing[i, j] * c
            if mu != 0.0:
                k = -3.0 * _SQ2 * mu * m_pot[i, j]
                G[i, j, 0] += k * (-2.0 * a * b + 0.5 * _SQ3 * c * c)
                G[i, j, 1] += k * (-a * a + b * b + 0.5 * c * c)
                G[i, j, 2] += k * (_SQ3 * a * c + b * c)
            if i + 1 < n1:
                w = 2.0 * w_rho[i, j]
                for q in range(3):
                    f = w * (V[i + 1, j, q] - V[i, j, q])
                    G[i + 1, j, q] += f
                    G[i, j, q] -= f
            if j + 1 < n2:
                w = 2.0 * w_z[i, j]
                for q in range(3):
                    f = w * (V[i, j + 1, q] - V[i, j, q])
                    G[i, j + 1, q] += f
                    G[i, j, q] -= f
    for i in range(n1):
        for j in range(n2):
            if not free[i, j]:
                G[i, j, 0] = 0.0
                G[i, j, 1] = 0.0
                G[i, j, 2] = 0.0


@nb.njit(cache=True)
def project_step(V, P, t, cls, free, lo, hi, sector, out):
    """out = projection of V + t P onto the constraint set (fixed nodes copied)."""
    n1, n2 = V.shape[0], V.shape[1]
    for i in range(n1):
        for j in range(n2):
            a = V[i, j, 0]
            b = V[i, j, 1]
            c = V[i, j, 2]
            if not free[i, j]:
                out[i, j, 0] = a
                out[i, j, 1] = b
                out[i, j, 2] = c
                continue
            a += t * P[i, j, 0]
            b += t * P[i, j, 1]
            c += t * P[i, j, 2]
            k = cls[i, j]
            if k == _AXIS:
                s = -1.0 if b < 0.0 else 1.0
                if i == 0 and j == 0 and not (lo <= s <= hi):
                    s = -s
                out[i, j, 0] = 0.0
                out[i, j, 1] = s
                out[i, j, 2] = 0.0
            elif k == _EQUATOR:
                r = math.hypot(a, b)
                u2 = b / r if r > 0.0 else b
                u2 = min(max(u2, lo), hi)
                out[i, j, 0] = math.sqrt(max(1.0 - u2 * u2, 0.0))
                out[i, j, 1] = u2
                out[i, j, 2] = 0.0
            else:
                if sector:
                    a = abs(a)
                    c = abs(c)
                r = math.sqrt(a * a + b * b + c * c)
                if r > 0.0:
                    a /= r
                    b /= r
                    c /= r
                out[i, j, 0] = a
                out[i, j, 1] = b
                out[i, j, 2] = c


@nb.njit(cache=True)
def projected_gradient(V, G, cls, movable, lo, hi, sector, out):
    """Tangential gradient restricted to feasible directions; returns sup |g|/mass later."""
    n1, n2 = V.shape[0], V.shape[1]
    for i in range(n1):
        for j in range(n2):
            if not movable[i, j]:
                out[i, j, 0] = 0.0
                out[i, j, 1] = 0.0
                out[i, j, 2] = 0.0
                continue
            a, b, c = V[i, j, 0], V[i, j, 1], V[i, j, 2]
            g0, g1, g2 = G[i, j, 0], G[i, j, 1], G[i, j, 2]
            if cls[i, j] == _EQUATOR:
                s = g0 * b - g1 * a          # component along (u2, -u1, 0)
                g0, g1, g2 = s * b, -s * a, 0.0
                if (b <= lo and g1 > 0.0) or (b >= hi and g1 < 0.0) or (a <= 0.0 and g0 > 0.0):
                    g0 = g1 = 0.0
            else:
                d = g0 * a + g1 * b + g2 * c
                g0 -= d * a
                g1 -= d * b
                g2 -= d * c
                if sector:
                    if a <= 0.0 and g0 > 0.0:
                        g0 = 0.0
                    if c <= 0.0 and g2 > 0.0:
                        g2 = 0.0
            out[i, j, 0] = g0
            out[i, j, 1] = g1
            out[i, j, 2] = g2
