"""
The hedgehog, its instability, and the tangent maps
===================================================

The radial hedgehog U* is the reference configuration: unit length,
on the maximum of the cubic potential, with limiting energy 24 pi.
It is a critical point but not a minimizer -- the radial second
variation is negative along concentrated tents.  The blow-ups at axis
singularities are the Lambda maps, each carrying energy 8 pi on B_1.
"""
import numpy as np

from ldgcore import tangent
from ldgcore.energy import energy, euler_lagrange_residual
from ldgcore.fields import hedgehog_field, potential_P
from ldgcore.mesh import build_mesh

# %%
# Discrete energy of U* converges to 24 pi (first order: the quadrature
# cuts the disk with square cells).
for n in (32, 64, 128, 256):
    e = energy(hedgehog_field(build_mesh(n)), mu=10.0)
    print(f"n={n:4d}  E[U*]/pi = {e.total / np.pi:9.5f}   potential part {e.potential:.1e}")

# %%
# U* is critical: the strong-form residual away from the origin decays
# like h^2.
for n in (32, 64, 128):
    r = euler_lagrange_residual(hedgehog_field(build_mesh(n)), 10.0, r_min=0.25)
    print(f"n={n:4d}  residual L2 = {r.l2:.2e}")

# %%
# Second variation along the radial direction f(r) (0, 1, 0)-type
# perturbation.  The tent max(1 - lam r, 0) destabilizes once lam exceeds
# the critical slope; a bump vanishing at both ends does not at mu = 0.
mu = 10.0
print("critical tent slope at mu=10:", round(tangent.critical_tent_slope(mu), 4))
for lam in (1, 2, 3, 5):
    r, f = tangent.tent(lam)
    print(f"lam={lam}  hessian = {tangent.hessian_radial(f, mu, r):+.4f}"
          f"   (closed form {tangent.tent_hessian_exact(lam, mu):+.4f})")
r = np.linspace(0, 1, 10001)
print("bump r(1-r), mu=0:", round(tangent.hessian_radial(r * (1 - r), 0.0, r), 5))

# %%
# Tangent maps: closed-form profiles of the equivariant ODE.
for p in (tangent.lambda_pm(1), tangent.profile("II", 1.0), tangent.profile("III", 1.0),
          tangent.profile("III", np.pi / 2)):
    _, eb = tangent.profile_energy(p)
    print(f"class {p.cls:3s} beta={p.beta!s:>20}  residual {tangent.ode_residual(p):.1e}"
          f"  B1 energy/pi {eb / np.pi:.6f}")

# %%
# Shooting from the small-angle expansion recovers Class II with slope tan(beta/2).
print(tangent.shooting_check(1.0))
