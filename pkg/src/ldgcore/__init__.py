"""Limiting Landau-de Gennes energy on axially symmetric unit fields: discretization,
constrained minimization, defect analysis and the tangent-map ODE."""
from .mesh import Mesh, NodeClass, build_mesh, gradient_stencil
from .fields import (Field3, augment_L, hedgehog_U_star, hedgehog_field, potential_P, potential_S,
                     potential_F_a, compute_D_a, q_from_u, H_plus)
from .energy import EnergyReport, energy, energy_gradient, localized_energy, euler_lagrange_residual
from .optimizer import (Branch, ObstacleSpec, SolverConfig, initial_guess, project_constraints,
                        minimize, sweep)
from .analysis import (EigenTriple, DefectReport, eigenvalues, classify_phase, director_kappa,
                       detect_axis_singularities, detect_ring, classify_dumbbell, analyze,
                       reduced_map_u_from_v, reduced_energy_F)
from .tangent import TangentProfile, profile, lambda_pm, ode_residual, first_integral_deviation, \
    profile_energy, hessian_radial, kappa_tangent_formulas

__version__ = "0.1.0"
