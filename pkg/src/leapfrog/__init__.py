"""Leapfrogging vortex pairs.

Point-vortex orbits of two co-axial pairs, desingularized patch boundaries
built on those orbits, and the monodromy / small-divisor analysis of the
linearized boundary equation.
"""

from .numerics import BoundaryField, DegenerateModeError, IntegrationError, elliptic_E, elliptic_K
from .pointvortex import (
    ActionAngleState,
    OrbitTrajectory,
    PairState,
    PolarOrbit,
    VortexParams,
    frequency,
    hamiltonian,
    integrate_orbit,
    period_closed_form,
    period_numeric,
    period_quadrature,
    solve_q_theta,
)
from .contour import (
    ApproxSolution,
    PatchGeometry,
    G_residual,
    approx_solution,
    g0_series,
    psi_eval,
    simulate_patches,
    patch_diagnostics,
)
from .monodromy import (
    DivisorScan,
    ModeOneSystem,
    MonodromyReport,
    a0_reference,
    build_system,
    cantor_measure,
    fundamental_matrix,
    singular_scan,
    solve_mode_one,
)

__version__ = "0.1.0"

__all__ = [
    "ActionAngleState", "ApproxSolution", "BoundaryField", "DegenerateModeError", "DivisorScan",
    "G_residual", "IntegrationError", "ModeOneSystem", "MonodromyReport", "OrbitTrajectory", "PairState",
    "PatchGeometry", "PolarOrbit", "VortexParams", "a0_reference", "approx_solution", "build_system",
    "cantor_measure", "elliptic_E", "elliptic_K", "frequency", "fundamental_matrix", "g0_series",
    "hamiltonian", "integrate_orbit", "patch_diagnostics", "period_closed_form", "period_numeric",
    "period_quadrature", "psi_eval", "simulate_patches", "singular_scan", "solve_mode_one", "solve_q_theta",
]
