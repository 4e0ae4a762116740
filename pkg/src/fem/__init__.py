"""
FEM Module

Linear elasticity on regular voxel grids: element stiffness, assembly with
linear Dirichlet boundary displacements, CG and direct solvers, and bulk
modulus homogenization.
"""

from .assembly import (
    FemSystem,
    assemble,
    element_materials,
    hydrostatic_strain,
    minimum_modulus,
)

from .homogenization import (
    FemSolution,
    active_trace,
    average_stress,
    bulk_modulus,
    homogenize,
    modulus_from_stress,
    phase_bulk_modulus,
    voigt_reuss_bounds,
)

from .mesh import (
    MeshTopology,
    element_stiffness,
    get_mesh,
    lame_parameters,
    stiffness_parts,
)

from .solver import (
    conjugate_gradient,
    resolve_method,
    solve,
    solve_reduced,
)

__all__ = [
    # Mesh
    "MeshTopology",
    "element_stiffness",
    "get_mesh",
    "lame_parameters",
    "stiffness_parts",
    # Assembly
    "FemSystem",
    "assemble",
    "element_materials",
    "hydrostatic_strain",
    "minimum_modulus",
    # Solvers
    "conjugate_gradient",
    "resolve_method",
    "solve",
    "solve_reduced",
    # Homogenization
    "FemSolution",
    "active_trace",
    "average_stress",
    "bulk_modulus",
    "homogenize",
    "modulus_from_stress",
    "phase_bulk_modulus",
    "voigt_reuss_bounds",
]
