"""
Sensitivity Module

Objectives J1/J2 and their adjoint gradients with respect to per-element
material channels, plus a finite-difference oracle.
"""

from .adjoint import (
    GradCheckReport,
    GridGradient,
    adjoint_gradient,
    evaluate_objective,
    finite_difference_gradient,
    gradient_check,
)

from .objective import ObjectiveSpec, mean_density, objective

__all__ = [
    # Objectives
    "ObjectiveSpec",
    "mean_density",
    "objective",
    # Gradients
    "GradCheckReport",
    "GridGradient",
    "adjoint_gradient",
    "evaluate_objective",
    "finite_difference_gradient",
    "gradient_check",
]
