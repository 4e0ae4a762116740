"""
Adjoint Sensitivities

Gradient of J with respect to every element's material channels. The
forward solve gives K; one adjoint solve with the same (symmetric) matrix
gives the implicit dependence through the displacement field, including the
coupling through the eliminated Dirichlet DOFs.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import InputValidationError
from ..fem import FemSolution, active_trace, element_materials, homogenize, solve_reduced
from ..fem.solver import SolverMethod
from ..materials import NORMALIZED_SCALE
from .objective import ObjectiveSpec, objective

logger = logging.getLogger(__name__)


@dataclass
class GridGradient:
    """Per-element dJ/d(E, nu, rho), shaped like the grid."""
    values: np.ndarray = field(repr=False)
    J: float
    K: float
    normalized: bool

    @property
    def E(self) -> np.ndarray:
        return self.values[..., 0]

    @property
    def nu(self) -> np.ndarray:
        return self.values[..., 1]

    @property
    def rho(self) -> np.ndarray:
        return self.values[..., 2]


def _lame_derivatives(E: np.ndarray, nu: np.ndarray) -> tuple[np.ndarray, ...]:
    """(dlam/dE, dmu/dE, dlam/dnu, dmu/dnu) per element."""
    denominator = (1.0 + nu) * (1.0 - 2.0 * nu)
    dlam_dE = nu / denominator
    dmu_dE = 1.0 / (2.0 * (1.0 + nu))
    dlam_dnu = E * (1.0 + 2.0 * nu ** 2) / denominator ** 2
    dmu_dnu = -E / (2.0 * (1.0 + nu) ** 2)
    return dlam_dE, dmu_dE, dlam_dnu, dmu_dnu


def adjoint_gradient(
    grid: np.ndarray,
    spec: ObjectiveSpec,
    strain: Optional[np.ndarray] = None,
    normalized: bool = True,
    relaxed: bool = True,
    method: Optional[SolverMethod] = None,
    solution: Optional[FemSolution] = None,
) -> GridGradient:
    """
    Objective gradient by the adjoint method.

    Args:
        grid: Normalized grid of shape (*shape, 3)
        spec: Objective definition
        strain: Applied strain (hydrostatic default)
        normalized: Gradient with respect to normalized channels (else physical)
        relaxed: Floor E on relaxed grids instead of raising
        method: Solver selection (settings default)
        solution: Reuse a forward solution of the same grid

    Returns:
        GridGradient of shape grid.shape
    """
    grid = np.asarray(grid, dtype=np.float64)
    if solution is None or solution.system is None:
        solution = homogenize(grid, strain, method=method, relaxed=relaxed)
    system = solution.system
    mesh = system.mesh

    J = objective(spec, solution.K, grid)
    gradient = np.zeros((mesh.n_elements, 3))
    residual = solution.K - spec.K_star

    if spec.density_weight:
        gradient[:, 2] = spec.density_weight / mesh.n_elements

    if residual != 0.0:
        d = mesh.dims
        # K = sum_e (lam_e d s.u_e + 2 mu_e c.u_e) / (8 N_e d tr eps)
        scale = 1.0 / (8.0 * mesh.n_elements * d * active_trace(solution.applied_strain, d))
        ue = solution.u[mesh.element_dofs]
        normal_part = ue @ mesh.normal_sum
        active_part = ue @ mesh.active_sum
        dK_dlam = scale * d * normal_part
        dK_dmu = scale * 2.0 * active_part

        dK_du = scale * (
            d * system.lam[:, None] * mesh.normal_sum + 2.0 * system.mu[:, None] * mesh.active_sum
        )
        g = np.bincount(mesh.element_dofs.ravel(), weights=dK_du.ravel(), minlength=mesh.n_dofs)
        adjoint = np.zeros(mesh.n_dofs)
        adjoint[mesh.free] = solve_reduced(system, 2.0 * residual * g[mesh.free], method)
        pe = adjoint[mesh.element_dofs]

        dJ_dlam = 2.0 * residual * dK_dlam - np.einsum("ei,ij,ej->e", pe, mesh.K_lambda, ue)
        dJ_dmu = 2.0 * residual * dK_dmu - np.einsum("ei,ij,ej->e", pe, mesh.K_mu, ue)

        # Floors and caps of the assembly pass the gradient straight through
        E, nu, _ = element_materials(grid, relaxed=relaxed)
        dlam_dE, dmu_dE, dlam_dnu, dmu_dnu = _lame_derivatives(E, nu)
        gradient[:, 0] = dJ_dlam * dlam_dE + dJ_dmu * dmu_dE
        gradient[:, 1] = dJ_dlam * dlam_dnu + dJ_dmu * dmu_dnu

    if normalized:
        gradient = gradient * NORMALIZED_SCALE

    if not np.all(np.isfinite(gradient)):
        raise InputValidationError("Objective gradient is not finite")
    return GridGradient(values=gradient.reshape(grid.shape), J=J, K=solution.K, normalized=normalized)


# =============================================================================
# Finite-difference oracle
# =============================================================================

@dataclass
class GradCheckReport:
    """Adjoint versus central finite differences."""
    max_rel_error: float
    max_abs_error: float
    n_components: int
    passed: bool
    worst_component: Optional[tuple[int, int]] = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "max_rel_error": self.max_rel_error,
            "max_abs_error": self.max_abs_error,
            "n_components": self.n_components,
            "passed": self.passed,
            "worst_component": list(self.worst_component) if self.worst_component else None,
            **self.details,
        }


def evaluate_objective(
    grid: np.ndarray,
    spec: ObjectiveSpec,
    strain: Optional[np.ndarray] = None,
    method: Optional[SolverMethod] = "direct",
    relaxed: bool = True,
) -> float:
    """J of a grid (one forward solve)."""
    solution = homogenize(grid, strain, method=method, relaxed=relaxed)
    return objective(spec, solution.K, grid)


def finite_difference_gradient(
    grid: np.ndarray,
    spec: ObjectiveSpec,
    step: float = 1e-4,
    strain: Optional[np.ndarray] = None,
    normalized: bool = True,
    elements: Optional[Sequence[int]] = None,
    channels: Sequence[int] = (0, 1, 2),
    method: Optional[SolverMethod] = "direct",
) -> np.ndarray:
    """
    Central differences of J in normalized channel units.

    Args:
        grid: Normalized grid
        spec: Objective definition
        step: Perturbation in normalized units
        strain: Applied strain
        normalized: Report per normalized unit (else per physical unit)
        elements: Flat element indices to probe (all by default)
        channels: Channels to probe
        method: Solver selection

    Returns:
        Array shaped like the grid; unprobed components are NaN
    """
    grid = np.asarray(grid, dtype=np.float64)
    flat = grid.reshape(-1, 3)
    elements = range(flat.shape[0]) if elements is None else elements
    result = np.full(flat.shape, np.nan)

    for element in elements:
        for channel in channels:
            plus = flat.copy()
            minus = flat.copy()
            plus[element, channel] += step
            minus[element, channel] -= step
            J_plus = evaluate_objective(plus.reshape(grid.shape), spec, strain, method)
            J_minus = evaluate_objective(minus.reshape(grid.shape), spec, strain, method)
            result[element, channel] = (J_plus - J_minus) / (2.0 * step)

    if not normalized:
        result = result / NORMALIZED_SCALE
    return result.reshape(grid.shape)


def gradient_check(
    grid: np.ndarray,
    spec: ObjectiveSpec,
    step: float = 1e-4,
    rel_tol: float = 1e-4,
    small: float = 1e-12,
    abs_tol: float = 1e-10,
    strain: Optional[np.ndarray] = None,
    elements: Optional[Sequence[int]] = None,
) -> GradCheckReport:
    """
    Compare adjoint and finite-difference gradients component-wise.

    Components where both values are below ``small`` in magnitude must agree
    to ``abs_tol``; all others to relative error ``rel_tol``.

    Args:
        grid: Normalized grid
        spec: Objective definition
        step: Finite-difference step (normalized units)
        rel_tol: Relative tolerance
        small: Magnitude below which the absolute rule applies
        abs_tol: Absolute tolerance for tiny components
        strain: Applied strain
        elements: Flat element indices to probe (all by default)

    Returns:
        GradCheckReport
    """
    grid = np.asarray(grid, dtype=np.float64)
    adjoint = adjoint_gradient(grid, spec, strain, normalized=True, method="direct").values.reshape(-1, 3)
    reference = finite_difference_gradient(grid, spec, step, strain, elements=elements).reshape(-1, 3)

    probed = ~np.isnan(reference)
    a, f = adjoint[probed], reference[probed]
    if a.size == 0:
        raise InputValidationError("No gradient components were probed")

    abs_error = np.abs(a - f)
    tiny = (np.abs(a) < small) & (np.abs(f) < small)
    rel_error = np.where(tiny, 0.0, abs_error / np.maximum(np.maximum(np.abs(a), np.abs(f)), small))
    passed = bool(np.all(np.where(tiny, abs_error <= abs_tol, rel_error <= rel_tol)))

    worst = int(np.argmax(rel_error))
    positions = np.argwhere(probed)
    report = GradCheckReport(
        max_rel_error=float(rel_error.max()),
        max_abs_error=float(abs_error.max()),
        n_components=int(a.size),
        passed=passed,
        worst_component=(int(positions[worst][0]), int(positions[worst][1])),
        details={"step": step, "rel_tol": rel_tol, "kind": spec.kind},
    )
    log = logger.info if passed else logger.warning
    log(f"Gradient check over {report.n_components} components: max relative error {report.max_rel_error:.3e}")
    return report
