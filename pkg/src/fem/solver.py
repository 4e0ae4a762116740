"""
Linear Solvers

Jacobi-preconditioned conjugate gradients with residual history, and a
cached sparse direct factorization shared by forward and adjoint solves.
"""

import logging
from typing import Literal, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..config import get_settings
from ..errors import InputValidationError, SolverError
from .assembly import FemSystem

logger = logging.getLogger(__name__)

SolverMethod = Literal["cg", "direct", "auto"]


def conjugate_gradient(
    A: sp.spmatrix,
    b: np.ndarray,
    tol: float,
    max_iter: int,
    x0: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, list[float]]:
    """
    Jacobi-preconditioned CG on an SPD matrix.

    Args:
        A: SPD matrix
        b: Right-hand side
        tol: Relative residual tolerance ||r|| / ||b||
        max_iter: Iteration cap
        x0: Initial guess (zeros by default)

    Returns:
        Tuple of (solution, relative residual history)

    Raises:
        SolverError: If the tolerance is not reached within max_iter
    """
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros_like(b), [0.0]

    diagonal = A.diagonal()
    if np.any(diagonal <= 0):
        raise SolverError("Stiffness matrix has a non-positive diagonal entry")
    inv_diag = 1.0 / diagonal

    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=np.float64)
    r = b - A @ x
    z = inv_diag * r
    d = z.copy()
    rz = float(r @ z)
    history = [float(np.linalg.norm(r)) / b_norm]

    for _ in range(max_iter):
        if history[-1] <= tol:
            break
        Ad = A @ d
        curvature = float(d @ Ad)
        if curvature <= 0:
            raise SolverError("Matrix is not positive definite (non-positive curvature)", history)
        alpha = rz / curvature
        x += alpha * d
        r -= alpha * Ad
        history.append(float(np.linalg.norm(r)) / b_norm)
        z = inv_diag * r
        rz_next = float(r @ z)
        d = z + (rz_next / rz) * d
        rz = rz_next
    else:
        if history[-1] > tol:
            raise SolverError(
                f"CG did not reach {tol:g} in {max_iter} iterations (residual {history[-1]:.3e})",
                history,
            )

    logger.debug(f"CG converged in {len(history) - 1} iterations (residual {history[-1]:.3e})")
    return x, history


def resolve_method(system: FemSystem, method: Optional[SolverMethod] = None) -> str:
    """Concrete solver for a system ("cg" or "direct")."""
    settings = get_settings()
    method = method or settings.fem_solver
    if method == "auto":
        return "direct" if system.mesh.n_free <= settings.fem_auto_direct_limit else "cg"
    if method not in ("cg", "direct"):
        raise InputValidationError(f"Unknown solver '{method}'")
    return method


def solve_reduced(system: FemSystem, rhs: np.ndarray, method: Optional[SolverMethod] = None) -> np.ndarray:
    """
    Solve A x = rhs on the free DOFs of an assembled system.

    The direct factorization is computed once and kept on the system.

    Args:
        system: Assembled system
        rhs: Right-hand side over free DOFs
        method: "cg", "direct" or "auto" (settings default)

    Returns:
        Solution over free DOFs
    """
    method = resolve_method(system, method)
    if system.mesh.n_free == 0:
        return np.zeros(0)

    if method == "direct":
        if system.factorization is None:
            try:
                system.factorization = spla.factorized(system.A.tocsc())
            except RuntimeError as e:
                raise SolverError(f"Sparse factorization failed: {e}") from e
        x = system.factorization(rhs)
        history = [float(np.linalg.norm(system.A @ x - rhs) / max(np.linalg.norm(rhs), 1e-300))]
    else:
        settings = get_settings()
        x, history = conjugate_gradient(
            system.A,
            rhs,
            tol=settings.fem_tolerance,
            max_iter=settings.fem_max_iter_factor * system.mesh.n_free,
        )

    if not np.all(np.isfinite(x)):
        raise SolverError("Solver produced non-finite values", history)
    system.info = {"method": method, "iterations": len(history) - 1, "residual_history": history}
    return x


def solve(system: FemSystem, method: Optional[SolverMethod] = None) -> np.ndarray:
    """
    Solve for the displacement field.

    Args:
        system: Assembled system
        method: "cg", "direct" or "auto" (settings default)

    Returns:
        Full DOF vector (n_nodes * 3) with Dirichlet values reinstated

    Raises:
        SolverError: Non-convergence, with the residual history attached
    """
    return system.expand(solve_reduced(system, system.b, method))
