"""Principal periodic eigenvalues of the linearized growth operator.

The operator is ``-d Lap - gamma(x)`` on the periodicity cell, plus its
drifted (tilted) variant

    ``psi -> -d Lap psi + 2 d rho . grad psi - (d |rho|^2 + gamma) psi``

whose principal eigenvalue as a function of the tilt ``rho`` feeds the
variational spreading-speed formula.  The principal pair is the one with a
positive eigenfunction; it is computed by power iteration on the shifted
resolvent ``(A + sigma I)^{-1}`` where ``sigma = d|rho|^2 + max(gamma) + 1``
keeps ``A + sigma I`` an M-matrix (nonnegative inverse, so the iteration
preserves positivity and converges to the principal pair).  The growth
factor ``g`` of the iteration gives the eigenvalue exactly:
``lambda_1 = 1/g - sigma``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .errors import SolverError, ValidationError
from .grids import (
    Field,
    apply_laplacian,
    cell_average,
    gradient_matrix,
    laplacian_matrix,
)

_DEFAULT_MAX_ITER = 5000


@dataclass
class EigenResult:
    """Principal eigenpair: sup-normalized positive eigenfunction.

    ``residual`` is the sup norm of (operator - eigenvalue) applied to the
    eigenfunction; ``iterations`` counts resolvent applications.
    """

    eigenvalue: float
    eigenfunction: Field
    residual: float
    iterations: int


def _drift_vector(rho: Sequence[float] | float | None, dimension: int) -> np.ndarray:
    if rho is None:
        return np.zeros(dimension)
    arr = np.atleast_1d(np.asarray(rho, dtype=float)).ravel()
    if arr.size != dimension:
        raise ValidationError(
            f"rho has {arr.size} components but the grid dimension is {dimension}"
        )
    return arr


def _operator(growth: Field, d: float, rho: np.ndarray) -> tuple[sparse.csr_matrix, float]:
    """Assemble the drifted operator and a lower bound on its spectrum."""
    grid = growth.grid
    if not d > 0:
        raise ValidationError(f"diffusivity must be positive, got {d}")
    limit = 1.0 / grid.spacing
    if np.any(np.abs(rho) > limit):
        raise SolverError(
            f"drift too strong for the grid: |rho| components must not exceed "
            f"1/spacing = {limit:.6g} (increase the cell resolution)"
        )
    rho_sq = float(rho @ rho)
    mat = -d * laplacian_matrix(grid)
    for axis in range(grid.dimension):
        if rho[axis] != 0.0:
            mat = mat + (2.0 * d * rho[axis]) * gradient_matrix(grid, axis)
    potential = d * rho_sq + growth.values
    mat = (mat - sparse.diags(potential)).tocsr()
    floor = d * rho_sq + float(growth.values.max())
    return mat, floor


def _power_iteration(
    mat: sparse.csr_matrix,
    floor: float,
    growth: Field,
    value_tol: float,
    residual_tol: float,
    max_iter: int,
    warm_start: np.ndarray | None,
) -> EigenResult:
    n = mat.shape[0]
    sigma = floor + 1.0
    shifted = (mat + sigma * sparse.identity(n, format="csr")).tocsc()
    lu = splu(shifted)

    if warm_start is not None:
        u = np.asarray(warm_start, dtype=float).ravel()
        if u.size != n or u.min() <= 0.0:
            raise ValidationError("warm start must be a positive field of matching size")
        u = u / u.max()
    else:
        u = np.ones(n)

    estimate = np.nan
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        v = lu.solve(u)
        peak = float(v.max())
        if peak <= 0.0 or not np.isfinite(peak):
            raise SolverError(
                "power iteration lost positivity; the operator is not "
                "resolvent-positive at this resolution"
            )
        new_estimate = 1.0 / peak - sigma
        u = v / peak
        if abs(new_estimate - estimate) < value_tol:
            residual = float(np.max(np.abs(mat @ u - new_estimate * u)))
            if residual < residual_tol:
                estimate = new_estimate
                break
        estimate = new_estimate
    else:
        raise SolverError(
            f"eigen iteration did not converge in {max_iter} steps "
            f"(last estimate {estimate:.12g}, residual {residual:.3g})",
            last_estimate=estimate,
            residual=residual,
        )

    if u.min() <= 0.0:
        raise SolverError("principal eigenfunction is not strictly positive")
    return EigenResult(
        eigenvalue=float(estimate),
        eigenfunction=growth.with_values(u),
        residual=residual,
        iterations=iteration,
    )


def principal_eigenpair(
    growth: Field,
    d: float,
    *,
    value_tol: float = 1e-9,
    residual_tol: float = 1e-7,
    max_iter: int = _DEFAULT_MAX_ITER,
    warm_start: np.ndarray | None = None,
) -> EigenResult:
    """Principal eigenpair of ``-d Lap - growth`` on the periodicity cell.

    A negative eigenvalue means the zero state is linearly unstable (the
    epidemic can invade); for constant growth the eigenvalue is exactly
    ``-growth``.
    """
    mat, floor = _operator(growth, d, np.zeros(growth.grid.dimension))
    return _power_iteration(mat, floor, growth, value_tol, residual_tol, max_iter, warm_start)


def drifted_principal_eigenvalue(
    growth: Field,
    d: float,
    rho: Sequence[float] | float,
    *,
    value_tol: float = 1e-9,
    residual_tol: float = 1e-7,
    max_iter: int = _DEFAULT_MAX_ITER,
    warm_start: np.ndarray | None = None,
) -> EigenResult:
    """Principal eigenpair of the tilted operator at drift ``rho``.

    For constant growth the eigenvalue is exactly ``-(d |rho|^2 + growth)``.
    """
    vec = _drift_vector(rho, growth.grid.dimension)
    mat, floor = _operator(growth, d, vec)
    return _power_iteration(mat, floor, growth, value_tol, residual_tol, max_iter, warm_start)


def rayleigh_quotient(phi: Field, growth: Field, d: float) -> float:
    """Energy quotient ``(d <grad phi, grad phi> - <growth phi, phi>) / <phi, phi>``.

    Uses the quadratic form of the stencil Laplacian, so the value is an
    upper bound for the principal eigenvalue for every test field and is
    attained at the eigenfunction.
    """
    if phi.grid != growth.grid:
        raise ValidationError("phi and growth must live on the same grid")
    denom = cell_average(phi.with_values(phi.values**2))
    if denom <= 0.0:
        raise ValidationError("test field must be nonzero")
    lap = apply_laplacian(phi)
    energy = -d * cell_average(phi.with_values(phi.values * lap.values))
    weighted = cell_average(phi.with_values(growth.values * phi.values**2))
    return float((energy - weighted) / denom)


def residual_sup(result: EigenResult, growth: Field, d: float) -> float:
    """Recompute sup|(-d Lap - growth) phi - lambda phi| for a result."""
    phi = result.eigenfunction
    lap = apply_laplacian(phi)
    op = -d * lap.values - growth.values * phi.values
    return float(np.max(np.abs(op - result.eigenvalue * phi.values)))
