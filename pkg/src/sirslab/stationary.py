"""Endemic steady states on the periodicity cell.

The steady-state system is solved by a monotone sweep built from three
operators:

* :func:`solve_recovered` — the recovered density sustained by a given
  infected profile (a symmetric positive definite linear solve),
* :func:`infection_capacity` — the carrying capacity left for the
  infection once that recovered density is subtracted, and
* :func:`logistic_equilibrium` — the largest steady solution of the
  scalar logistic equation at a given capacity (zero when the capacity's
  principal eigenvalue says the zero state is stable; otherwise obtained
  by parabolic relaxation from a constant supersolution).

One sweep is order-preserving, maps the barrier-trapped set into itself,
and — when the waning rate exceeds the scenario's waning threshold — is a
contraction, so :func:`fixed_point` converges to the unique endemic state
between the barriers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .coeffs import (
    Scenario,
    coefficient_fields,
    growth_field,
    net_growth_rate,
    susceptible_mean,
)
from .eigen import EigenResult, principal_eigenpair
from .errors import InapplicableError, SolverError, ValidationError
from .grids import (
    CellGrid,
    DiffusionSolver,
    Field,
    apply_laplacian,
    l2_norm,
    laplacian_matrix,
)

_RELAXATION_MAX_UNITS = 5000
_RATIO_FLOOR = 1e-12


@dataclass
class Barriers:
    """Upper/lower stationary barriers and the eigenvalues that gate them."""

    upper_infected: Field
    upper_recovered: Field
    lower_infected: Field
    growth_eigenvalue: float
    damped_growth_eigenvalue: float
    can_spread: bool
    lower_positive: bool


@dataclass
class StationaryState:
    """Endemic steady state with convergence diagnostics."""

    susceptible: Field
    infected: Field
    recovered: Field
    residuals: tuple[float, float, float]
    iterations: int
    contraction_estimate: float | None
    increments: tuple[float, ...]
    barrier_contact: bool
    barriers: Barriers


class _Workspace:
    """Sampled coefficients and cached factorizations for one scenario."""

    def __init__(self, scenario: Scenario) -> None:
        self.grid: CellGrid = scenario.cell_grid()
        fields = coefficient_fields(scenario)
        self.alpha = fields["alpha"].values
        self.mu = fields["mu"].values
        self.lam = fields["lam"].values
        self.d = scenario.d
        self.growth = growth_field(scenario)
        self.s0_mean = susceptible_mean(scenario)
        matrix = (-scenario.d) * laplacian_matrix(self.grid) + sparse.diags(self.lam)
        self._recovered_lu = splu(matrix.tocsc())
        self._recovered_matrix = matrix.tocsr()

    def recovered_solve(self, rhs: np.ndarray) -> np.ndarray:
        return self._recovered_lu.solve(rhs)

    def recovered_residual(self, solution: np.ndarray, rhs: np.ndarray) -> float:
        return float(np.max(np.abs(self._recovered_matrix @ solution - rhs)))


@lru_cache(maxsize=16)
def _workspace(scenario: Scenario) -> _Workspace:
    return _Workspace(scenario)


def _require_cell_field(f: Field, scenario: Scenario, what: str) -> None:
    if f.grid != scenario.cell_grid():
        raise ValidationError(f"{what} must live on the scenario's cell grid")


# ---------------------------------------------------------------------------
# The three operators
# ---------------------------------------------------------------------------


def solve_recovered(infected: Field, scenario: Scenario) -> Field:
    """Steady recovered density for a given infected profile.

    Solves ``(-d Lap + lam) R = mu * I`` on the cell; order-preserving and
    exact up to the linear-solve residual tolerance.
    """
    ws = _workspace(scenario)
    _require_cell_field(infected, scenario, "infected field")
    rhs = ws.mu * infected.values
    solution = ws.recovered_solve(rhs)
    residual = ws.recovered_residual(solution, rhs)
    scale = max(1.0, float(np.max(np.abs(rhs))))
    if residual > scenario.tolerances.linear_residual * scale:
        raise SolverError(
            f"recovered-density solve residual {residual:.3g} exceeds tolerance"
        )
    return infected.with_values(solution)


def infection_capacity(recovered: Field, scenario: Scenario) -> Field:
    """Carrying capacity left for the infection: growth/alpha - recovered."""
    ws = _workspace(scenario)
    _require_cell_field(recovered, scenario, "recovered field")
    return recovered.with_values(ws.growth.values / ws.alpha - recovered.values)


def logistic_equilibrium(capacity: Field, scenario: Scenario) -> Field:
    """Largest steady solution of ``-d Lap u = alpha u (capacity - u)``.

    Returns the zero field when the principal eigenvalue of the linearization
    at zero is nonnegative.  Otherwise relaxes the parabolic version from the
    constant supersolution ``max(sup capacity, 0) + 1`` until the state moves
    by less than the relaxation tolerance over one time unit; the iterates
    decrease monotonically, so the limit is the largest solution.
    """
    ws = _workspace(scenario)
    _require_cell_field(capacity, scenario, "capacity field")
    tol = scenario.tolerances
    weighted = capacity.with_values(ws.alpha * capacity.values)
    gate = principal_eigenpair(
        weighted,
        ws.d,
        value_tol=tol.eigen_value,
        residual_tol=tol.eigen_residual,
    )
    if gate.eigenvalue >= 0.0:
        return capacity.with_values(np.zeros(ws.grid.num_points))

    ceiling = max(float(capacity.values.max()), 0.0) + 1.0
    av = weighted.values
    av_sup = float(np.max(np.abs(av)))
    # Step small enough that the explicit reaction is monotone on [0, ceiling];
    # the iterates then stay trapped between the equilibrium and the start.
    dt = 0.2 / (1.0 + av_sup + 2.0 * float(ws.alpha.max()) * ceiling)
    solver = DiffusionSolver(ws.grid, dt * ws.d)
    steps_per_unit = max(1, math.ceil(1.0 / dt))

    u = np.full(ws.grid.num_points, ceiling)
    mark = u.copy()
    for unit in range(1, _RELAXATION_MAX_UNITS + 1):
        for _ in range(steps_per_unit):
            u = solver.solve(u + dt * (av * u - ws.alpha * u * u))
        change = float(np.max(np.abs(u - mark)))
        if change < tol.relaxation:
            return capacity.with_values(u)
        mark = u.copy()
    raise SolverError(
        f"logistic relaxation did not settle in {_RELAXATION_MAX_UNITS} time "
        f"units (last unit change {change:.3g})",
        last_change=change,
    )


def endemic_map(infected: Field, scenario: Scenario) -> Field:
    """One sweep of the steady-state iteration (order-preserving squared)."""
    recovered = solve_recovered(infected, scenario)
    return logistic_equilibrium(infection_capacity(recovered, scenario), scenario)


# ---------------------------------------------------------------------------
# Barriers and the trapped set
# ---------------------------------------------------------------------------


def compute_barriers(scenario: Scenario) -> Barriers:
    """Upper and lower stationary barriers for the infected density.

    The upper barrier is the logistic equilibrium at full capacity, the
    lower one the image of the upper under one sweep.  Their gate
    eigenvalues (and spreading flags) are reported alongside.
    """
    ws = _workspace(scenario)
    tol = scenario.tolerances
    gate = principal_eigenpair(
        ws.growth, ws.d, value_tol=tol.eigen_value, residual_tol=tol.eigen_residual
    )
    capacity = Field(ws.grid, ws.growth.values / ws.alpha)
    upper_infected = logistic_equilibrium(capacity, scenario)
    upper_recovered = solve_recovered(upper_infected, scenario)
    damped = ws.growth.with_values(ws.growth.values - ws.alpha * upper_recovered.values)
    damped_gate = principal_eigenpair(
        damped, ws.d, value_tol=tol.eigen_value, residual_tol=tol.eigen_residual
    )
    lower_infected = logistic_equilibrium(
        infection_capacity(upper_recovered, scenario), scenario
    )
    return Barriers(
        upper_infected=upper_infected,
        upper_recovered=upper_recovered,
        lower_infected=lower_infected,
        growth_eigenvalue=gate.eigenvalue,
        damped_growth_eigenvalue=damped_gate.eigenvalue,
        can_spread=gate.eigenvalue < 0.0,
        lower_positive=damped_gate.eigenvalue < 0.0,
    )


def within_barriers(infected: Field, barriers: Barriers, slack: float = 1e-7) -> bool:
    """Pointwise membership in the barrier-trapped set, up to slack."""
    lo = barriers.lower_infected.values - slack
    hi = barriers.upper_infected.values + slack
    return bool(np.all(infected.values >= lo) and np.all(infected.values <= hi))


# ---------------------------------------------------------------------------
# Fixed point
# ---------------------------------------------------------------------------


def fixed_point(scenario: Scenario) -> StationaryState:
    """Endemic steady state by iterating the sweep from the upper barrier.

    Stops when the cell-L2 increment drops below the fixed-point tolerance;
    warns (but proceeds) when the waning rate is at or below the scenario's
    contraction threshold, where convergence is not guaranteed.
    """
    ws = _workspace(scenario)
    tol = scenario.tolerances
    barriers = compute_barriers(scenario)
    if not barriers.can_spread:
        raise InapplicableError(
            f"no endemic steady state: principal growth eigenvalue "
            f"{barriers.growth_eigenvalue:.6g} >= 0 (disease-free regime)"
        )

    rates = net_growth_rate(scenario)
    if rates.waning_threshold is None:
        warnings.warn(
            "contraction regime unverified: " + rates.waning_note,
            stacklevel=2,
        )
    elif float(ws.lam.min()) <= rates.waning_threshold:
        warnings.warn(
            f"waning rate min {ws.lam.min():.6g} is not above the contraction "
            f"threshold {rates.waning_threshold:.6g}; the iteration may not "
            f"contract",
            stacklevel=2,
        )

    infected = barriers.upper_infected
    increments: list[float] = []
    converged = False
    for _ in range(tol.fixed_point_max_iter):
        nxt = endemic_map(infected, scenario)
        increments.append(l2_norm(nxt.with_values(nxt.values - infected.values)))
        infected = nxt
        if increments[-1] < tol.fixed_point:
            converged = True
            break
    if not converged:
        raise SolverError(
            f"fixed-point iteration did not converge within "
            f"{tol.fixed_point_max_iter} sweeps; increment history attached",
            increments=tuple(increments),
        )

    recovered = solve_recovered(infected, scenario)
    susceptible = infected.with_values(
        ws.s0_mean - infected.values - recovered.values
    )

    lap_s = apply_laplacian(susceptible).values
    lap_i = apply_laplacian(infected).values
    lap_r = apply_laplacian(recovered).values
    s, i, r = susceptible.values, infected.values, recovered.values
    transmission = ws.alpha * s * i
    res_s = float(np.max(np.abs(ws.d * lap_s - transmission + ws.lam * r)))
    res_i = float(np.max(np.abs(ws.d * lap_i + transmission - ws.mu * i)))
    res_r = float(np.max(np.abs(ws.d * lap_r + ws.mu * i - ws.lam * r)))

    ratios = [
        b / a
        for a, b in zip(increments, increments[1:])
        if a > _RATIO_FLOOR and b > _RATIO_FLOOR
    ]
    contraction = max(ratios) if ratios else None

    slack = tol.barrier_slack
    contact = bool(
        np.min(barriers.upper_infected.values - infected.values) <= slack
        or np.min(infected.values - barriers.lower_infected.values) <= slack
    )

    return StationaryState(
        susceptible=susceptible,
        infected=infected,
        recovered=recovered,
        residuals=(res_s, res_i, res_r),
        iterations=len(increments),
        contraction_estimate=contraction,
        increments=tuple(increments),
        barrier_contact=contact,
        barriers=barriers,
    )
