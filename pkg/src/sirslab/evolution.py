"""Time integration on a large truncated domain, front metrology, and
the supersolution comparison check.

Three systems share one IMEX scheme (implicit diffusion via a cached
factorization, explicit reaction):

* ``full`` — susceptible/infected/recovered with a shared diffusivity;
  the reaction terms cancel in the sum, so total mass is conserved to
  roundoff on periodic domains.
* ``reduced`` — infected/recovered driven by the growth rate
  ``alpha * N(t,x) - mu`` where the total density N solves the heat
  equation; optionally with independent diffusivities on the two
  equations (N always diffuses with the scenario's d).
* ``kpp`` — the scalar logistic supersolution driven by the same growth
  rate; it dominates the reduced system's infected density pointwise.

States always store (susceptible, infected, recovered) with
``N = S + I + R``; the reduced system keeps S = N - I - R and the scalar
run keeps the supersolution in the infected slot with recovered = 0.

The automatic time step keeps the explicit reaction monotone and
positivity-preserving:  0.2 / (1 + max(sup growth, 0) + sup(alpha N0)
+ sup mu + sup lam).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .coeffs import Scenario, net_growth_rate, sample_coefficient
from .eigen import principal_eigenpair
from .errors import InapplicableError, SolverError, ValidationError
from .grids import DomainGrid, DiffusionSolver, Field, integral
from .stationary import StationaryState, fixed_point

_SYSTEMS = ("full", "reduced", "kpp")
_NEGATIVE_TOL = 1e-12
_BOUNDARY_GUARD_CELLS = 5
_MIN_FIT_SAMPLES = 10
_EXTINCTION_LEVEL = 1e-3


@dataclass
class EvolutionState:
    time: float
    susceptible: Field
    infected: Field
    recovered: Field


@dataclass
class FrontTrace:
    """Front positions along fixed directions at the trace times.

    ``positions[t, k]`` is the largest radius at which the infected density
    still reaches the threshold along direction k, or -inf if none.
    """

    threshold: float
    directions: tuple[tuple[float, ...], ...]
    times: np.ndarray
    positions: np.ndarray


@dataclass
class SpeedFit:
    direction: tuple[float, ...]
    speed: float
    intercept: float
    residual_rms: float
    window: tuple[float, float]
    samples: int


@dataclass
class ComparisonReport:
    times: np.ndarray
    violations: np.ndarray
    max_violation: float
    tolerance: float
    passed: bool


@dataclass
class SimulationResult:
    scenario: Scenario
    system: str
    dt: float
    steps: int
    final: EvolutionState
    snapshots: list[EvolutionState]
    trace: FrontTrace
    speed_fits: list[SpeedFit]
    measured_speed: float | None
    classification: str
    reference: str
    center_values: tuple[float, float, float]
    center_distance: float | None
    mass_times: np.ndarray
    mass_values: np.ndarray
    mass_drift: float
    stationary: StationaryState | None


# ---------------------------------------------------------------------------
# Workspace
# ---------------------------------------------------------------------------


class _DomainWorkspace:
    def __init__(
        self,
        scenario: Scenario,
        dt: float,
        system: str,
        d_infected: float,
        d_recovered: float,
    ) -> None:
        grid = scenario.domain_grid()
        pts = grid.points()
        self.grid = grid
        self.alpha = scenario.alpha.evaluate(pts)
        self.mu = scenario.mu.evaluate(pts)
        self.lam = scenario.lam.evaluate(pts)
        self.s0 = scenario.s0.evaluate(pts)
        self.i0 = scenario.i0.evaluate(pts)
        self.dt = dt
        if system == "full":
            solver = DiffusionSolver(grid, dt * scenario.d)
            self.solvers = (solver, solver, solver)
        else:
            total = DiffusionSolver(grid, dt * scenario.d)
            infected = (
                total
                if d_infected == scenario.d
                else DiffusionSolver(grid, dt * d_infected)
            )
            recovered = (
                total
                if d_recovered == scenario.d
                else DiffusionSolver(grid, dt * d_recovered)
            )
            self.solvers = (total, infected, recovered)


@lru_cache(maxsize=8)
def _domain_workspace(
    scenario: Scenario, dt: float, system: str, d_infected: float, d_recovered: float
) -> _DomainWorkspace:
    return _DomainWorkspace(scenario, dt, system, d_infected, d_recovered)


def default_time_step(scenario: Scenario) -> float:
    """Largest step keeping the explicit reaction monotone and nonnegative."""
    grid = scenario.domain_grid()
    pts = grid.points()
    alpha = scenario.alpha.evaluate(pts)
    n0 = scenario.s0.evaluate(pts) + scenario.i0.evaluate(pts)
    growth_sup = float(net_growth_rate(scenario).growth.values.max())
    denom = (
        1.0
        + max(growth_sup, 0.0)
        + float((alpha * n0).max())
        + float(scenario.mu.evaluate(pts).max())
        + float(scenario.lam.evaluate(pts).max())
    )
    return 0.2 / denom


def suggest_domain_half_width(scenario: Scenario) -> float:
    """Half width that keeps the front well away from the boundary.

    Uses the homogenized speed estimate plus a unit margin over the full
    integration time; extinction scenarios only need to hold the diffusing
    initial bump.
    """
    mean_growth = float(np.mean(net_growth_rate(scenario).growth.values))
    reach = max(abs(c) for c in scenario.i0.center) + scenario.i0.radius
    if mean_growth > 0:
        speed = 2.0 * math.sqrt(scenario.d * mean_growth)
        return math.ceil((speed + 1.0) * scenario.t_final + reach + 5.0)
    return math.ceil(reach + 5.0 + 4.0 * math.sqrt(scenario.d * scenario.t_final))


# ---------------------------------------------------------------------------
# Stepping
# ---------------------------------------------------------------------------


def _advance(
    s: np.ndarray,
    i: np.ndarray,
    r: np.ndarray,
    ws: _DomainWorkspace,
    system: str,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    dt = ws.dt
    if system == "full":
        transmission = ws.alpha * s * i
        rhs = np.stack(
            (
                s + dt * (ws.lam * r - transmission),
                i + dt * (transmission - ws.mu * i),
                r + dt * (ws.mu * i - ws.lam * r),
            ),
            axis=1,
        )
        out = ws.solvers[0].solve(rhs)
        return out[:, 0], out[:, 1], out[:, 2]

    n = s + i + r
    growth = ws.alpha * n - ws.mu
    n_next = ws.solvers[0].solve(n)
    if system == "reduced":
        i_next = ws.solvers[1].solve(
            i + dt * (growth * i - ws.alpha * i * i - ws.alpha * i * r)
        )
        r_next = ws.solvers[2].solve(r + dt * (ws.mu * i - ws.lam * r))
        return n_next - i_next - r_next, i_next, r_next
    # system == "kpp": scalar supersolution in the infected slot
    u_next = ws.solvers[1].solve(i + dt * (growth * i - ws.alpha * i * i))
    return n_next - u_next, u_next, np.zeros_like(u_next)


def _check_nonnegative(
    arrays: dict[str, np.ndarray], time: float, step_index: int
) -> None:
    for name, arr in arrays.items():
        low = float(arr.min())
        if low < -_NEGATIVE_TOL:
            raise SolverError(
                f"negative {name} density {low:.3g} at t={time:.6g} "
                f"(step {step_index}); state minima attached",
                minima={k: float(v.min()) for k, v in arrays.items()},
                time=time,
                step=step_index,
            )
        if low < 0.0:
            np.maximum(arr, 0.0, out=arr)


def step(
    state: EvolutionState,
    scenario: Scenario,
    *,
    dt: float | None = None,
    system: str = "full",
    infected_diffusivity: float | None = None,
    recovered_diffusivity: float | None = None,
) -> EvolutionState:
    """One IMEX step (public, functional form of the integrator's core)."""
    if system not in _SYSTEMS:
        raise ValidationError(f"system must be one of {_SYSTEMS}, got {system!r}")
    if state.infected.grid != scenario.domain_grid():
        raise ValidationError("state must live on the scenario's domain grid")
    dt = dt if dt is not None else (scenario.dt or default_time_step(scenario))
    ws = _domain_workspace(
        scenario,
        float(dt),
        system,
        float(infected_diffusivity or scenario.d),
        float(recovered_diffusivity or scenario.d),
    )
    s, i, r = _advance(
        state.susceptible.values.copy(),
        state.infected.values.copy(),
        state.recovered.values.copy(),
        ws,
        system,
    )
    t = state.time + dt
    checked = {"infected": i, "recovered": r} if system != "full" else {
        "susceptible": s,
        "infected": i,
        "recovered": r,
    }
    _check_nonnegative(checked, t, -1)
    grid = state.infected.grid
    return EvolutionState(t, Field(grid, s), Field(grid, i), Field(grid, r))


# ---------------------------------------------------------------------------
# Front metrology
# ---------------------------------------------------------------------------


def _unit(direction: Sequence[float] | float, dimension: int) -> np.ndarray:
    vec = np.atleast_1d(np.asarray(direction, dtype=float)).ravel()
    if vec.size != dimension:
        raise ValidationError(
            f"direction has {vec.size} components, expected {dimension}"
        )
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise ValidationError("direction must be nonzero")
    return vec / norm


def _ray_indices(grid: DomainGrid, e: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h = grid.spacing
    radii = np.arange(0.0, grid.half_width - h / 2.0, h)
    per_axis = grid.shape[0]
    flat = np.zeros(radii.size, dtype=int)
    for axis in range(grid.dimension):
        coord = np.rint((radii * e[axis] + grid.half_width) / h).astype(int)
        coord = np.clip(coord, 0, per_axis - 1)
        flat = flat * per_axis + coord
    return radii, flat


def front_position(
    infected: Field, threshold: float, direction: Sequence[float] | float
) -> float:
    """Largest radius along a ray where the infected density reaches the
    threshold; -inf when it never does."""
    grid = infected.grid
    if not isinstance(grid, DomainGrid):
        raise ValidationError("front_position needs a domain field")
    e = _unit(direction, grid.dimension)
    radii, flat = _ray_indices(grid, e)
    above = infected.values[flat] >= threshold
    if not above.any():
        return float("-inf")
    return float(radii[np.nonzero(above)[0].max()])


def measure_speed(
    trace: FrontTrace, direction: Sequence[float] | float | None = None
) -> SpeedFit:
    """Least-squares front speed over the last 40% of the trace.

    Requires at least 10 finite samples in the fit window.
    """
    if direction is None:
        if len(trace.directions) != 1:
            raise ValidationError("trace has several directions; pick one")
        column = 0
    else:
        e = tuple(_unit(direction, len(trace.directions[0])))
        matches = [k for k, d in enumerate(trace.directions) if np.allclose(d, e)]
        if not matches:
            raise ValidationError(f"direction {e} not in trace")
        column = matches[0]

    times = trace.times
    positions = trace.positions[:, column]
    t_cut = times[0] + 0.6 * (times[-1] - times[0])
    keep = (times >= t_cut) & np.isfinite(positions)
    if int(keep.sum()) < _MIN_FIT_SAMPLES:
        raise SolverError(
            f"insufficient samples for a speed fit: {int(keep.sum())} finite "
            f"front positions in the fit window (need {_MIN_FIT_SAMPLES})"
        )
    t = times[keep]
    x = positions[keep]
    slope, intercept = np.polyfit(t, x, 1)
    fitted = slope * t + intercept
    rms = float(np.sqrt(np.mean((x - fitted) ** 2)))
    return SpeedFit(
        direction=trace.directions[column],
        speed=float(slope),
        intercept=float(intercept),
        residual_rms=rms,
        window=(float(t[0]), float(t[-1])),
        samples=int(keep.sum()),
    )


# ---------------------------------------------------------------------------
# Center-region comparison against the cell-level reference state
# ---------------------------------------------------------------------------


def _cell_index_map(scenario: Scenario) -> np.ndarray:
    """Flat domain index -> flat cell index (exact, by commensurability)."""
    grid = scenario.domain_grid()
    res = scenario.cell_resolution
    per_period = round(1.0 / grid.step)
    per_cell_step = res // per_period
    offset = round(grid.half_width / grid.step)
    j = np.arange(grid.shape[0])
    k = ((j - offset) % per_period) * per_cell_step
    if grid.dimension == 1:
        return k
    return (k[:, None] * res + k[None, :]).ravel()


def _center_region_mask(grid: DomainGrid) -> np.ndarray:
    axis = np.abs(grid.axis_coordinates()) <= min(1.0, grid.half_width - grid.spacing)
    if grid.dimension == 1:
        return axis
    return (axis[:, None] & axis[None, :]).ravel()


def _center_flat_index(grid: DomainGrid) -> int:
    j0 = round(grid.half_width / grid.step)
    if grid.dimension == 1:
        return j0
    return j0 * grid.shape[0] + j0


# ---------------------------------------------------------------------------
# Simulation driver
# ---------------------------------------------------------------------------


def simulate(
    scenario: Scenario,
    *,
    system: str = "full",
    snapshot_every: float | None = None,
    trace_every: float | None = None,
    threshold: float | None = None,
    directions: Sequence[Sequence[float] | float] | None = None,
    infected_diffusivity: float | None = None,
    recovered_diffusivity: float | None = None,
    extinction_level: float = _EXTINCTION_LEVEL,
) -> SimulationResult:
    """Integrate a scenario to its final time with front tracking.

    The front threshold defaults to half the cell-minimum of the endemic
    infected density when spreading is expected, else to 1e-3 times the
    initial peak.  The run aborts if a tracked front comes within five
    cells of the boundary (the domain is too small for the requested time).
    """
    if system not in _SYSTEMS:
        raise ValidationError(f"system must be one of {_SYSTEMS}, got {system!r}")
    grid = scenario.domain_grid()
    tol = scenario.tolerances

    gate = principal_eigenpair(
        net_growth_rate(scenario).growth,
        scenario.d,
        value_tol=tol.eigen_value,
        residual_tol=tol.eigen_residual,
    )
    stationary_state: StationaryState | None = None
    if gate.eigenvalue < 0.0:
        reference = "endemic"
        try:
            stationary_state = fixed_point(scenario)
        except (InapplicableError, SolverError):
            stationary_state = None
    else:
        reference = "disease-free"
    if threshold is None:
        if stationary_state is not None:
            threshold = 0.5 * float(stationary_state.infected.values.min())
        else:
            threshold = 1e-3 * scenario.i0.height
    if threshold <= 0.0:
        raise ValidationError(f"front threshold must be positive, got {threshold}")

    dt0 = scenario.dt if scenario.dt > 0 else default_time_step(scenario)
    steps = max(1, math.ceil(scenario.t_final / dt0))
    dt = scenario.t_final / steps
    ws = _domain_workspace(
        scenario,
        float(dt),
        system,
        float(infected_diffusivity or scenario.d),
        float(recovered_diffusivity or scenario.d),
    )

    if directions is None:
        axes = []
        for a in range(scenario.dimension):
            e = [0.0] * scenario.dimension
            e[a] = 1.0
            axes.append(tuple(e))
            axes.append(tuple(-x for x in e))
        directions = axes
    units = [_unit(d, scenario.dimension) for d in directions]
    rays = [_ray_indices(grid, e) for e in units]
    guard = grid.half_width - _BOUNDARY_GUARD_CELLS * grid.spacing

    snapshot_every = snapshot_every if snapshot_every else scenario.t_final / 10.0
    trace_every = trace_every if trace_every else max(dt, scenario.t_final / 400.0)
    snap_stride = max(1, round(snapshot_every / dt))
    trace_stride = max(1, round(trace_every / dt))

    s = ws.s0.copy()
    i = ws.i0.copy()
    r = np.zeros_like(s)

    def wrap(t: float) -> EvolutionState:
        return EvolutionState(t, Field(grid, s), Field(grid, i), Field(grid, r))

    def fronts() -> list[float]:
        out = []
        for radii, flat in rays:
            above = i[flat] >= threshold
            out.append(float(radii[np.nonzero(above)[0].max()]) if above.any() else -np.inf)
        return out

    trace_times = [0.0]
    trace_positions = [fronts()]
    mass_times = [0.0]
    mass_values = [integral(Field(grid, s + i + r))]
    snapshots = [wrap(0.0)]

    for k in range(1, steps + 1):
        s, i, r = _advance(s, i, r, ws, system)
        t = k * dt
        checked = {"infected": i, "recovered": r} if system != "full" else {
            "susceptible": s,
            "infected": i,
            "recovered": r,
        }
        _check_nonnegative(checked, t, k)
        if k % trace_stride == 0 or k == steps:
            positions = fronts()
            trace_times.append(t)
            trace_positions.append(positions)
            mass_times.append(t)
            mass_values.append(integral(Field(grid, s + i + r)))
            farthest = max((p for p in positions if np.isfinite(p)), default=-np.inf)
            if farthest > guard:
                raise SolverError(
                    f"domain too small: infection front at radius {farthest:.6g} "
                    f"is within {_BOUNDARY_GUARD_CELLS} cells of the boundary "
                    f"(half width {grid.half_width:.6g}) at t={t:.6g}"
                )
        if k % snap_stride == 0 or k == steps:
            snapshots.append(wrap(t))

    trace = FrontTrace(
        threshold=float(threshold),
        directions=tuple(tuple(e) for e in units),
        times=np.asarray(trace_times),
        positions=np.asarray(trace_positions),
    )

    fits: list[SpeedFit] = []
    for e in units:
        try:
            fits.append(measure_speed(trace, e))
        except SolverError:
            continue
    measured = float(np.mean([f.speed for f in fits])) if fits else None

    sup_infected = float(np.max(i))
    classification = "extinct" if sup_infected < extinction_level else "spreading"

    center = _center_flat_index(grid)
    center_values = (float(s[center]), float(i[center]), float(r[center]))
    center_distance: float | None = None
    if system in ("full", "reduced"):
        mask = _center_region_mask(grid)
        if reference == "endemic" and stationary_state is not None:
            cell_map = _cell_index_map(scenario)[mask]
            refs = (
                stationary_state.susceptible.values[cell_map],
                stationary_state.infected.values[cell_map],
                stationary_state.recovered.values[cell_map],
            )
        else:
            mean = net_growth_rate(scenario).s0_mean
            size = int(mask.sum())
            refs = (np.full(size, mean), np.zeros(size), np.zeros(size))
        fields = (s[mask], i[mask], r[mask])
        center_distance = float(
            max(np.max(np.abs(f - ref)) for f, ref in zip(fields, refs))
        )

    mass = np.asarray(mass_values)
    drift = float(np.max(np.abs(mass - mass[0])) / abs(mass[0])) if mass[0] else 0.0

    return SimulationResult(
        scenario=scenario,
        system=system,
        dt=dt,
        steps=steps,
        final=wrap(steps * dt),
        snapshots=snapshots,
        trace=trace,
        speed_fits=fits,
        measured_speed=measured,
        classification=classification,
        reference=reference,
        center_values=center_values,
        center_distance=center_distance,
        mass_times=np.asarray(mass_times),
        mass_values=mass,
        mass_drift=drift,
        stationary=stationary_state,
    )


def comparison_check(
    reduced: SimulationResult,
    scalar: SimulationResult,
    tolerance: float | None = None,
) -> ComparisonReport:
    """Verify the scalar supersolution dominates the reduced infected density.

    Both runs must come from the same scenario, time step, and snapshot
    schedule; the default tolerance is 1e-6 plus one time step.
    """
    if reduced.system != "reduced" or scalar.system != "kpp":
        raise ValidationError(
            "comparison_check needs a reduced-system run and a scalar (kpp) run"
        )
    if reduced.scenario != scalar.scenario or reduced.dt != scalar.dt:
        raise ValidationError("runs must share the scenario and time step")
    if len(reduced.snapshots) != len(scalar.snapshots):
        raise ValidationError("runs must share the snapshot schedule")
    if tolerance is None:
        tolerance = 1e-6 + reduced.dt
    times = []
    violations = []
    for a, b in zip(reduced.snapshots, scalar.snapshots):
        if abs(a.time - b.time) > 1e-12:
            raise ValidationError("runs must share the snapshot schedule")
        times.append(a.time)
        excess = a.infected.values - b.infected.values
        violations.append(float(max(np.max(excess), 0.0)))
    arr = np.asarray(violations)
    worst = float(arr.max()) if arr.size else 0.0
    return ComparisonReport(
        times=np.asarray(times),
        violations=arr,
        max_violation=worst,
        tolerance=float(tolerance),
        passed=bool(worst <= tolerance),
    )
