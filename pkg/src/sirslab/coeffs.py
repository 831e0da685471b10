"""Periodic coefficient models, scenario descriptions, and derived rates.

The epidemic model has four 1-periodic coefficients — transmission
``alpha``, recovery ``mu``, immunity waning ``lam``, and the initial
susceptible profile ``s0`` — plus a shared diffusivity ``d`` and a
compactly supported initial infection bump.  All of them are represented
symbolically and sampled on demand, so cell and domain grids never need
interpolation between each other.

Derived quantities:

* the net growth rate field ``alpha * avg(s0) - mu`` that controls
  spreading versus extinction,
* the waning-rate threshold above which the steady-state iteration is
  provably a contraction, and
* the explicit Lipschitz bound of that iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
import numpy.typing as npt

from .errors import InapplicableError, ValidationError
from .grids import CellGrid, DomainGrid, Field, cell_average

# ---------------------------------------------------------------------------
# Coefficient specifications (period 1 along every axis)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Constant:
    """Spatially constant coefficient."""

    value: float

    def evaluate(self, points: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        return np.full(points.shape[0], float(self.value))


@dataclass(frozen=True)
class CosineTerm:
    amplitude: float
    frequency: tuple[int, ...]
    phase: float = 0.0


@dataclass(frozen=True)
class CosineSeries:
    """mean + sum of amplitude * cos(2 pi k . x + phase) with integer k."""

    mean: float
    terms: tuple[CosineTerm, ...]

    def evaluate(self, points: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        out = np.full(points.shape[0], float(self.mean))
        for term in self.terms:
            freq = np.asarray(term.frequency, dtype=float)
            out += term.amplitude * np.cos(2.0 * np.pi * points @ freq + term.phase)
        return out


@dataclass(frozen=True)
class PiecewiseConstant:
    """Piecewise constant in the first coordinate, right-continuous.

    ``values[0]`` applies on [0, breakpoints[0]), ``values[k]`` on
    [breakpoints[k-1], breakpoints[k]), and the last value up to 1.
    """

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def evaluate(self, points: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        x = np.mod(points[:, 0], 1.0)
        idx = np.searchsorted(np.asarray(self.breakpoints), x, side="right")
        return np.asarray(self.values, dtype=float)[idx]


CoefficientSpec = Constant | CosineSeries | PiecewiseConstant


def _check_coefficient(name: str, spec: CoefficientSpec, dimension: int) -> None:
    if isinstance(spec, Constant):
        if not math.isfinite(spec.value):
            raise ValidationError(f"coefficient '{name}': value must be finite")
        return
    if isinstance(spec, CosineSeries):
        if not math.isfinite(spec.mean):
            raise ValidationError(f"coefficient '{name}': mean must be finite")
        for term in spec.terms:
            if len(term.frequency) != dimension:
                raise ValidationError(
                    f"coefficient '{name}': frequency {term.frequency} has "
                    f"{len(term.frequency)} components, expected {dimension}"
                )
            if not all(isinstance(k, int) or float(k).is_integer() for k in term.frequency):
                raise ValidationError(
                    f"coefficient '{name}': frequencies must be integers "
                    f"(period is fixed to 1), got {term.frequency}"
                )
        return
    if isinstance(spec, PiecewiseConstant):
        breaks = spec.breakpoints
        if len(spec.values) != len(breaks) + 1:
            raise ValidationError(
                f"coefficient '{name}': need len(values) == len(breakpoints) + 1, "
                f"got {len(spec.values)} values for {len(breaks)} breakpoints"
            )
        if any(not 0.0 < b < 1.0 for b in breaks):
            raise ValidationError(
                f"coefficient '{name}': breakpoints must lie strictly inside (0, 1)"
            )
        if any(b2 <= b1 for b1, b2 in zip(breaks, breaks[1:])):
            raise ValidationError(
                f"coefficient '{name}': breakpoints must be strictly increasing"
            )
        return
    raise ValidationError(f"coefficient '{name}': unknown spec type {type(spec)!r}")


def sample_coefficient(spec: CoefficientSpec, grid: CellGrid | DomainGrid) -> Field:
    """Evaluate a coefficient at every grid point (no interpolation)."""
    return Field(grid, spec.evaluate(grid.points()))


# ---------------------------------------------------------------------------
# Initial infection bump
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BumpSpec:
    """Compact cosine-squared bump: height * cos^2(pi |x-c| / (2 radius))."""

    center: tuple[float, ...]
    radius: float
    height: float

    def evaluate(self, points: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        center = np.asarray(self.center, dtype=float)
        r = np.linalg.norm(points - center, axis=1)
        profile = self.height * np.cos(np.pi * r / (2.0 * self.radius)) ** 2
        return np.where(r < self.radius, profile, 0.0)


# ---------------------------------------------------------------------------
# Solver tolerances (numerics live in the scenario, not in CLI flags)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Tolerances:
    eigen_value: float = 1e-9
    eigen_residual: float = 1e-7
    linear_residual: float = 1e-9
    relaxation: float = 1e-10
    fixed_point: float = 1e-8
    fixed_point_max_iter: int = 200
    speed_rel: float = 1e-5
    barrier_slack: float = 1e-7


# ---------------------------------------------------------------------------
# Scenario
# ---------------------------------------------------------------------------

_COEFFICIENT_NAMES = ("alpha", "mu", "lam", "s0")
_POSITIVITY_SAMPLES_1D = 2048
_POSITIVITY_SAMPLES_2D = 128


@dataclass(frozen=True)
class Scenario:
    """Complete, validated description of one model problem."""

    dimension: int
    d: float
    alpha: CoefficientSpec
    mu: CoefficientSpec
    lam: CoefficientSpec
    s0: CoefficientSpec
    i0: BumpSpec
    cell_resolution: int = 256
    domain_half_width: float = 60.0
    domain_step: float = 1.0 / 32.0
    boundary: str = "periodic"
    dt: float = 0.0
    t_final: float = 100.0
    tolerances: Tolerances = field(default=Tolerances())
    name: str = ""

    def __post_init__(self) -> None:
        validate_scenario(self)

    def cell_grid(self) -> CellGrid:
        return CellGrid(self.dimension, self.cell_resolution)

    def domain_grid(self) -> DomainGrid:
        return DomainGrid(
            self.dimension, self.domain_half_width, self.domain_step, self.boundary
        )


def _positivity_grid(dimension: int) -> npt.NDArray[np.float64]:
    n = _POSITIVITY_SAMPLES_1D if dimension == 1 else _POSITIVITY_SAMPLES_2D
    axis = np.arange(n) / n
    if dimension == 1:
        return axis[:, None]
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    return np.column_stack([xx.ravel(), yy.ravel()])


def validate_scenario(s: Scenario) -> None:
    if s.dimension not in (1, 2):
        raise ValidationError(f"dimension must be 1 or 2, got {s.dimension}")
    if not (math.isfinite(s.d) and s.d > 0):
        raise ValidationError(f"diffusivity d must be positive, got {s.d}")

    probe = _positivity_grid(s.dimension)
    for name in _COEFFICIENT_NAMES:
        spec = getattr(s, name)
        _check_coefficient(name, spec, s.dimension)
        sampled = spec.evaluate(probe)
        low = float(sampled.min())
        if not np.all(np.isfinite(sampled)):
            raise ValidationError(f"coefficient '{name}' evaluates to non-finite values")
        if low <= 0.0:
            raise ValidationError(
                f"coefficient '{name}' must be strictly positive; sampled minimum "
                f"is {low:.6g}"
            )

    if len(s.i0.center) != s.dimension:
        raise ValidationError(
            f"i0.center has {len(s.i0.center)} components, expected {s.dimension}"
        )
    if not s.i0.radius > 0:
        raise ValidationError(f"i0.radius must be positive, got {s.i0.radius}")
    if not s.i0.height > 0:
        raise ValidationError(f"i0.height must be positive, got {s.i0.height}")
    reach = max(abs(c) for c in s.i0.center) + s.i0.radius
    if reach >= s.domain_half_width:
        raise ValidationError(
            f"i0 support (reach {reach:.6g}) must lie inside the domain "
            f"(half width {s.domain_half_width:.6g})"
        )

    # Grid commensurability: constructing the grids runs their own checks.
    s.cell_grid()
    s.domain_grid()
    per_period = round(1.0 / s.domain_step)
    if s.cell_resolution % per_period != 0:
        raise ValidationError(
            f"cell_resolution ({s.cell_resolution}) must be a multiple of "
            f"1/domain_step ({per_period}) so domain points land on cell points"
        )

    if s.dt < 0:
        raise ValidationError(f"dt must be nonnegative (0 selects automatic), got {s.dt}")
    if not s.t_final > 0:
        raise ValidationError(f"t_final must be positive, got {s.t_final}")


def is_homogeneous(s: Scenario) -> bool:
    return all(isinstance(getattr(s, n), Constant) for n in _COEFFICIENT_NAMES)


def with_value(s: Scenario, **changes: object) -> Scenario:
    """dataclasses.replace with revalidation (post-init runs again)."""
    return replace(s, **changes)


# ---------------------------------------------------------------------------
# Derived rates
# ---------------------------------------------------------------------------


@dataclass
class DerivedRates:
    """Net growth rate and the contraction constants derived from it."""

    growth: Field
    s0_mean: float
    waning_threshold: float | None
    contraction_bound: float | None
    waning_note: str = ""
    contraction_note: str = ""


@lru_cache(maxsize=64)
def _cell_samples(s: Scenario) -> dict[str, Field]:
    grid = s.cell_grid()
    return {name: sample_coefficient(getattr(s, name), grid) for name in _COEFFICIENT_NAMES}


def coefficient_fields(s: Scenario) -> dict[str, Field]:
    """alpha, mu, lam, s0 sampled on the scenario's cell grid (cached)."""
    return _cell_samples(s)


def susceptible_mean(s: Scenario) -> float:
    """Cell average of the initial susceptible profile (conserved density)."""
    return cell_average(coefficient_fields(s)["s0"])


def growth_field(s: Scenario) -> Field:
    """Net growth rate alpha * avg(s0) - mu on the cell grid."""
    fields = coefficient_fields(s)
    mean = susceptible_mean(s)
    return fields["alpha"].with_values(fields["alpha"].values * mean - fields["mu"].values)


def waning_threshold(s: Scenario) -> float:
    """Waning-rate level above which the steady-state sweep is a contraction.

    Requires the net growth rate to be positive everywhere.
    """
    fields = coefficient_fields(s)
    growth = growth_field(s).values
    if growth.min() <= 0.0:
        raise InapplicableError(
            "waning threshold inapplicable: net growth rate is not positive "
            f"everywhere (min {growth.min():.6g})"
        )
    alpha = fields["alpha"].values
    mu = fields["mu"].values
    ratio = growth / alpha
    return float(
        (mu.max() * ratio.max() / ratio.min()) * (alpha.max() / alpha.min() + 1.0)
    )


def contraction_bound(s: Scenario) -> float:
    """Explicit Lipschitz bound of the steady-state sweep on the trapped set.

    Homogeneous scenarios get the sharper constant mu/lam; heterogeneous ones
    the general extremal bound, which needs the barrier gap hypothesis
    min(growth/alpha) > max(mu/lam) * max(growth/alpha).
    """
    fields = coefficient_fields(s)
    growth = growth_field(s).values
    if growth.min() <= 0.0:
        raise InapplicableError(
            "contraction bound unavailable: net growth rate is not positive "
            f"everywhere (min {growth.min():.6g})"
        )
    mu = fields["mu"].values
    lam = fields["lam"].values
    if is_homogeneous(s):
        return float(mu[0] / lam[0])
    alpha = fields["alpha"].values
    ratio = growth / alpha
    gap = ratio.min() - (mu / lam).max() * ratio.max()
    if gap <= 0.0:
        raise InapplicableError(
            "contraction bound unavailable: barrier gap hypothesis fails "
            f"(min(growth/alpha) - max(mu/lam)*max(growth/alpha) = {gap:.6g})"
        )
    return float(alpha.max() * ratio.max() * mu.max() / (alpha.min() * lam.min() * gap))


def net_growth_rate(s: Scenario) -> DerivedRates:
    """Growth field plus the derived constants, with notes when inapplicable."""
    growth = growth_field(s)
    mean = susceptible_mean(s)
    threshold: float | None
    bound: float | None
    waning_note = contraction_note = ""
    try:
        threshold = waning_threshold(s)
    except InapplicableError as exc:
        threshold, waning_note = None, str(exc)
    try:
        bound = contraction_bound(s)
    except InapplicableError as exc:
        bound, contraction_note = None, str(exc)
    return DerivedRates(
        growth=growth,
        s0_mean=mean,
        waning_threshold=threshold,
        contraction_bound=bound,
        waning_note=waning_note,
        contraction_note=contraction_note,
    )


def initial_infection(s: Scenario) -> Field:
    """The initial infection bump sampled on the domain grid."""
    return Field(s.domain_grid(), s.i0.evaluate(s.domain_grid().points()))
