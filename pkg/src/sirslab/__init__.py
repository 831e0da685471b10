"""Numerical laboratory for a spatially periodic SIRS reaction-diffusion
model: principal eigenvalues of the linearized growth operator, directional
spreading speeds, endemic stationary states, and front-tracking simulation.
"""

from .coeffs import (
    BumpSpec,
    Constant,
    CosineSeries,
    CosineTerm,
    DerivedRates,
    PiecewiseConstant,
    Scenario,
    Tolerances,
    coefficient_fields,
    contraction_bound,
    growth_field,
    initial_infection,
    is_homogeneous,
    net_growth_rate,
    sample_coefficient,
    susceptible_mean,
    validate_scenario,
    waning_threshold,
    with_value,
)
from .eigen import (
    EigenResult,
    drifted_principal_eigenvalue,
    principal_eigenpair,
    rayleigh_quotient,
    residual_sup,
)
from .errors import (
    InapplicableError,
    SirsLabError,
    SolverError,
    ValidationError,
)
from .evolution import (
    ComparisonReport,
    EvolutionState,
    FrontTrace,
    SimulationResult,
    SpeedFit,
    comparison_check,
    default_time_step,
    front_position,
    measure_speed,
    simulate,
    step,
    suggest_domain_half_width,
)
from .grids import (
    CellGrid,
    DiffusionSolver,
    DomainGrid,
    Field,
    apply_gradient_dot,
    apply_laplacian,
    cell_average,
    constant_field,
    integral,
    l2_norm,
    read_fields,
    read_table,
    sup_norm,
    write_fields,
    write_table,
)
from .report import (
    RunReport,
    read_report,
    render_figures,
    report_lines,
    stage_timer,
    write_report,
)
from .scenario_io import (
    dump_scenario,
    get_parameter,
    load_scenario,
    loads_scenario,
    scenario_digest,
    set_parameter,
    write_scenario,
)
from .speeds import (
    SpeedPair,
    SpeedResult,
    homogeneous_speed,
    speed_pair,
    spreading_speed,
)
from .stationary import (
    Barriers,
    StationaryState,
    compute_barriers,
    endemic_map,
    fixed_point,
    infection_capacity,
    logistic_equilibrium,
    solve_recovered,
    within_barriers,
)

__version__ = "0.1.0"

__all__ = [
    "Barriers",
    "BumpSpec",
    "CellGrid",
    "ComparisonReport",
    "Constant",
    "CosineSeries",
    "CosineTerm",
    "DerivedRates",
    "DiffusionSolver",
    "DomainGrid",
    "EigenResult",
    "EvolutionState",
    "Field",
    "FrontTrace",
    "InapplicableError",
    "PiecewiseConstant",
    "RunReport",
    "Scenario",
    "SimulationResult",
    "SirsLabError",
    "SolverError",
    "SpeedFit",
    "SpeedPair",
    "SpeedResult",
    "StationaryState",
    "Tolerances",
    "ValidationError",
    "apply_gradient_dot",
    "apply_laplacian",
    "cell_average",
    "coefficient_fields",
    "comparison_check",
    "compute_barriers",
    "constant_field",
    "contraction_bound",
    "default_time_step",
    "drifted_principal_eigenvalue",
    "dump_scenario",
    "endemic_map",
    "fixed_point",
    "front_position",
    "get_parameter",
    "growth_field",
    "homogeneous_speed",
    "infection_capacity",
    "initial_infection",
    "integral",
    "is_homogeneous",
    "l2_norm",
    "load_scenario",
    "loads_scenario",
    "logistic_equilibrium",
    "measure_speed",
    "net_growth_rate",
    "principal_eigenpair",
    "rayleigh_quotient",
    "read_fields",
    "read_report",
    "read_table",
    "render_figures",
    "report_lines",
    "residual_sup",
    "sample_coefficient",
    "scenario_digest",
    "set_parameter",
    "simulate",
    "solve_recovered",
    "speed_pair",
    "spreading_speed",
    "stage_timer",
    "step",
    "suggest_domain_half_width",
    "sup_norm",
    "susceptible_mean",
    "validate_scenario",
    "waning_threshold",
    "with_value",
    "within_barriers",
    "write_fields",
    "write_report",
    "write_scenario",
    "write_table",
]
