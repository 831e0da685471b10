"""Acceptance suite: every advertised guarantee as one pass/fail line.

Run ``pytest tests/test_acceptance.py -v`` to see one line per criterion;
each test prints the measured numbers next to their bounds.  The
heterogeneous benchmark is judged against the independent dense-matrix,
damped-Newton, and grid-scan oracles in ``oracles.py``; the homogeneous
benchmarks are judged against closed forms.
"""

import math
from time import perf_counter

import numpy as np
import pytest

from conftest import cosine, make_scenario
from oracles import (
    oracle_eigenvalue_1d,
    oracle_logistic,
    oracle_recovered,
    oracle_speed_1d,
    oracle_stationary,
)
from sirslab import (
    Constant,
    Field,
    coefficient_fields,
    comparison_check,
    compute_barriers,
    contraction_bound,
    drifted_principal_eigenvalue,
    endemic_map,
    fixed_point,
    growth_field,
    l2_norm,
    principal_eigenpair,
    read_report,
    simulate,
    solve_recovered,
    speed_pair,
    spreading_speed,
    waning_threshold,
    with_value,
    within_barriers,
)
from sirslab.cli import main

EQUILIBRIUM = (1.0, 5.0 / 6.0, 1.0 / 6.0)


class timed:
    def __enter__(self):
        self.start = perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = perf_counter() - self.start


# ---------------------------------------------------------------------------
# 1. Homogeneous eigenvalues against closed forms
# ---------------------------------------------------------------------------


def test_homogeneous_unit_growth_eigenvalue_and_unit_tilt_match_closed_forms():
    scenario = make_scenario(cell_resolution=256)  # growth = alpha*S0 - mu = 1
    growth = growth_field(scenario)
    with timed() as t:
        flat = principal_eigenpair(growth, scenario.d)
        tilted = drifted_principal_eigenvalue(growth, scenario.d, 1.0)
    print(
        f"eigenvalue {flat.eigenvalue:+.12f} (target -1),"
        f" tilted {tilted.eigenvalue:+.12f} (target -2), {t.seconds:.3f}s"
    )
    assert abs(flat.eigenvalue - (-1.0)) <= 1e-8
    assert abs(tilted.eigenvalue - (-2.0)) <= 1e-8
    assert t.seconds < 1.0


# ---------------------------------------------------------------------------
# 2. Homogeneous speed bracket against closed forms
# ---------------------------------------------------------------------------


def test_homogeneous_speed_bracket_matches_closed_forms(hom1):
    with timed() as t:
        pair = speed_pair(hom1)
    lower_target = 2.0 * math.sqrt(0.8)
    print(
        f"upper {pair.upper.speed:.6f} (target 2.0),"
        f" lower {pair.lower.speed:.6f} (target {lower_target:.6f}), {t.seconds:.2f}s"
    )
    assert abs(pair.upper.speed - 2.0) <= 1e-4
    assert pair.lower is not None
    assert abs(pair.lower.speed - lower_target) <= 1e-4
    assert t.seconds < 10.0


# ---------------------------------------------------------------------------
# 3. Homogeneous endemic equilibrium against closed forms
# ---------------------------------------------------------------------------


def test_homogeneous_endemic_fixed_point_matches_closed_form(hom1):
    with timed() as t:
        state = fixed_point(hom1)
    errors = tuple(
        float(np.max(np.abs(f.values - target)))
        for f, target in zip(
            (state.susceptible, state.infected, state.recovered), EQUILIBRIUM
        )
    )
    print(
        f"sup errors vs (1, 5/6, 1/6): {errors},"
        f" residuals {max(state.residuals):.2e},"
        f" contraction {state.contraction_estimate:.4f}, {t.seconds:.2f}s"
    )
    assert max(errors) <= 1e-6
    assert max(state.residuals) < 1e-8
    assert state.contraction_estimate is not None
    assert state.contraction_estimate <= 0.25
    assert t.seconds < 30.0


# ---------------------------------------------------------------------------
# 4. Spreading run: front speed sandwich and center equilibration
# ---------------------------------------------------------------------------


def test_spreading_run_front_speed_in_sandwich_and_center_at_equilibrium(hom1_run):
    run, seconds = hom1_run
    center_errors = tuple(
        abs(v - target) for v, target in zip(run.center_values, EQUILIBRIUM)
    )
    print(
        f"measured speed {run.measured_speed:.4f} (band [1.70, 2.10]),"
        f" center errors {center_errors}, {seconds:.1f}s"
    )
    assert run.measured_speed is not None
    assert 1.70 <= run.measured_speed <= 2.10
    assert max(center_errors) <= 1e-2
    assert run.classification == "spreading"
    assert seconds < 300.0


# ---------------------------------------------------------------------------
# 5. Extinction run: infection dies, susceptible relaxes to its mean
# ---------------------------------------------------------------------------


def test_extinction_run_infection_dies_and_susceptible_relaxes(ext1):
    with timed() as t:
        run = simulate(ext1)
    sup_infected = float(run.final.infected.values.max())
    sup_s_error = float(np.max(np.abs(run.final.susceptible.values - 1.0)))
    print(
        f"sup I(T) {sup_infected:.3e} (< 1e-4),"
        f" sup |S-1| {sup_s_error:.3e} (< 1e-2),"
        f" classification {run.classification}, {t.seconds:.1f}s"
    )
    assert sup_infected < 1e-4
    assert sup_s_error < 1e-2
    assert run.classification == "extinct"
    assert run.reference == "disease-free"
    assert t.seconds < 60.0


# ---------------------------------------------------------------------------
# 6. Heterogeneous benchmark against the independent oracles
# ---------------------------------------------------------------------------


def test_heterogeneous_benchmark_matches_independent_oracles(het1):
    grid = het1.cell_grid()
    h = grid.spacing
    growth = growth_field(het1)
    gamma = growth.values
    fields = coefficient_fields(het1)
    alpha, mu, lam = fields["alpha"].values, fields["mu"].values, fields["lam"].values

    flat_gap = abs(
        principal_eigenpair(growth, het1.d).eigenvalue
        - oracle_eigenvalue_1d(gamma, het1.d, h)
    )

    tilt_gap = 0.0
    for rho in np.geomspace(0.1, 10.0, 20):
        ours = drifted_principal_eigenvalue(growth, het1.d, float(rho)).eigenvalue
        tilt_gap = max(
            tilt_gap, abs(ours - oracle_eigenvalue_1d(gamma, het1.d, h, rho=float(rho)))
        )

    speed_gap = abs(
        spreading_speed(growth, het1.d, 1.0).speed
        - oracle_speed_1d(gamma, het1.d, h)
    )

    barriers = compute_barriers(het1)
    upper_oracle = oracle_logistic(alpha, gamma / alpha, het1.d, h)
    recovered_oracle = oracle_recovered(upper_oracle, mu, lam, het1.d, h)
    lower_oracle = oracle_logistic(
        alpha, gamma / alpha - recovered_oracle, het1.d, h
    )
    barrier_gap = max(
        float(np.max(np.abs(barriers.upper_infected.values - upper_oracle))),
        float(np.max(np.abs(barriers.lower_infected.values - lower_oracle))),
    )

    state = fixed_point(het1)
    infected_oracle, recovered_star = oracle_stationary(
        alpha, mu, lam, gamma, het1.d, h
    )
    susceptible_oracle = 2.0 - infected_oracle - recovered_star
    state_gap = max(
        float(np.max(np.abs(state.infected.values - infected_oracle))),
        float(np.max(np.abs(state.recovered.values - recovered_star))),
        float(np.max(np.abs(state.susceptible.values - susceptible_oracle))),
    )

    print(
        f"gaps vs oracles: eigenvalue {flat_gap:.2e}, tilt (20 rates) {tilt_gap:.2e},"
        f" speed {speed_gap:.2e}, barriers {barrier_gap:.2e}, fixed point {state_gap:.2e}"
    )
    assert flat_gap <= 1e-6
    assert tilt_gap <= 1e-6
    assert speed_gap <= 1e-4
    assert barrier_gap <= 1e-6
    assert state_gap <= 1e-6


# ---------------------------------------------------------------------------
# 7. Property suites
# ---------------------------------------------------------------------------


def ordered_pair(rng, lower, upper):
    a = lower + rng.uniform(0.0, 1.0, lower.size) * (upper - lower)
    b = a + rng.uniform(0.0, 1.0, lower.size) * (upper - a)
    return a, b


def test_property_recovery_solve_and_double_sweep_are_monotone(het1):
    rng = np.random.default_rng(101)
    barriers = compute_barriers(het1)
    grid = het1.cell_grid()
    low, up = barriers.lower_infected.values, barriers.upper_infected.values
    worst_z, worst_square = 0.0, 0.0
    for _ in range(5):
        a, b = ordered_pair(rng, low, up)
        za = solve_recovered(Field(grid, a), het1).values
        zb = solve_recovered(Field(grid, b), het1).values
        worst_z = max(worst_z, float(np.max(za - zb)))
        maa = endemic_map(endemic_map(Field(grid, a), het1), het1).values
        mbb = endemic_map(endemic_map(Field(grid, b), het1), het1).values
        worst_square = max(worst_square, float(np.max(maa - mbb)))
    print(
        f"worst order violation: recovery solve {worst_z:.2e},"
        f" double sweep {worst_square:.2e}"
    )
    assert worst_z <= 1e-9
    assert worst_square <= 1e-7


def test_property_sweep_preserves_the_barrier_interval(het1):
    rng = np.random.default_rng(103)
    barriers = compute_barriers(het1)
    grid = het1.cell_grid()
    low, up = barriers.lower_infected.values, barriers.upper_infected.values
    for k in range(10):
        sample = low + rng.uniform(0.0, 1.0, low.size) * (up - low)
        image = endemic_map(Field(grid, sample), het1)
        assert within_barriers(image, barriers), f"sample {k} escaped"
    print("10 random fields in the barrier interval stayed inside after one sweep")


def test_property_sweep_lipschitz_bound_on_fifty_random_pairs(het1):
    rng = np.random.default_rng(107)
    bound = contraction_bound(het1) + 0.05
    barriers = compute_barriers(het1)
    grid = het1.cell_grid()
    low, up = barriers.lower_infected.values, barriers.upper_infected.values
    worst = 0.0
    for _ in range(50):
        a = low + rng.uniform(0.0, 1.0, low.size) * (up - low)
        b = low + rng.uniform(0.0, 1.0, low.size) * (up - low)
        gap_in = l2_norm(Field(grid, a - b))
        if gap_in == 0.0:
            continue
        fa = endemic_map(Field(grid, a), het1).values
        fb = endemic_map(Field(grid, b), het1).values
        worst = max(worst, l2_norm(Field(grid, fa - fb)) / gap_in)
    print(f"worst observed ratio {worst:.4f} <= bound {bound:.4f}")
    assert worst <= bound


def test_property_barrier_bounds_hold_on_all_named_scenarios(hom1, ext1, het1):
    hom = compute_barriers(hom1)
    assert np.allclose(hom.upper_infected.values, 1.0, atol=1e-7)
    assert np.allclose(hom.upper_recovered.values, 0.2, atol=1e-7)
    assert np.allclose(hom.lower_infected.values, 0.8, atol=1e-6)

    ext = compute_barriers(ext1)
    assert not ext.can_spread
    assert float(ext.upper_infected.values.max()) == 0.0

    het = compute_barriers(het1)
    fields = coefficient_fields(het1)
    ratio = growth_field(het1).values / fields["alpha"].values
    mu_over_lam = fields["mu"].values / fields["lam"].values
    upper, lower = het.upper_infected.values, het.lower_infected.values
    floor = ratio.min() - mu_over_lam.max() * ratio.max()
    print(
        f"het barrier range: upper max {upper.max():.6f} <= {ratio.max():.6f},"
        f" lower min {lower.min():.6f} >= {floor:.6f}"
    )
    assert np.all(lower <= upper + 1e-9)
    assert upper.max() <= ratio.max() + 1e-7
    assert het.upper_recovered.values.max() <= mu_over_lam.max() * upper.max() + 1e-7
    assert lower.min() >= floor - 1e-6


def random_spreading_scenario(rng):
    """Positive growth everywhere and waning far above the contraction
    threshold, so both speeds of the bracket exist."""
    d = float(rng.uniform(0.5, 2.0))
    alpha_mean = float(rng.uniform(0.8, 1.5))
    alpha = cosine(alpha_mean, float(rng.uniform(0.0, 0.3)) * alpha_mean)
    mu_mean = float(rng.uniform(0.6, 1.2))
    mu = cosine(
        mu_mean, float(rng.uniform(0.0, 0.3)) * mu_mean, mode=int(rng.integers(1, 3))
    )
    s0 = Constant((1.3 * mu_mean + 0.3) / (0.7 * alpha_mean))
    trial = make_scenario(
        d=d,
        alpha=alpha,
        mu=mu,
        s0=s0,
        lam=Constant(1.0),
        cell_resolution=64,
        domain_step=0.0625,
    )
    return with_value(trial, lam=Constant(2.0 * waning_threshold(trial)))


def test_property_lower_speed_never_exceeds_upper_on_random_scenarios():
    rng = np.random.default_rng(109)
    gaps = []
    for _ in range(10):
        pair = speed_pair(random_spreading_scenario(rng))
        assert pair.lower is not None
        assert pair.lower.speed <= pair.upper.speed + 2e-5
        gaps.append(pair.upper.speed - pair.lower.speed)
    print(f"10 random scenarios: bracket widths {[f'{g:.4f}' for g in gaps]}")


def test_property_total_mass_conserved_in_every_system():
    runs = {
        "homogeneous 1d": simulate(make_scenario(t_final=2.0)),
        "heterogeneous 1d": simulate(
            make_scenario(
                mu=cosine(1.0, 0.5),
                lam=Constant(20.0),
                cell_resolution=64,
                t_final=2.0,
            )
        ),
        "homogeneous 2d": simulate(
            make_scenario(
                dimension=2,
                cell_resolution=16,
                domain_half_width=4.0,
                domain_step=0.25,
                t_final=1.0,
            )
        ),
    }
    for label, run in runs.items():
        print(f"{label}: relative mass drift {run.mass_drift:.2e}")
        assert run.mass_drift <= 1e-10, label


def test_property_scalar_supersolution_dominates_three_reduced_runs():
    scenarios = (
        make_scenario(dt=0.01, t_final=2.0),
        make_scenario(
            mu=cosine(1.0, 0.5),
            lam=Constant(20.0),
            cell_resolution=64,
            dt=0.01,
            t_final=2.0,
        ),
        make_scenario(
            mu=Constant(2.0),
            s0=Constant(1.0),
            domain_half_width=12.0,
            dt=0.01,
            t_final=4.0,
        ),
    )
    for k, scenario in enumerate(scenarios):
        report = comparison_check(
            simulate(scenario, system="reduced"), simulate(scenario, system="kpp")
        )
        print(
            f"run {k}: max violation {report.max_violation:.2e}"
            f" <= tolerance {report.tolerance:.2e} at {report.times.size} snapshots"
        )
        assert report.passed
        assert np.all(report.violations <= report.tolerance)


# ---------------------------------------------------------------------------
# 8. Threshold bisection against the closed-form critical mean
# ---------------------------------------------------------------------------


SCENARIO_TEMPLATE = """\
name = "threshold-{tag}"
dimension = 1
d = 1.0

[alpha]
kind = "constant"
value = {alpha}

[mu]
kind = "constant"
value = {mu}

[lam]
kind = "constant"
value = 5.0

[s0]
kind = "constant"
value = 2.0

[i0]
center = [0.0]
radius = 1.0
height = 0.1

[grid]
cell_resolution = 32
domain_half_width = 8.0
domain_step = 0.125

[time]
dt = 0.0
t_final = 2.0
"""


def test_threshold_bisection_recovers_critical_susceptible_mean(tmp_path):
    cases = ((1.0, 1.0, 0.5, 2.0), (2.0, 1.0, 0.25, 1.5))
    for alpha, mu, lo, hi in cases:
        tag = f"a{alpha:g}-m{mu:g}"
        path = tmp_path / f"{tag}.toml"
        path.write_text(SCENARIO_TEMPLATE.format(tag=tag, alpha=alpha, mu=mu))
        outdir = tmp_path / f"run-{tag}"
        rc = main(
            ["threshold", str(path), "--outdir", str(outdir),
             "--param", "s0.value", "--lo", str(lo), "--hi", str(hi),
             "--tol", "1e-5", "--quiet"]
        )
        assert rc == 0
        critical = read_report(outdir).quantities["critical_value"]
        print(f"alpha={alpha:g}, mu={mu:g}: critical {critical:.8f} vs {mu / alpha:g}")
        assert critical == pytest.approx(mu / alpha, abs=1e-4)
