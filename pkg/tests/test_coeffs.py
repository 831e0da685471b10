"""Coefficient evaluators, scenario validation, and the derived rate constants."""

import numpy as np
import pytest

from conftest import cosine, make_scenario
from sirslab import (
    BumpSpec,
    CellGrid,
    Constant,
    CosineSeries,
    CosineTerm,
    InapplicableError,
    PiecewiseConstant,
    ValidationError,
    contraction_bound,
    growth_field,
    initial_infection,
    is_homogeneous,
    net_growth_rate,
    sample_coefficient,
    susceptible_mean,
    waning_threshold,
    with_value,
)


def pts(*xs):
    return np.array([[x] for x in xs], dtype=float)


def test_constant_evaluator_everywhere():
    spec = Constant(1.0)
    for grid in (CellGrid(1, 32), CellGrid(2, 16)):
        field = sample_coefficient(spec, grid)
        assert np.all(field.values == 1.0)
        assert field.values.size == grid.num_points


def test_cosine_series_point_values():
    spec = cosine(1.0, 0.5)
    values = spec.evaluate(pts(0.0, 0.25, 0.5))
    assert np.allclose(values, [1.5, 1.0, 0.5], atol=1e-15)


def test_piecewise_constant_point_values():
    spec = PiecewiseConstant(breakpoints=(0.5,), values=(2.0, 1.0))
    values = spec.evaluate(pts(0.25, 0.75))
    assert values[0] == 2.0
    assert values[1] == 1.0
    # right-continuous at the breakpoint
    assert spec.evaluate(pts(0.5))[0] == 1.0


def test_coefficient_periodicity():
    rng = np.random.default_rng(7)
    x = rng.uniform(0.0, 1.0, size=(40, 1))
    specs = [
        Constant(1.3),
        CosineSeries(1.0, (CosineTerm(0.5, (1,), 0.3), CosineTerm(0.1, (3,), 1.1))),
        PiecewiseConstant((0.25, 0.7), (1.0, 2.0, 0.5)),
    ]
    for spec in specs:
        assert np.allclose(spec.evaluate(x), spec.evaluate(x + 1.0), atol=1e-12)
    spec2d = CosineSeries(2.0, (CosineTerm(0.5, (1, 2), 0.0),))
    xy = rng.uniform(0.0, 1.0, size=(40, 2))
    assert np.allclose(spec2d.evaluate(xy), spec2d.evaluate(xy + 1.0), atol=1e-12)


def test_sample_matches_direct_evaluation():
    grid = CellGrid(1, 64)
    spec = cosine(2.0, 0.25)
    field = sample_coefficient(spec, grid)
    assert np.array_equal(field.values, spec.evaluate(grid.points()))


def test_bump_profile():
    bump = BumpSpec(center=(0.0,), radius=2.0, height=0.125)
    x = pts(0.0, 1.0, 2.0, 3.0, -1.0)
    values = bump.evaluate(x)
    assert values[0] == pytest.approx(0.125)
    assert values[1] == pytest.approx(0.125 * np.cos(np.pi / 4) ** 2)
    assert values[2] == 0.0
    assert values[3] == 0.0
    assert values[4] == values[1]
    assert np.all(values >= 0.0)


def test_growth_field_homogeneous():
    s = make_scenario()  # alpha=1, mu=1, s0=2
    assert susceptible_mean(s) == pytest.approx(2.0, abs=1e-14)
    assert np.allclose(growth_field(s).values, 1.0, atol=1e-14)


def test_growth_field_extinction_regime():
    s = make_scenario(mu=Constant(2.0), s0=Constant(1.0), lam=Constant(1.0))
    assert susceptible_mean(s) == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(growth_field(s).values, -1.0, atol=1e-14)


def test_growth_field_heterogeneous(het1):
    grid = het1.cell_grid()
    x = grid.points()[:, 0]
    expected = 1.0 - 0.5 * np.cos(2.0 * np.pi * x)
    assert susceptible_mean(het1) == pytest.approx(2.0, abs=1e-12)
    assert np.allclose(growth_field(het1).values, expected, atol=1e-12)


def test_susceptible_mean_exact_for_resolved_modes():
    s = make_scenario(s0=cosine(2.0, 1.0))
    assert susceptible_mean(s) == pytest.approx(2.0, abs=1e-12)
    # refinement does not move the mean for smooth (trigonometric) profiles
    finer = with_value(s, cell_resolution=64)
    assert abs(susceptible_mean(s) - susceptible_mean(finer)) < 1e-13


def test_waning_threshold_homogeneous():
    assert waning_threshold(make_scenario()) == pytest.approx(2.0, abs=1e-12)
    s = make_scenario(alpha=Constant(2.0), s0=Constant(1.0))
    assert waning_threshold(s) == pytest.approx(2.0, abs=1e-12)


def test_waning_threshold_heterogeneous(het1):
    # extrema 1.5 and 0.5 of both mu and the growth rate sit on grid points
    assert waning_threshold(het1) == pytest.approx(9.0, abs=1e-12)


def test_waning_threshold_inapplicable(ext1):
    with pytest.raises(InapplicableError, match="inapplicable"):
        waning_threshold(ext1)


def test_contraction_bound_homogeneous():
    assert contraction_bound(make_scenario()) == pytest.approx(0.2, abs=1e-15)
    s = make_scenario(lam=Constant(2.0))
    assert contraction_bound(s) == pytest.approx(0.5, abs=1e-15)


def test_contraction_bound_heterogeneous(het1):
    # (max alpha * max ratio * max mu) / (min alpha * min lam * gap) with
    # ratio in [0.5, 1.5] and gap = 0.5 - (1.5/20)*1.5 = 31/80
    assert contraction_bound(het1) == pytest.approx(9.0 / 31.0, abs=1e-12)


def test_contraction_bound_unavailable(ext1):
    with pytest.raises(InapplicableError, match="unavailable"):
        contraction_bound(ext1)


def test_net_growth_rate_notes(ext1):
    rates = net_growth_rate(ext1)
    assert rates.waning_threshold is None
    assert rates.contraction_bound is None
    assert "inapplicable" in rates.waning_note
    assert "unavailable" in rates.contraction_note
    ok = net_growth_rate(make_scenario())
    assert ok.waning_threshold == pytest.approx(2.0)
    assert ok.contraction_bound == pytest.approx(0.2)
    assert ok.waning_note == "" and ok.contraction_note == ""


def test_derived_constants_translation_invariant():
    """Shifting every coefficient by the same cell fraction changes nothing."""
    shift = 0.25  # a multiple of the grid spacing, so sample sets coincide
    base = make_scenario(mu=cosine(1.0, 0.4), cell_resolution=64)
    moved = with_value(
        base, mu=CosineSeries(1.0, (CosineTerm(0.4, (1,), 2.0 * np.pi * shift),))
    )
    assert waning_threshold(moved) == pytest.approx(waning_threshold(base), abs=1e-12)
    assert contraction_bound(moved) == pytest.approx(contraction_bound(base), abs=1e-12)


def test_is_homogeneous(hom1, het1):
    assert is_homogeneous(hom1)
    assert not is_homogeneous(het1)


def test_with_value_revalidates():
    s = make_scenario()
    assert with_value(s, d=2.0).d == 2.0
    with pytest.raises(ValidationError, match="diffusivity"):
        with_value(s, d=-2.0)


def test_validation_rejects_nonpositive_coefficient():
    with pytest.raises(ValidationError, match="'mu'"):
        make_scenario(mu=cosine(0.2, 0.5))
    with pytest.raises(ValidationError, match="'alpha'"):
        make_scenario(alpha=Constant(-1.0))


def test_validation_rejects_bad_bump():
    with pytest.raises(ValidationError, match="radius"):
        make_scenario(i0=BumpSpec((0.0,), -1.0, 0.1))
    with pytest.raises(ValidationError, match="height"):
        make_scenario(i0=BumpSpec((0.0,), 1.0, 0.0))
    with pytest.raises(ValidationError, match="support"):
        make_scenario(i0=BumpSpec((7.5,), 1.0, 0.1))  # reaches past L=8
    with pytest.raises(ValidationError, match="components"):
        make_scenario(i0=BumpSpec((0.0, 0.0), 1.0, 0.1))


def test_validation_rejects_bad_time_settings():
    with pytest.raises(ValidationError, match="dt"):
        make_scenario(dt=-0.1)
    with pytest.raises(ValidationError, match="t_final"):
        make_scenario(t_final=0.0)


def test_validation_rejects_incommensurate_grids():
    with pytest.raises(ValidationError, match="multiple"):
        make_scenario(cell_resolution=24, domain_step=1.0 / 32.0)
    with pytest.raises(ValidationError, match="1/step"):
        make_scenario(domain_step=0.3)


def test_validation_rejects_frequency_dimension_mismatch():
    with pytest.raises(ValidationError, match="frequency"):
        make_scenario(
            dimension=2,
            mu=cosine(1.0, 0.2),  # 1D frequency on a 2D scenario
            i0=BumpSpec((0.0, 0.0), 1.0, 0.1),
            domain_half_width=4.0,
            cell_resolution=16,
            domain_step=0.25,
        )


def test_piecewise_validation():
    with pytest.raises(ValidationError, match="breakpoints"):
        make_scenario(mu=PiecewiseConstant((0.5,), (1.0, 2.0, 3.0)))
    with pytest.raises(ValidationError, match="inside"):
        make_scenario(mu=PiecewiseConstant((1.5,), (1.0, 2.0)))
    with pytest.raises(ValidationError, match="increasing"):
        make_scenario(mu=PiecewiseConstant((0.6, 0.4), (1.0, 2.0, 3.0)))


def test_initial_infection_field():
    s = make_scenario()
    bump = initial_infection(s)
    grid = s.domain_grid()
    assert bump.grid == grid
    x = grid.points()[:, 0]
    assert bump.values[np.argmin(np.abs(x))] == pytest.approx(s.i0.height)
    assert np.all(bump.values[np.abs(x) >= s.i0.radius] == 0.0)
    assert np.all(bump.values >= 0.0)
