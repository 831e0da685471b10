"""Shared fixtures: named scenarios from scenarios/ and small fast builders."""

from pathlib import Path
from time import perf_counter

import pytest

from sirslab import (
    BumpSpec,
    Constant,
    CosineSeries,
    CosineTerm,
    Scenario,
    load_scenario,
    simulate,
)

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture(scope="session")
def hom1():
    return load_scenario(SCENARIOS / "hom1.toml")


@pytest.fixture(scope="session")
def ext1():
    return load_scenario(SCENARIOS / "ext1.toml")


@pytest.fixture(scope="session")
def het1():
    return load_scenario(SCENARIOS / "het1.toml")


@pytest.fixture(scope="session")
def hom1_run(hom1):
    """The flagship spreading run (L=300, T=120), shared across test files.

    Returns (run, wall_seconds) so the acceptance test can also check runtime.
    """
    start = perf_counter()
    result = simulate(hom1)
    return result, perf_counter() - start


def make_scenario(
    *,
    dimension=1,
    d=1.0,
    alpha=None,
    mu=None,
    lam=None,
    s0=None,
    i0=None,
    cell_resolution=32,
    domain_half_width=8.0,
    domain_step=0.125,
    boundary="periodic",
    dt=0.0,
    t_final=4.0,
    name="test",
):
    """Small, quick-to-solve scenario; homogeneous by default."""
    return Scenario(
        dimension=dimension,
        d=d,
        alpha=alpha if alpha is not None else Constant(1.0),
        mu=mu if mu is not None else Constant(1.0),
        lam=lam if lam is not None else Constant(5.0),
        s0=s0 if s0 is not None else Constant(2.0),
        i0=i0 if i0 is not None else BumpSpec((0.0,) * dimension, 1.0, 0.1),
        cell_resolution=cell_resolution,
        domain_half_width=domain_half_width,
        domain_step=domain_step,
        boundary=boundary,
        dt=dt,
        t_final=t_final,
        name=name,
    )


def cosine(mean, amplitude, mode=1):
    """Single-mode periodic coefficient mean + amplitude*cos(2*pi*mode*x)."""
    return CosineSeries(mean, (CosineTerm(amplitude, (mode,), 0.0),))


@pytest.fixture
def small_hom():
    return make_scenario()


@pytest.fixture
def small_het():
    return make_scenario(
        mu=cosine(1.0, 0.5),
        lam=Constant(20.0),
        cell_resolution=64,
        domain_step=0.0625,
    )
