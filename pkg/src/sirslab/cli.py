"""Command-line front end.

Subcommands: ``eigen``, ``speed``, ``stationary``, ``simulate``,
``threshold``, ``sweep``, ``report``.  Every compute subcommand reads one
scenario file, writes delimited artifacts plus a deterministic
``report.txt`` into its run directory, and prints a short summary.
Figures are rendered only by the ``report`` subcommand, from the
artifacts on disk.

Anything affecting numerics lives in the scenario file; flags cover I/O
paths, verbosity, and the questions being asked (direction, parameter
axis).  Exit codes: 0 success (including regime diagnoses such as
"disease-free"), 2 validation error, 3 solver failure.  The environment
variable ``SIRSLAB_OUTPUT_ROOT`` relocates the default output root.
"""

from __future__ import annotations

import argparse
import itertools
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

import numpy as np

from .coeffs import (
    Scenario,
    contraction_bound,
    net_growth_rate,
    waning_threshold,
)
from .eigen import drifted_principal_eigenvalue, principal_eigenpair
from .errors import InapplicableError, SolverError, ValidationError
from .evolution import simulate
from .grids import cell_average, write_fields, write_table
from .report import REPORT_NAME, RunReport, read_report, render_figures, stage_timer, write_report
from .scenario_io import (
    dump_scenario,
    load_scenario,
    loads_scenario,
    set_parameter,
    tomllib,
)
from .speeds import speed_pair
from .stationary import compute_barriers, fixed_point

_SWEEP_QUANTITIES = (
    "growth_eigenvalue",
    "upper_speed",
    "lower_speed",
    "waning_threshold",
    "contraction_bound",
    "mean_susceptible",
    "mean_infected",
    "mean_recovered",
)
_SWEEP_DEFAULT = _SWEEP_QUANTITIES[:5]
_SWEEP_CELL_CAP = 4096


def _run_dir(args: argparse.Namespace, stem: str) -> Path:
    if getattr(args, "outdir", None):
        directory = Path(args.outdir)
    else:
        root = Path(os.environ.get("SIRSLAB_OUTPUT_ROOT", "runs"))
        directory = root / stem
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def _parse_vector(text: str, dimension: int, what: str) -> tuple[float, ...]:
    try:
        parts = tuple(float(p) for p in text.split(","))
    except ValueError as exc:
        raise ValidationError(f"{what} must be comma-separated numbers: {exc}")
    if len(parts) != dimension:
        raise ValidationError(
            f"{what} has {len(parts)} components, scenario dimension is {dimension}"
        )
    return parts


def _direction_label(e: Sequence[float]) -> str:
    axes = "xy"
    for a in range(len(e)):
        unit = np.zeros(len(e))
        unit[a] = 1.0
        if np.allclose(e, unit):
            return f"+{axes[a]}"
        if np.allclose(e, -unit):
            return f"-{axes[a]}"
    return "(" + ",".join(f"{c:+.3f}" for c in e) + ")"


# ---------------------------------------------------------------------------
# eigen
# ---------------------------------------------------------------------------


def cmd_eigen(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    outdir = _run_dir(args, f"{scenario.name}-eigen")
    rep = RunReport("eigen", scenario)
    tol = scenario.tolerances
    with stage_timer(rep.timings, "growth"):
        rates = net_growth_rate(scenario)
    with stage_timer(rep.timings, "eigen"):
        pair = principal_eigenpair(
            rates.growth,
            scenario.d,
            value_tol=tol.eigen_value,
            residual_tol=tol.eigen_residual,
        )
    rep.record("growth_eigenvalue", pair.eigenvalue, "eigen.principal_eigenpair")
    rep.record("eigen_residual", pair.residual, "eigen.principal_eigenpair")
    rep.record("eigen_iterations", pair.iterations, "eigen.principal_eigenpair")
    regime = "spreading" if pair.eigenvalue < 0.0 else "disease-free"
    rep.record("regime", regime, "eigen.principal_eigenpair")

    eigenfunction = pair.eigenfunction
    drifted = None
    if args.rho is not None:
        rho = _parse_vector(args.rho, scenario.dimension, "--rho")
        with stage_timer(rep.timings, "drifted"):
            drifted = drifted_principal_eigenvalue(
                rates.growth,
                scenario.d,
                rho,
                value_tol=tol.eigen_value,
                residual_tol=tol.eigen_residual,
            )
        rep.record("drift", list(rho), "eigen.drifted_principal_eigenvalue")
        rep.record(
            "drifted_eigenvalue",
            drifted.eigenvalue,
            "eigen.drifted_principal_eigenvalue",
        )
        eigenfunction = drifted.eigenfunction

    write_fields(
        outdir / "eigenfunction.tsv",
        {"growth": rates.growth, "eigenfunction": eigenfunction},
    )
    rep.artifacts = ("eigenfunction.tsv",)
    write_report(rep, outdir)
    if not args.quiet:
        print(f"principal growth eigenvalue: {pair.eigenvalue:.10g} ({regime})")
        if drifted is not None:
            print(f"tilted eigenvalue at rho=({args.rho}): {drifted.eigenvalue:.10g}")
        print(f"report: {outdir / REPORT_NAME}")
    return 0


# ---------------------------------------------------------------------------
# speed
# ---------------------------------------------------------------------------


def cmd_speed(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    outdir = _run_dir(args, f"{scenario.name}-speed")
    direction = (
        _parse_vector(args.direction, scenario.dimension, "--direction")
        if args.direction
        else None
    )
    rep = RunReport("speed", scenario)
    with stage_timer(rep.timings, "speeds"):
        pair = speed_pair(scenario, direction, full_search=args.full_search)

    label = _direction_label(pair.direction)
    rep.meta["direction"] = list(pair.direction)
    rep.record("speed", pair.upper.speed, "speeds.spreading_speed")
    rep.record(
        "decay_rate",
        float(np.dot(pair.upper.minimizer, pair.upper.direction)),
        "speeds.spreading_speed",
    )
    rep.record(
        "upper",
        {
            "speed": pair.upper.speed,
            "eigenvalue": pair.upper.eigenvalue,
            "minimizer": list(pair.upper.minimizer),
            "evaluations": pair.upper.evaluations,
        },
        "speeds.spreading_speed",
    )
    header = ["decay_rate", "upper_ray_speed"]
    columns = [pair.upper.scan_rates, pair.upper.scan_speeds]
    if pair.lower is not None:
        rep.record(
            "lower",
            {
                "speed": pair.lower.speed,
                "eigenvalue": pair.lower.eigenvalue,
                "minimizer": list(pair.lower.minimizer),
                "evaluations": pair.lower.evaluations,
            },
            "speeds.spreading_speed",
        )
        header.append("lower_ray_speed")
        columns.append(pair.lower.scan_speeds)
    else:
        rep.record("lower_note", pair.lower_note, "speeds.speed_pair")
    write_table(outdir / "speed_scan.tsv", header, columns)
    rep.artifacts = ("speed_scan.tsv",)
    write_report(rep, outdir)
    if not args.quiet:
        print(f"upper spreading speed along {label}: {pair.upper.speed:.6f}")
        if pair.lower is not None:
            print(f"lower spreading speed along {label}: {pair.lower.speed:.6f}")
        else:
            print(f"lower speed unavailable: {pair.lower_note}")
        print(f"report: {outdir / REPORT_NAME}")
    return 0


# ---------------------------------------------------------------------------
# stationary
# ---------------------------------------------------------------------------


def cmd_stationary(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    outdir = _run_dir(args, f"{scenario.name}-stationary")
    rep = RunReport("stationary", scenario)
    with stage_timer(rep.timings, "barriers"):
        barriers = compute_barriers(scenario)
    rep.record(
        "growth_eigenvalue", barriers.growth_eigenvalue, "stationary.compute_barriers"
    )
    if not barriers.can_spread:
        message = (
            "endemic state inapplicable: principal growth eigenvalue "
            f"{barriers.growth_eigenvalue:.6g} >= 0 (disease-free regime)"
        )
        rep.record("regime", "disease-free", "stationary.compute_barriers")
        rep.record("note", message, "stationary.compute_barriers")
        write_report(rep, outdir)
        print(message)
        if not args.quiet:
            print(f"report: {outdir / REPORT_NAME}")
        return 0

    rep.record(
        "damped_growth_eigenvalue",
        barriers.damped_growth_eigenvalue,
        "stationary.compute_barriers",
    )
    with stage_timer(rep.timings, "fixed_point"):
        state = fixed_point(scenario)
    rep.record("regime", "endemic", "stationary.compute_barriers")
    rep.record("iterations", state.iterations, "stationary.fixed_point")
    rep.record(
        "residuals",
        {
            "susceptible": state.residuals[0],
            "infected": state.residuals[1],
            "recovered": state.residuals[2],
        },
        "stationary.fixed_point",
    )
    rep.record(
        "means",
        {
            "susceptible": cell_average(state.susceptible),
            "infected": cell_average(state.infected),
            "recovered": cell_average(state.recovered),
        },
        "stationary.fixed_point",
    )
    rep.record("contraction_estimate", state.contraction_estimate, "stationary.fixed_point")
    rep.record("barrier_contact", state.barrier_contact, "stationary.fixed_point")
    rep.record("lower_barrier_positive", barriers.lower_positive, "stationary.compute_barriers")

    write_fields(
        outdir / "stationary.tsv",
        {
            "susceptible": state.susceptible,
            "infected": state.infected,
            "recovered": state.recovered,
            "upper_infected": barriers.upper_infected,
            "upper_recovered": barriers.upper_recovered,
            "lower_infected": barriers.lower_infected,
        },
    )
    write_table(
        outdir / "increments.tsv",
        ["iteration", "increment"],
        [np.arange(1, len(state.increments) + 1), np.asarray(state.increments)],
    )
    rep.artifacts = ("stationary.tsv", "increments.tsv")
    write_report(rep, outdir)
    if not args.quiet:
        means = rep.quantities["means"]
        print(
            "endemic state means (S, I, R): "
            f"{means['susceptible']:.8f}, {means['infected']:.8f}, "
            f"{means['recovered']:.8f}"
        )
        print(
            f"iterations: {state.iterations}, "
            f"contraction estimate: {state.contraction_estimate}"
        )
        print(f"report: {outdir / REPORT_NAME}")
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def cmd_simulate(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    outdir = _run_dir(args, f"{scenario.name}-simulate")
    rep = RunReport("simulate", scenario)
    rep.meta["system"] = args.system
    with stage_timer(rep.timings, "simulate"):
        result = simulate(
            scenario,
            system=args.system,
            snapshot_every=args.snapshot_every,
            trace_every=args.trace_every,
            threshold=args.threshold,
        )

    rep.record("classification", result.classification, "evolution.simulate")
    rep.record("reference", result.reference, "evolution.simulate")
    rep.record("dt", result.dt, "evolution.simulate")
    rep.record("steps", result.steps, "evolution.simulate")
    rep.record("front_threshold", result.trace.threshold, "evolution.simulate")
    if result.measured_speed is not None:
        rep.record("measured_speed", result.measured_speed, "evolution.measure_speed")
    for k, fit in enumerate(result.speed_fits):
        rep.record(
            f"fit.{k}",
            {
                "direction": list(fit.direction),
                "speed": fit.speed,
                "intercept": fit.intercept,
                "residual_rms": fit.residual_rms,
                "window_lo": fit.window[0],
                "window_hi": fit.window[1],
                "samples": fit.samples,
            },
            "evolution.measure_speed",
        )
    rep.record(
        "center",
        {
            "susceptible": result.center_values[0],
            "infected": result.center_values[1],
            "recovered": result.center_values[2],
        },
        "evolution.simulate",
    )
    if result.center_distance is not None:
        rep.record("center_distance", result.center_distance, "evolution.simulate")
    rep.record("mass_drift", result.mass_drift, "evolution.simulate")

    artifacts = ["front_trace.tsv", "mass.tsv", "final_state.tsv"]
    front_header = ["time"] + [
        f"front[{_direction_label(e)}]" for e in result.trace.directions
    ]
    front_columns = [result.trace.times] + [
        result.trace.positions[:, k] for k in range(len(result.trace.directions))
    ]
    write_table(outdir / "front_trace.tsv", front_header, front_columns)
    write_table(
        outdir / "mass.tsv",
        ["time", "total_mass"],
        [result.mass_times, result.mass_values],
    )
    write_fields(
        outdir / "final_state.tsv",
        {
            "susceptible": result.final.susceptible,
            "infected": result.final.infected,
            "recovered": result.final.recovered,
        },
    )
    if args.snapshots:
        snap_dir = outdir / "snapshots"
        snap_dir.mkdir(exist_ok=True)
        for idx, snap in enumerate(result.snapshots):
            name = f"snapshots/state_{idx:04d}.tsv"
            write_fields(
                outdir / name,
                {
                    "susceptible": snap.susceptible,
                    "infected": snap.infected,
                    "recovered": snap.recovered,
                },
            )
            artifacts.append(name)
        rep.meta["snapshot_times"] = [s.time for s in result.snapshots]
    rep.artifacts = tuple(artifacts)
    write_report(rep, outdir)
    if not args.quiet:
        print(f"classification: {result.classification} (reference: {result.reference})")
        if result.measured_speed is not None:
            print(f"measured front speed: {result.measured_speed:.6f}")
        if result.center_distance is not None:
            print(f"center-region distance to reference: {result.center_distance:.3e}")
        print(f"report: {outdir / REPORT_NAME}")
    return 0


# ---------------------------------------------------------------------------
# threshold
# ---------------------------------------------------------------------------


def cmd_threshold(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    outdir = _run_dir(args, f"{scenario.name}-threshold")
    if not args.hi > args.lo:
        raise ValidationError("--hi must exceed --lo")
    if not args.tol > 0:
        raise ValidationError("--tol must be positive")
    rep = RunReport("threshold", scenario)
    rep.meta["param"] = args.param
    rep.meta["axis"] = {"lo": args.lo, "hi": args.hi, "tol": args.tol}

    rows: list[tuple[int, float, float, float, float]] = []

    def eigen_at(value: float, k: int, lo: float, hi: float) -> float:
        probe = set_parameter(scenario, args.param, value)
        rates = net_growth_rate(probe)
        eig = principal_eigenpair(
            rates.growth,
            probe.d,
            value_tol=probe.tolerances.eigen_value,
            residual_tol=probe.tolerances.eigen_residual,
        ).eigenvalue
        rows.append((k, lo, hi, value, eig))
        return eig

    with stage_timer(rep.timings, "bisection"):
        lo, hi = float(args.lo), float(args.hi)
        f_lo = eigen_at(lo, 0, lo, hi)
        f_hi = eigen_at(hi, 1, lo, hi)
        critical: float | None = None
        if f_lo == 0.0:
            critical = lo
        elif f_hi == 0.0:
            critical = hi
        elif np.sign(f_lo) == np.sign(f_hi):
            message = (
                f"no sign change of the growth eigenvalue for {args.param} on "
                f"[{args.lo:g}, {args.hi:g}] (endpoint values {f_lo:.6g}, {f_hi:.6g})"
            )
            rep.record("note", message, "eigen.principal_eigenpair")
            write_table(
                outdir / "threshold_trace.tsv",
                ["iteration", "lower", "upper", "midpoint", "eigenvalue"],
                [np.asarray(col) for col in zip(*rows)],
            )
            rep.artifacts = ("threshold_trace.tsv",)
            write_report(rep, outdir)
            print(message)
            return 0
        else:
            k = 2
            while hi - lo > args.tol and k < args.max_iter:
                mid = 0.5 * (lo + hi)
                f_mid = eigen_at(mid, k, lo, hi)
                k += 1
                if f_mid == 0.0:
                    lo = hi = mid
                    break
                if np.sign(f_mid) == np.sign(f_lo):
                    lo, f_lo = mid, f_mid
                else:
                    hi, f_hi = mid, f_mid
            critical = 0.5 * (lo + hi)

    rep.record("critical_value", float(critical), "eigen.principal_eigenpair")
    rep.record("bracket", {"lo": lo, "hi": hi}, "eigen.principal_eigenpair")
    rep.record("evaluations", len(rows), "eigen.principal_eigenpair")
    write_table(
        outdir / "threshold_trace.tsv",
        ["iteration", "lower", "upper", "midpoint", "eigenvalue"],
        [np.asarray(col) for col in zip(*rows)],
    )
    rep.artifacts = ("threshold_trace.tsv",)
    write_report(rep, outdir)
    if not args.quiet:
        print(
            f"critical {args.param}: {critical:.10g} "
            f"(axis tolerance {args.tol:g}, {len(rows)} eigensolves)"
        )
        print(f"report: {outdir / REPORT_NAME}")
    return 0


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def _load_sweep(path: Path) -> tuple[Scenario, list[tuple[str, list[float]]], list[str], int]:
    try:
        raw = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"{path}: invalid TOML: {exc}") from exc
    allowed = {"scenario", "axes", "quantities", "max_cells"}
    unknown = set(raw) - allowed
    if unknown:
        raise ValidationError(f"{path}: unknown sweep keys {sorted(unknown)}")
    if "scenario" not in raw:
        raise ValidationError(f"{path}: sweep needs a 'scenario' entry")
    base_path = Path(raw["scenario"])
    if not base_path.is_absolute():
        base_path = path.parent / base_path
    base = load_scenario(base_path)

    axes: list[tuple[str, list[float]]] = []
    for k, axis in enumerate(raw.get("axes", [])):
        if not isinstance(axis, dict) or set(axis) != {"param", "values"}:
            raise ValidationError(
                f"{path}: axes[{k}] must have exactly 'param' and 'values'"
            )
        values = [float(v) for v in axis["values"]]
        if not values:
            raise ValidationError(f"{path}: axes[{k}].values is empty")
        if not all(math.isfinite(v) for v in values):
            raise ValidationError(f"{path}: axes[{k}].values must be finite")
        axes.append((str(axis["param"]), values))

    quantities = [str(q) for q in raw.get("quantities", _SWEEP_DEFAULT)]
    for q in quantities:
        if q not in _SWEEP_QUANTITIES:
            raise ValidationError(
                f"{path}: unknown quantity {q!r} (choose from {_SWEEP_QUANTITIES})"
            )
    cap = int(raw.get("max_cells", _SWEEP_CELL_CAP))
    size = 1
    for _, values in axes:
        size *= len(values)
    if size > cap:
        raise ValidationError(f"{path}: sweep has {size} cells, cap is {cap}")
    return base, axes, quantities, size


def _cell_rates(scenario: Scenario, cache: dict):
    if "rates" not in cache:
        cache["rates"] = net_growth_rate(scenario)
    return cache["rates"]


def _cell_pair(scenario: Scenario, cache: dict):
    if "pair" not in cache:
        cache["pair"] = speed_pair(scenario)
    return cache["pair"]


def _cell_state(scenario: Scenario, cache: dict):
    if "state" not in cache:
        cache["state"] = fixed_point(scenario)
    return cache["state"]


def _cell_quantity(name: str, scenario: Scenario, cache: dict) -> float:
    if name == "growth_eigenvalue":
        tol = scenario.tolerances
        return principal_eigenpair(
            _cell_rates(scenario, cache).growth,
            scenario.d,
            value_tol=tol.eigen_value,
            residual_tol=tol.eigen_residual,
        ).eigenvalue
    if name == "upper_speed":
        return _cell_pair(scenario, cache).upper.speed
    if name == "lower_speed":
        pair = _cell_pair(scenario, cache)
        if pair.lower is None:
            raise InapplicableError(pair.lower_note)
        return pair.lower.speed
    if name == "waning_threshold":
        return waning_threshold(scenario)
    if name == "contraction_bound":
        return contraction_bound(scenario)
    if name == "mean_susceptible":
        return cell_average(_cell_state(scenario, cache).susceptible)
    if name == "mean_infected":
        return cell_average(_cell_state(scenario, cache).infected)
    if name == "mean_recovered":
        return cell_average(_cell_state(scenario, cache).recovered)
    raise ValidationError(f"unknown sweep quantity {name!r}")


def _sweep_cell(payload: tuple) -> str:
    """Compute one sweep cell and write its row marker; safe to rerun."""
    index, base, assignments, quantities, cell_dir = payload
    cell_dir = Path(cell_dir)
    row_path = cell_dir / "row.tsv"
    if row_path.exists():
        return "cached"
    cell_dir.mkdir(parents=True, exist_ok=True)

    values = [f"{v:.17g}" for _, v in assignments]
    notes: list[str] = []
    results: list[str] = []
    status = "ok"
    try:
        scenario = base
        for param, value in assignments:
            scenario = set_parameter(scenario, param, value)
        cache: dict = {}
        for name in quantities:
            try:
                results.append(f"{_cell_quantity(name, scenario, cache):.17g}")
            except InapplicableError as exc:
                results.append("nan")
                notes.append(f"{name}: {exc}")
    except Exception as exc:  # cell isolation: a failure is one row, not a crash
        results += ["nan"] * (len(quantities) - len(results))
        status = f"failed: {exc}"
    if notes and status == "ok":
        status = "inapplicable: " + "; ".join(notes)
    status = status.replace("\t", " ").replace("\n", " ")

    line = "\t".join(values + results + [status]) + "\n"
    tmp = row_path.with_suffix(".tmp")
    tmp.write_text(line)
    os.replace(tmp, row_path)
    return status


def cmd_sweep(args: argparse.Namespace) -> int:
    sweep_path = Path(args.sweepfile)
    base, axes, quantities, size = _load_sweep(sweep_path)
    outdir = _run_dir(args, f"{sweep_path.stem}-sweep")
    cells_dir = outdir / "cells"

    index_ranges = [range(len(values)) for _, values in axes]
    payloads = []
    for index, combo in enumerate(itertools.product(*index_ranges)):
        assignments = [
            (param, values[i]) for (param, values), i in zip(axes, combo)
        ]
        payloads.append(
            (
                index,
                base,
                assignments,
                quantities,
                str(cells_dir / f"cell_{index:05d}"),
            )
        )

    pending = [p for p in payloads if not (Path(p[4]) / "row.tsv").exists()]
    if not args.quiet:
        print(
            f"sweep: {size} cells ({size - len(pending)} cached), "
            f"{args.jobs} worker(s)"
        )

    rep = RunReport("sweep", base)
    rep.meta["axes"] = [param for param, _ in axes]
    rep.meta["quantities"] = list(quantities)
    with stage_timer(rep.timings, "cells"):
        if args.jobs > 1 and len(pending) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                list(pool.map(_sweep_cell, pending))
        else:
            for payload in pending:
                _sweep_cell(payload)

    # merge single-threaded, in deterministic cell order
    header = [param for param, _ in axes] + list(quantities) + ["status"]
    lines = ["\t".join(header) + "\n"]
    failed = 0
    for payload in payloads:
        row_path = Path(payload[4]) / "row.tsv"
        if not row_path.exists():
            raise SolverError(
                f"sweep cell {payload[0]} left no row marker (worker crashed?)"
            )
        line = row_path.read_text()
        if "failed:" in line:
            failed += 1
        lines.append(line)
    (outdir / "sweep.tsv").write_text("".join(lines))

    rep.record("cells_total", size, "cli.cmd_sweep")
    rep.record("cells_failed", failed, "cli.cmd_sweep")
    rep.artifacts = ("sweep.tsv",)
    write_report(rep, outdir)
    if not args.quiet:
        print(f"sweep table: {outdir / 'sweep.tsv'} ({failed} failed cells)")
    return 0


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


def cmd_report(args: argparse.Namespace) -> int:
    run_dir = Path(args.run_dir)
    report_path = run_dir / REPORT_NAME if run_dir.is_dir() else run_dir
    rep = read_report(report_path)
    sys.stdout.write(report_path.read_text())
    if args.check:
        again = loads_scenario(dump_scenario(rep.scenario), source="<round-trip>")
        if again != rep.scenario:
            raise ValidationError("scenario round-trip mismatch")
        print("round-trip check: ok")
    if not args.no_figures:
        for path in render_figures(report_path.parent):
            print(f"figure: {path}")
    return 0


# ---------------------------------------------------------------------------
# parser / entry point
# ---------------------------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("scenario", type=Path, help="scenario file (TOML)")
    sub.add_argument(
        "--outdir",
        type=Path,
        default=None,
        help="run directory (default: $SIRSLAB_OUTPUT_ROOT/<name>-<command>)",
    )
    sub.add_argument("-q", "--quiet", action="store_true", help="suppress summaries")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sirslab",
        description=(
            "Numerical laboratory for spreading fronts and endemic equilibria "
            "of a spatially periodic SIRS reaction-diffusion model."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eigen", help="principal growth eigenvalue and eigenfunction")
    _add_common(p)
    p.add_argument(
        "--rho",
        default=None,
        help="also solve the tilted operator at this drift (comma separated)",
    )
    p.set_defaults(handler=cmd_eigen)

    p = sub.add_parser("speed", help="directional spreading speed bracket")
    _add_common(p)
    p.add_argument(
        "--direction", default=None, help="propagation direction (comma separated)"
    )
    p.add_argument(
        "--full-search",
        action="store_true",
        help="refine over the full tilt plane (dimension 2)",
    )
    p.set_defaults(handler=cmd_speed)

    p = sub.add_parser("stationary", help="endemic stationary state and barriers")
    _add_common(p)
    p.set_defaults(handler=cmd_stationary)

    p = sub.add_parser("simulate", help="time evolution with front tracking")
    _add_common(p)
    p.add_argument(
        "--system",
        choices=("full", "reduced", "kpp"),
        default="full",
        help="which system to integrate",
    )
    p.add_argument(
        "--snapshots",
        action="store_true",
        help="write every snapshot as a separate table",
    )
    p.add_argument("--snapshot-every", type=float, default=None, metavar="T")
    p.add_argument("--trace-every", type=float, default=None, metavar="T")
    p.add_argument(
        "--threshold",
        type=float,
        default=None,
        help="front-tracking level (default: half the endemic minimum)",
    )
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser(
        "threshold", help="bisect one parameter for the spreading/extinction boundary"
    )
    _add_common(p)
    p.add_argument("--param", required=True, help="dotted parameter path, e.g. s0.value")
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-4, help="axis tolerance")
    p.add_argument("--max-iter", type=int, default=200)
    p.set_defaults(handler=cmd_threshold)

    p = sub.add_parser("sweep", help="parameter sweep over a scenario cross-product")
    p.add_argument("sweepfile", type=Path, help="sweep description (TOML)")
    p.add_argument("--outdir", type=Path, default=None)
    p.add_argument("-q", "--quiet", action="store_true")
    p.add_argument(
        "--jobs",
        type=int,
        default=os.cpu_count() or 1,
        help="worker processes (default: CPU count)",
    )
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("report", help="print a run report and render its figures")
    p.add_argument("run_dir", type=Path, help="run directory or report file")
    p.add_argument(
        "--check", action="store_true", help="verify the scenario round-trip"
    )
    p.add_argument(
        "--no-figures", action="store_true", help="skip figure rendering"
    )
    p.set_defaults(handler=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InapplicableError as exc:
        print(str(exc))
        return 0
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
