"""Run reports: deterministic key/value summaries of every run, plus
figure rendering from the delimited artifacts.

A run directory holds ``report.txt`` (structured ``key = value`` lines,
byte-identical across repeated runs on one machine), ``timing.txt``
(wall-clock per stage, kept separate so the report itself stays
deterministic), and the tabular artifacts the subcommand wrote.

Every ``result.*`` entry must carry a ``provenance.*`` line naming the
module operation that produced it; ``read_report`` rejects orphans.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from pathlib import Path
from time import perf_counter

import numpy as np

from .coeffs import Scenario
from .errors import ValidationError
from .scenario_io import scenario_digest, scenario_from_mapping, scenario_to_mapping

try:  # installed version, if the package metadata is available
    from importlib.metadata import PackageNotFoundError, version

    _VERSION = version("sirslab")
except PackageNotFoundError:  # pragma: no cover - editable-install edge
    _VERSION = "0.1.0"

REPORT_NAME = "report.txt"
TIMING_NAME = "timing.txt"
_HEADER = "# sirslab run report"


@dataclass
class RunReport:
    """Everything needed to reconstruct and audit one CLI run."""

    command: str
    scenario: Scenario
    quantities: dict[str, object] = field(default_factory=dict)
    provenance: dict[str, str] = field(default_factory=dict)
    artifacts: tuple[str, ...] = ()
    meta: dict[str, object] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    version: str = _VERSION
    digest: str = ""

    def __post_init__(self) -> None:
        if not self.digest:
            self.digest = scenario_digest(self.scenario)

    def record(self, name: str, value: object, provenance: str) -> None:
        """Add a computed quantity together with the operation it came from."""
        self.quantities[name] = value
        self.provenance.setdefault(name.split(".")[0], provenance)


class stage_timer:
    """Context manager accumulating wall-clock seconds into a dict."""

    def __init__(self, timings: dict[str, float], name: str) -> None:
        self._timings = timings
        self._name = name

    def __enter__(self) -> "stage_timer":
        self._start = perf_counter()
        return self

    def __exit__(self, *exc: object) -> None:
        elapsed = perf_counter() - self._start
        self._timings[self._name] = self._timings.get(self._name, 0.0) + elapsed


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _plain(value: object) -> object:
    """Coerce to types whose repr round-trips through ast.literal_eval."""
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (int, float, str, bool)) or value is None:
        return value
    raise ValidationError(f"cannot serialize report value of type {type(value)!r}")


def _flatten(prefix: str, value: object, out: list[tuple[str, object]]) -> None:
    if isinstance(value, dict):
        for key, sub in value.items():
            _flatten(f"{prefix}.{key}", sub, out)
    else:
        out.append((prefix, _plain(value)))


def report_lines(report: RunReport) -> list[str]:
    """Deterministic line rendering (no wall-clock, no absolute paths)."""
    lines = [_HEADER]
    lines.append(f"meta.command = {report.command!r}")
    lines.append(f"meta.version = {report.version!r}")
    lines.append(f"meta.scenario_digest = {report.digest!r}")
    lines.append(f"meta.artifacts = {list(report.artifacts)!r}")
    for key in sorted(report.meta):
        pairs: list[tuple[str, object]] = []
        _flatten(f"meta.{key}", report.meta[key], pairs)
        lines.extend(f"{k} = {v!r}" for k, v in pairs)
    scenario_pairs: list[tuple[str, object]] = []
    _flatten("scenario", scenario_to_mapping(report.scenario), scenario_pairs)
    lines.extend(f"{k} = {v!r}" for k, v in scenario_pairs)
    for name, value in report.quantities.items():
        pairs = []
        _flatten(f"result.{name}", value, pairs)
        lines.extend(f"{k} = {v!r}" for k, v in pairs)
    for name in sorted(report.provenance):
        lines.append(f"provenance.{name} = {report.provenance[name]!r}")
    return lines


def write_report(report: RunReport, directory: Path | str) -> Path:
    """Write report.txt (and timing.txt when timings were recorded)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / REPORT_NAME
    path.write_text("\n".join(report_lines(report)) + "\n")
    if report.timings:
        rows = ["stage\tseconds"]
        rows += [f"{k}\t{v:.6f}" for k, v in report.timings.items()]
        (directory / TIMING_NAME).write_text("\n".join(rows) + "\n")
    return path


def _unflatten(pairs: dict[str, object]) -> dict:
    root: dict = {}
    for key, value in pairs.items():
        node = root
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ValidationError(f"report key {key!r} conflicts with a value")
        node[parts[-1]] = value
    return root


def read_report(path: Path | str) -> RunReport:
    """Parse a report back, reconstructing the scenario and checking the
    schema: every result group must name its provenance."""
    path = Path(path)
    if path.is_dir():
        path = path / REPORT_NAME
    entries: dict[str, object] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition(" = ")
        if not sep:
            raise ValidationError(f"{path.name}:{lineno}: expected 'key = value'")
        try:
            entries[key.strip()] = ast.literal_eval(value.strip())
        except (ValueError, SyntaxError) as exc:
            raise ValidationError(
                f"{path.name}:{lineno}: unreadable value for {key.strip()!r}: {exc}"
            ) from exc

    scenario_map = _unflatten(
        {
            key[len("scenario.") :]: value
            for key, value in entries.items()
            if key.startswith("scenario.")
        }
    )
    scenario = scenario_from_mapping(scenario_map, source=str(path))

    quantities: dict[str, object] = {}
    provenance: dict[str, str] = {}
    meta: dict[str, object] = {}
    for key, value in entries.items():
        if key.startswith("result."):
            quantities[key[len("result.") :]] = value
        elif key.startswith("provenance."):
            provenance[key[len("provenance.") :]] = str(value)
        elif key.startswith("meta.") and key not in (
            "meta.command",
            "meta.version",
            "meta.scenario_digest",
            "meta.artifacts",
        ):
            meta[key[len("meta.") :]] = value

    for name in quantities:
        if name.split(".")[0] not in provenance:
            raise ValidationError(
                f"report value result.{name} has no provenance entry"
            )

    artifacts = entries.get("meta.artifacts", [])
    if not isinstance(artifacts, list):
        raise ValidationError("meta.artifacts must be a list")

    timings: dict[str, float] = {}
    timing_path = path.with_name(TIMING_NAME)
    if timing_path.exists():
        rows = timing_path.read_text().splitlines()
        for row in rows[1:]:
            stage, _, seconds = row.partition("\t")
            if stage:
                timings[stage] = float(seconds)

    report = RunReport(
        command=str(entries.get("meta.command", "")),
        scenario=scenario,
        quantities=quantities,
        provenance=provenance,
        artifacts=tuple(str(a) for a in artifacts),
        meta=_unflatten(meta),
        timings=timings,
        version=str(entries.get("meta.version", "")),
        digest=str(entries.get("meta.scenario_digest", "")),
    )
    if report.digest != scenario_digest(scenario):
        raise ValidationError(
            "scenario digest mismatch: report was edited or scenario "
            "serialization changed"
        )
    return report


# ---------------------------------------------------------------------------
# Figures
# ---------------------------------------------------------------------------


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _load_table(path: Path) -> tuple[list[str], np.ndarray]:
    with path.open() as handle:
        names = handle.readline().rstrip("\n").split("\t")
    data = np.loadtxt(path, skiprows=1, ndmin=2)
    return names, data


def _grid_shape(coords: np.ndarray) -> tuple[int, ...]:
    if coords.shape[1] == 1:
        return (coords.shape[0],)
    nx = np.unique(coords[:, 0]).size
    ny = np.unique(coords[:, 1]).size
    return (nx, ny)


def _split_fields(names: list[str], data: np.ndarray) -> tuple[np.ndarray, dict]:
    ncoord = 2 if names[:2] == ["x", "y"] else 1
    coords = data[:, :ncoord]
    fields = {name: data[:, ncoord + k] for k, name in enumerate(names[ncoord:])}
    return coords, fields


def _render_front_trace(path: Path, report: RunReport | None, plt) -> object:
    names, data = _load_table(path)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    times = data[:, 0]
    for k, name in enumerate(names[1:]):
        pos = data[:, 1 + k]
        finite = np.isfinite(pos)
        ax.plot(times[finite], pos[finite], label=name)
        if report is None:
            continue
        speed = report.quantities.get(f"fit.{k}.speed")
        intercept = report.quantities.get(f"fit.{k}.intercept")
        lo = report.quantities.get(f"fit.{k}.window_lo")
        hi = report.quantities.get(f"fit.{k}.window_hi")
        if None not in (speed, intercept, lo, hi):
            tt = np.linspace(float(lo), float(hi), 2)
            ax.plot(tt, float(speed) * tt + float(intercept), "k--", lw=1)
    ax.set_xlabel("time")
    ax.set_ylabel("front position")
    ax.legend(fontsize=8)
    ax.set_title("front trace")
    return fig


def _render_speed_scan(path: Path, report: RunReport | None, plt) -> object:
    names, data = _load_table(path)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for k, name in enumerate(names[1:], start=1):
        ax.plot(data[:, 0], data[:, k], "o-", ms=3, label=name)
    if report is not None:
        rate = report.quantities.get("decay_rate")
        speed = report.quantities.get("speed")
        if rate is not None and speed is not None:
            ax.plot([float(rate)], [float(speed)], "r*", ms=12)
    ax.set_xscale("log")
    ax.set_xlabel(names[0])
    ax.set_ylabel("ray speed")
    ax.legend(fontsize=8)
    ax.set_title("ray speed vs decay rate")
    return fig


def _render_profiles(path: Path, title: str, plt) -> object:
    names, data = _load_table(path)
    coords, fields = _split_fields(names, data)
    if coords.shape[1] == 1:
        fig, ax = plt.subplots(figsize=(6.5, 4.0))
        for name, values in fields.items():
            style = "--" if "upper" in name or "lower" in name else "-"
            ax.plot(coords[:, 0], values, style, label=name, lw=1.2)
        ax.set_xlabel("x")
        ax.legend(fontsize=8)
        ax.set_title(title)
        return fig
    shape = _grid_shape(coords)
    key = "infected" if "infected" in fields else next(iter(fields))
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    image = fields[key].reshape(shape)
    extent = (
        coords[:, 1].min(),
        coords[:, 1].max(),
        coords[:, 0].min(),
        coords[:, 0].max(),
    )
    im = ax.imshow(image, origin="lower", extent=extent, aspect="auto")
    fig.colorbar(im, ax=ax, label=key)
    ax.set_xlabel("y")
    ax.set_ylabel("x")
    ax.set_title(title)
    return fig


def _render_mass(path: Path, plt) -> object:
    _, data = _load_table(path)
    fig, ax = plt.subplots(figsize=(6.0, 3.5))
    mass0 = data[0, 1]
    ax.plot(data[:, 0], data[:, 1] / mass0 - 1.0)
    ax.set_xlabel("time")
    ax.set_ylabel("relative mass drift")
    ax.set_title("total density conservation")
    return fig


def _render_increments(path: Path, plt) -> object:
    _, data = _load_table(path)
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.semilogy(data[:, 0], data[:, 1], "o-")
    ax.set_xlabel("iteration")
    ax.set_ylabel("increment")
    ax.set_title("fixed-point convergence")
    return fig


def _render_threshold(path: Path, report: RunReport | None, plt) -> object:
    _, data = _load_table(path)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    order = np.argsort(data[:, 3])
    ax.plot(data[order, 3], data[order, 4], "o-", ms=4)
    ax.axhline(0.0, color="k", lw=0.8)
    if report is not None and "critical_value" in report.quantities:
        ax.axvline(float(report.quantities["critical_value"]), color="r", ls="--")
    ax.set_xlabel("parameter value")
    ax.set_ylabel("growth eigenvalue")
    ax.set_title("threshold bisection")
    return fig


def _render_sweep(path: Path, report: RunReport | None, plt) -> list:
    names, data = _load_table(path)
    axes = []
    if report is not None:
        axes = [str(a) for a in report.meta.get("axes", [])]
    if len(axes) != 1 or axes[0] not in names:
        return []
    x = data[:, names.index(axes[0])]
    figs = []
    for k, name in enumerate(names):
        if name == axes[0] or name == "status":
            continue
        fig, ax = plt.subplots(figsize=(5.5, 3.5))
        ax.plot(x, data[:, k], "o-")
        ax.set_xlabel(axes[0])
        ax.set_ylabel(name)
        ax.set_title(f"sweep: {name}")
        figs.append((name, fig))
    return figs


def render_figures(run_dir: Path | str, *, dpi: int = 110) -> list[Path]:
    """Render figures for every recognized artifact in a run directory.

    Returns the list of written image paths; artifacts the run did not
    produce are skipped silently.
    """
    run_dir = Path(run_dir)
    report: RunReport | None = None
    if (run_dir / REPORT_NAME).exists():
        report = read_report(run_dir / REPORT_NAME)
    plt = _pyplot()
    written: list[Path] = []

    def save(fig: object, stem: str) -> None:
        out = run_dir / f"{stem}.png"
        fig.savefig(out, dpi=dpi, bbox_inches="tight")
        plt.close(fig)
        written.append(out)

    single = {
        "front_trace.tsv": lambda p: _render_front_trace(p, report, plt),
        "speed_scan.tsv": lambda p: _render_speed_scan(p, report, plt),
        "mass.tsv": lambda p: _render_mass(p, plt),
        "increments.tsv": lambda p: _render_increments(p, plt),
        "threshold_trace.tsv": lambda p: _render_threshold(p, report, plt),
        "eigenfunction.tsv": lambda p: _render_profiles(p, "principal eigenfunction", plt),
        "stationary.tsv": lambda p: _render_profiles(p, "endemic stationary state", plt),
        "final_state.tsv": lambda p: _render_profiles(p, "final state", plt),
    }
    for name, renderer in single.items():
        artifact = run_dir / name
        if artifact.exists():
            save(renderer(artifact), artifact.stem)

    sweep = run_dir / "sweep.tsv"
    if sweep.exists():
        for name, fig in _render_sweep(sweep, report, plt):
            save(fig, f"sweep_{name.replace('.', '_')}")
    return written
