"""Scenario files: TOML schema, canonical serialization, parameter paths.

A scenario file is plain TOML with one table per coefficient::

    name = "HOM1"
    dimension = 1
    d = 1.0

    [alpha]
    kind = "constant"
    value = 1.0

    [mu]
    kind = "cosine_series"
    mean = 1.0
    terms = [[0.5, [1], 0.0]]        # amplitude, frequency vector, phase

    [s0]
    kind = "piecewise_constant"
    breakpoints = [0.5]
    values = [2.0, 1.0]

    [lam]
    kind = "constant"
    value = 5.0

    [i0]
    center = [0.0]
    radius = 2.0
    height = 0.5

    [grid]
    cell_resolution = 256
    domain_half_width = 300.0
    domain_step = 0.03125
    boundary = "periodic"

    [time]
    dt = 0.0                          # 0 selects the automatic step
    t_final = 120.0

    [tolerances]                      # optional, all keys optional
    fixed_point = 1e-8

Syntax errors cite line and column (from the TOML parser); schema errors
cite the offending key path.  ``dump_scenario`` emits a canonical form
(fixed key order, shortest round-tripping floats) whose SHA-256 digest
identifies the run.
"""

from __future__ import annotations

import hashlib
from dataclasses import fields as dataclass_fields
from pathlib import Path
from typing import Any, Mapping

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .coeffs import (
    BumpSpec,
    CoefficientSpec,
    Constant,
    CosineSeries,
    CosineTerm,
    PiecewiseConstant,
    Scenario,
    Tolerances,
)
from .errors import ValidationError

_COEFF_KEYS = ("alpha", "mu", "lam", "s0")
_TOLERANCE_KEYS = tuple(f.name for f in dataclass_fields(Tolerances))


# ---------------------------------------------------------------------------
# Mapping -> Scenario
# ---------------------------------------------------------------------------


def _want(table: Mapping[str, Any], key: str, path: str) -> Any:
    if key not in table:
        raise ValidationError(f"key '{_join(path, key)}': missing required key")
    return table[key]


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _as_float(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"key '{path}': expected a number, got {value!r}")
    return float(value)


def _as_int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"key '{path}': expected an integer, got {value!r}")
    return value


def _as_str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise ValidationError(f"key '{path}': expected a string, got {value!r}")
    return value


def _as_float_list(value: Any, path: str) -> tuple[float, ...]:
    if not isinstance(value, list):
        raise ValidationError(f"key '{path}': expected an array, got {value!r}")
    return tuple(_as_float(v, f"{path}[{i}]") for i, v in enumerate(value))


def _as_int_list(value: Any, path: str) -> tuple[int, ...]:
    if not isinstance(value, list):
        raise ValidationError(f"key '{path}': expected an array, got {value!r}")
    out = []
    for i, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or float(v) != int(v):
            raise ValidationError(f"key '{path}[{i}]': expected an integer, got {v!r}")
        out.append(int(v))
    return tuple(out)


def _coefficient_from_table(table: Any, path: str) -> CoefficientSpec:
    if not isinstance(table, Mapping):
        raise ValidationError(f"key '{path}': expected a table")
    kind = _as_str(_want(table, "kind", path), _join(path, "kind"))
    known = {"constant", "cosine_series", "piecewise_constant"}
    if kind not in known:
        raise ValidationError(
            f"key '{_join(path, 'kind')}': unknown kind {kind!r}; "
            f"expected one of {sorted(known)}"
        )
    if kind == "constant":
        _reject_unknown(table, {"kind", "value"}, path)
        return Constant(_as_float(_want(table, "value", path), _join(path, "value")))
    if kind == "cosine_series":
        _reject_unknown(table, {"kind", "mean", "terms"}, path)
        mean = _as_float(_want(table, "mean", path), _join(path, "mean"))
        raw_terms = table.get("terms", [])
        if not isinstance(raw_terms, list):
            raise ValidationError(f"key '{_join(path, 'terms')}': expected an array")
        terms = []
        for i, raw in enumerate(raw_terms):
            tpath = f"{path}.terms[{i}]"
            if not isinstance(raw, list) or len(raw) not in (2, 3):
                raise ValidationError(
                    f"key '{tpath}': expected [amplitude, frequency] or "
                    f"[amplitude, frequency, phase], got {raw!r}"
                )
            amplitude = _as_float(raw[0], f"{tpath}[0]")
            frequency = _as_int_list(raw[1], f"{tpath}[1]")
            phase = _as_float(raw[2], f"{tpath}[2]") if len(raw) == 3 else 0.0
            terms.append(CosineTerm(amplitude, frequency, phase))
        return CosineSeries(mean, tuple(terms))
    _reject_unknown(table, {"kind", "breakpoints", "values"}, path)
    breaks = _as_float_list(_want(table, "breakpoints", path), _join(path, "breakpoints"))
    values = _as_float_list(_want(table, "values", path), _join(path, "values"))
    return PiecewiseConstant(breaks, values)


def _reject_unknown(table: Mapping[str, Any], allowed: set[str], path: str) -> None:
    for key in table:
        if key not in allowed:
            raise ValidationError(f"key '{_join(path, key)}': unknown key")


def scenario_from_mapping(data: Mapping[str, Any], source: str = "<mapping>") -> Scenario:
    """Build and validate a Scenario from parsed TOML data."""
    try:
        return _scenario_from_mapping(data)
    except ValidationError as exc:
        raise ValidationError(f"{source}: {exc}") from None


def _scenario_from_mapping(data: Mapping[str, Any]) -> Scenario:
    allowed = {"name", "dimension", "d", "i0", "grid", "time", "tolerances", *_COEFF_KEYS}
    _reject_unknown(data, allowed, "")

    dimension = _as_int(_want(data, "dimension", ""), "dimension")
    d = _as_float(_want(data, "d", ""), "d")
    name = _as_str(data.get("name", ""), "name")

    coeffs = {
        key: _coefficient_from_table(_want(data, key, ""), key) for key in _COEFF_KEYS
    }

    i0_table = _want(data, "i0", "")
    if not isinstance(i0_table, Mapping):
        raise ValidationError("key 'i0': expected a table")
    _reject_unknown(i0_table, {"center", "radius", "height"}, "i0")
    i0 = BumpSpec(
        center=_as_float_list(_want(i0_table, "center", "i0"), "i0.center"),
        radius=_as_float(_want(i0_table, "radius", "i0"), "i0.radius"),
        height=_as_float(_want(i0_table, "height", "i0"), "i0.height"),
    )

    grid_table = data.get("grid", {})
    if not isinstance(grid_table, Mapping):
        raise ValidationError("key 'grid': expected a table")
    _reject_unknown(
        grid_table,
        {"cell_resolution", "domain_half_width", "domain_step", "boundary"},
        "grid",
    )
    grid_kwargs: dict[str, Any] = {}
    if "cell_resolution" in grid_table:
        grid_kwargs["cell_resolution"] = _as_int(
            grid_table["cell_resolution"], "grid.cell_resolution"
        )
    if "domain_half_width" in grid_table:
        grid_kwargs["domain_half_width"] = _as_float(
            grid_table["domain_half_width"], "grid.domain_half_width"
        )
    if "domain_step" in grid_table:
        grid_kwargs["domain_step"] = _as_float(grid_table["domain_step"], "grid.domain_step")
    if "boundary" in grid_table:
        grid_kwargs["boundary"] = _as_str(grid_table["boundary"], "grid.boundary")

    time_table = data.get("time", {})
    if not isinstance(time_table, Mapping):
        raise ValidationError("key 'time': expected a table")
    _reject_unknown(time_table, {"dt", "t_final"}, "time")
    time_kwargs: dict[str, Any] = {}
    if "dt" in time_table:
        time_kwargs["dt"] = _as_float(time_table["dt"], "time.dt")
    if "t_final" in time_table:
        time_kwargs["t_final"] = _as_float(time_table["t_final"], "time.t_final")

    tol_table = data.get("tolerances", {})
    if not isinstance(tol_table, Mapping):
        raise ValidationError("key 'tolerances': expected a table")
    _reject_unknown(tol_table, set(_TOLERANCE_KEYS), "tolerances")
    tol_kwargs: dict[str, Any] = {}
    for key in _TOLERANCE_KEYS:
        if key in tol_table:
            if key == "fixed_point_max_iter":
                tol_kwargs[key] = _as_int(tol_table[key], f"tolerances.{key}")
            else:
                tol_kwargs[key] = _as_float(tol_table[key], f"tolerances.{key}")

    return Scenario(
        dimension=dimension,
        d=d,
        alpha=coeffs["alpha"],
        mu=coeffs["mu"],
        lam=coeffs["lam"],
        s0=coeffs["s0"],
        i0=i0,
        tolerances=Tolerances(**tol_kwargs),
        name=name,
        **grid_kwargs,
        **time_kwargs,
    )


def loads_scenario(text: str, source: str = "<string>") -> Scenario:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"{source}: {exc}") from None
    return scenario_from_mapping(data, source)


def load_scenario(path: Path | str) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read scenario file: {exc}") from None
    scenario = loads_scenario(text, str(path))
    if not scenario.name:
        scenario = Scenario(**{**_scenario_kwargs(scenario), "name": path.stem})
    return scenario


def _scenario_kwargs(s: Scenario) -> dict[str, Any]:
    return {f.name: getattr(s, f.name) for f in dataclass_fields(Scenario)}


# ---------------------------------------------------------------------------
# Scenario -> mapping / TOML
# ---------------------------------------------------------------------------


def _coefficient_to_table(spec: CoefficientSpec) -> dict[str, Any]:
    if isinstance(spec, Constant):
        return {"kind": "constant", "value": spec.value}
    if isinstance(spec, CosineSeries):
        return {
            "kind": "cosine_series",
            "mean": spec.mean,
            "terms": [[t.amplitude, list(t.frequency), t.phase] for t in spec.terms],
        }
    return {
        "kind": "piecewise_constant",
        "breakpoints": list(spec.breakpoints),
        "values": list(spec.values),
    }


def scenario_to_mapping(s: Scenario) -> dict[str, Any]:
    """Plain nested dict mirroring the file schema (canonical key order)."""
    return {
        "name": s.name,
        "dimension": s.dimension,
        "d": s.d,
        "alpha": _coefficient_to_table(s.alpha),
        "mu": _coefficient_to_table(s.mu),
        "lam": _coefficient_to_table(s.lam),
        "s0": _coefficient_to_table(s.s0),
        "i0": {"center": list(s.i0.center), "radius": s.i0.radius, "height": s.i0.height},
        "grid": {
            "cell_resolution": s.cell_resolution,
            "domain_half_width": s.domain_half_width,
            "domain_step": s.domain_step,
            "boundary": s.boundary,
        },
        "time": {"dt": s.dt, "t_final": s.t_final},
        "tolerances": {k: getattr(s.tolerances, k) for k in _TOLERANCE_KEYS},
    }


def _toml_value(value: Any) -> str:
    if isinstance(value, bool):
        raise ValidationError("booleans do not appear in scenario files")
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        text = repr(value)
        # TOML floats need a decimal point or exponent.
        if "." not in text and "e" not in text and "n" not in text:
            text += ".0"
        return text
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise ValidationError(f"cannot serialize {value!r}")


def dump_scenario(s: Scenario) -> str:
    """Canonical TOML text; load(dump(s)) reproduces s exactly."""
    mapping = scenario_to_mapping(s)
    lines: list[str] = []
    for key in ("name", "dimension", "d"):
        lines.append(f"{key} = {_toml_value(mapping[key])}")
    for section in ("alpha", "mu", "lam", "s0", "i0", "grid", "time", "tolerances"):
        lines.append("")
        lines.append(f"[{section}]")
        for key, value in mapping[section].items():
            lines.append(f"{key} = {_toml_value(value)}")
    return "\n".join(lines) + "\n"


def write_scenario(path: Path | str, s: Scenario) -> None:
    Path(path).write_text(dump_scenario(s), encoding="utf-8")


def scenario_digest(s: Scenario) -> str:
    """SHA-256 of the canonical serialization; identifies a run's inputs."""
    return hashlib.sha256(dump_scenario(s).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Parameter paths (threshold scans and sweeps)
# ---------------------------------------------------------------------------


def set_parameter(s: Scenario, path: str, value: float) -> Scenario:
    """Return a new scenario with the scalar at a dotted key path replaced.

    Paths follow the file schema, e.g. ``s0.value``, ``mu.mean``, ``d``,
    ``time.t_final``, ``i0.height``.  The leaf must be an existing scalar.
    """
    mapping = scenario_to_mapping(s)
    tokens = path.split(".")
    node: Any = mapping
    for token in tokens[:-1]:
        if not isinstance(node, dict) or token not in node:
            raise ValidationError(f"key '{path}': no such parameter")
        node = node[token]
    leaf = tokens[-1]
    if not isinstance(node, dict) or leaf not in node:
        raise ValidationError(f"key '{path}': no such parameter")
    current = node[leaf]
    if isinstance(current, bool) or not isinstance(current, (int, float)):
        raise ValidationError(f"key '{path}': not a scalar numeric parameter")
    if isinstance(current, int):
        if float(value) != int(value):
            raise ValidationError(f"key '{path}': expected an integer, got {value!r}")
        node[leaf] = int(value)
    else:
        node[leaf] = float(value)
    return scenario_from_mapping(mapping, source=f"<set {path}={value!r}>")


def get_parameter(s: Scenario, path: str) -> float:
    mapping = scenario_to_mapping(s)
    node: Any = mapping
    for token in path.split("."):
        if not isinstance(node, (dict,)) or token not in node:
            raise ValidationError(f"key '{path}': no such parameter")
        node = node[token]
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ValidationError(f"key '{path}': not a scalar numeric parameter")
    return float(node)
