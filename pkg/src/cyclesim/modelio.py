"""Model file format (JSON), results export, bundled example access.

All quantities in files are SI; display units belong to presentation
layers.  Files are human-readable and diff-friendly: a sized model is just
a model file whose free parameters were replaced by solved numbers plus a
"sized" block recording provenance and the design-point solution.
"""

from __future__ import annotations

import csv
import io as _io
import json
from importlib import resources
from pathlib import Path

from .components import FAMILIES, family_of
from .errors import ParseError, UnknownComponentFamily, UnknownSpecies
from .fluids import FluidDb, default_db, load_db
from .network import Model, SpecEntry
from .solver import SweepResult
from .workflow import SimulationOutcome, SizedModel

FORMAT_VERSION = 1

_TOP_LEVEL_KEYS = {
    "format_version", "name", "description", "mode", "fluids", "components",
    "connections", "design_specs", "initial_guesses", "solver", "sized",
}
_COMPONENT_KEYS = {"family", "name", "params"}
_SPEC_KEYS = {"component", "quantity", "value", "mode"}
_SIZED_KEYS = {"provenance", "design_refs", "design_solution"}


def _load_fluids_section(section, errors) -> FluidDb:
    if section is None:
        return default_db()
    if not isinstance(section, dict):
        errors.append(("parse", "fluids: expected an object"))
        return default_db()
    db = load_db(section["database"]) if section.get("database") else load_db()
    inline = section.get("species", {})
    if inline:
        from .fluids import Species
        for name, fields in inline.items():
            try:
                db.species[name] = Species(name=name, **fields)
            except (TypeError, ValueError) as exc:
                errors.append(("parse", f"fluids.species.{name}: {exc}"))
    unknown = set(section) - {"database", "species"}
    for key in unknown:
        errors.append(("parse", f"fluids: unknown field {key!r}"))
    return db


def model_from_dict(raw: dict) -> Model:
    """Build and structurally validate a Model; collects every diagnostic."""
    errors: list[tuple[str, str]] = []

    if not isinstance(raw, dict):
        raise ParseError("model file root must be an object")
    for key in sorted(set(raw) - _TOP_LEVEL_KEYS):
        errors.append(("parse", f"unknown top-level field {key!r}"))
    version = raw.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        errors.append(("parse", f"unsupported format_version {version!r}"))

    db = _load_fluids_section(raw.get("fluids"), errors)
    mode = raw.get("mode", "design")
    if mode not in ("design", "offdesign"):
        errors.append(("parse", f"mode must be design or offdesign, got {mode!r}"))
        mode = "design"

    model = Model(name=raw.get("name", "model"),
                  description=raw.get("description", ""),
                  mode=mode, db=db)

    seen_names = {}
    dropped_names = set()  # components that failed to load; suppress follow-ons
    for i, entry in enumerate(raw.get("components", [])):
        loc = f"components[{i}]"
        if not isinstance(entry, dict):
            errors.append(("parse", f"{loc}: expected an object"))
            continue
        for key in sorted(set(entry) - _COMPONENT_KEYS):
            errors.append(("parse", f"{loc}: unknown field {key!r}"))
        family = entry.get("family")
        name = entry.get("name")
        if not isinstance(name, str) or not name:
            errors.append(("parse", f"{loc}: component name missing"))
            continue
        if name in seen_names:
            errors.append(("parse", f"{loc}: duplicate component name {name!r} "
                                    f"(first at components[{seen_names[name]}])"))
            continue
        seen_names[name] = i
        if family not in FAMILIES:
            errors.append(("family", f"{loc} ({name}): unknown component "
                                     f"family {family!r}"))
            dropped_names.add(name)
            continue
        params = entry.get("params", {})
        if not isinstance(params, dict):
            errors.append(("parse", f"{loc} ({name}): params must be an object"))
            dropped_names.add(name)
            continue
        comp = model.add(family, name, **params)
        for msg in FAMILIES[family].check(comp, db):
            kind = "species" if "species" in msg else "parse"
            errors.append((kind, f"{loc}: {msg}"))

    for i, pair in enumerate(raw.get("connections", [])):
        loc = f"connections[{i}]"
        if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
            errors.append(("parse", f"{loc}: expected a pair of port references"))
            continue
        if any(str(ref).partition(".")[0] in dropped_names for ref in pair):
            continue  # root cause already reported
        try:
            model.connect(pair[0], pair[1])
        except Exception as exc:
            errors.append(("parse", f"{loc}: {exc}"))

    for i, entry in enumerate(raw.get("design_specs", [])):
        loc = f"design_specs[{i}]"
        if not isinstance(entry, dict):
            errors.append(("parse", f"{loc}: expected an object"))
            continue
        for key in sorted(set(entry) - _SPEC_KEYS):
            errors.append(("parse", f"{loc}: unknown field {key!r}"))
        try:
            model.design_specs.append(SpecEntry(
                component=entry["component"], quantity=entry["quantity"],
                value=float(entry["value"]), mode=entry.get("mode", "design")))
        except (KeyError, TypeError, ValueError) as exc:
            errors.append(("parse", f"{loc}: {exc!r}"))

    guesses = raw.get("initial_guesses", {})
    if isinstance(guesses, dict):
        model.initial_guesses = {str(k): float(v) for k, v in guesses.items()}
    else:
        errors.append(("parse", "initial_guesses: expected an object"))
    solver = raw.get("solver", {})
    if isinstance(solver, dict):
        model.solver_options = dict(solver)
    else:
        errors.append(("parse", "solver: expected an object"))

    sized = raw.get("sized")
    if sized is not None:
        if not isinstance(sized, dict):
            errors.append(("parse", "sized: expected an object"))
        else:
            for key in sorted(set(sized) - _SIZED_KEYS):
                errors.append(("parse", f"sized: unknown field {key!r}"))
            model.provenance = dict(sized.get("provenance", {}))
            model.design_refs = {k: dict(v) for k, v in
                                 sized.get("design_refs", {}).items()}
            model.design_solution = {k: float(v) for k, v in
                                     sized.get("design_solution", {}).items()}
            model.initial_guesses.update(model.design_solution)

    if errors:
        kinds = {k for k, _ in errors}
        messages = [m for _, m in errors]
        if kinds == {"family"}:
            raise UnknownComponentFamily("; ".join(messages))
        if kinds == {"species"}:
            raise UnknownSpecies("; ".join(messages))
        raise ParseError(messages)
    return model


def load_model(path) -> Model:
    """Load a model file; raises with every diagnostic, not just the first."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: "
                         f"{exc.msg}") from None
    try:
        return model_from_dict(raw)
    except ParseError as exc:
        raise ParseError([f"{path}: {d}" for d in exc.diagnostics]) from None


def model_to_dict(model: Model) -> dict:
    raw = {
        "format_version": FORMAT_VERSION,
        "name": model.name,
        "description": model.description,
        "mode": model.mode,
        "components": [
            {"family": c.family, "name": c.name, "params": dict(c.params)}
            for c in model.components
        ],
        "connections": [list(pair) for pair in model.connections],
    }
    if model.design_specs:
        raw["design_specs"] = [
            {"component": s.component, "quantity": s.quantity,
             "value": s.value, "mode": s.mode}
            for s in model.design_specs
        ]
    if model.initial_guesses:
        raw["initial_guesses"] = dict(model.initial_guesses)
    if model.solver_options:
        raw["solver"] = dict(model.solver_options)
    if model.provenance or model.design_refs or model.design_solution:
        raw["sized"] = {
            "provenance": dict(model.provenance),
            "design_refs": {k: dict(v) for k, v in model.design_refs.items()},
            "design_solution": dict(model.design_solution),
        }
    return raw


def save_model(model: Model, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n",
                          encoding="utf-8")


def bundled_models() -> dict[str, Path]:
    """Name -> path of the shipped example models."""
    root = resources.files("cyclesim") / "models"
    return {p.name.removesuffix(".json"): Path(str(p))
            for p in sorted(root.iterdir(), key=lambda p: p.name)
            if p.name.endswith(".json")}


def load_bundled(name: str) -> Model:
    paths = bundled_models()
    if name not in paths:
        raise FileNotFoundError(
            f"no bundled model {name!r}; available: {sorted(paths)}")
    return load_model(paths[name])


# ---------------------------------------------------------------------------
# results export

_METRIC_COLUMNS = [("thrust", "N"), ("isp", "s"), ("of_ratio", "-"),
                   ("power_balance_residual", "W"), ("mdot_total", "kg/s")]


def _result_columns_rows(obj):
    """Normalize a simulation outcome or sweep into (columns, rows)."""
    if isinstance(obj, SimulationOutcome):
        units = {v.name: v.unit for v in obj.system.variables}
        var_names = [v.name for v in obj.system.variables]
        columns = ["status"] + [f"{n} [{_si_unit(units[n])}]" for n in var_names]
        columns += [f"{m} [{u}]" for m, u in _METRIC_COLUMNS]
        metrics = obj.metrics.as_dict()
        row = [obj.result.status]
        row += [repr(obj.result.values[n]) for n in var_names]
        row += [_fmt(metrics[m]) for m, _ in _METRIC_COLUMNS]
        return columns, [row]
    if isinstance(obj, SweepResult):
        var_names = []
        for p in obj.points:
            if p.solution:
                var_names = list(p.solution)
                break
        columns = [f"swept {obj.param_path}", "status"]
        columns += [f"{n} [{_si_unit_from_name(n)}]" for n in var_names]
        columns += [f"{m} [{u}]" for m, u in _METRIC_COLUMNS]
        rows = []
        for p in obj.points:
            row = [_fmt(p.value), p.status]
            if p.solution:
                row += [repr(p.solution[n]) for n in var_names]
                row += [_fmt(p.metrics[m]) for m, _ in _METRIC_COLUMNS]
            else:
                row += [""] * (len(var_names) + len(_METRIC_COLUMNS))
            rows.append(row)
        return columns, rows
    raise TypeError(f"cannot export {type(obj).__name__}")


_UNIT_LABELS = {"pressure": "Pa", "temperature": "K", "massflow": "kg/s",
                "speed": "rad/s", "area": "m^2", "power": "W",
                "loss": "Pa.s^2.m^3/kg^2", "dimensionless": "-"}


def _si_unit(unit_class: str) -> str:
    return _UNIT_LABELS.get(unit_class, unit_class)


def _si_unit_from_name(name: str) -> str:
    tail = name.rsplit(".", 1)[-1]
    return {"p0": "Pa", "T0": "K", "mdot": "kg/s", "power": "W",
            "speed": "rad/s"}.get(tail, "-")


def _fmt(v):
    if v is None:
        return ""
    return repr(float(v))


def export_results(obj, format: str = "csv") -> bytes:
    """Serialize a solve or sweep as CSV or JSON with a stable column order;
    identical inputs yield byte-identical output."""
    columns, rows = _result_columns_rows(obj)
    if format == "csv":
        buf = _io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)
        return buf.getvalue().encode()
    if format == "json":
        payload = {"columns": columns,
                   "rows": [[None if c == "" else c for c in row] for row in rows]}
        return (json.dumps(payload, indent=2) + "\n").encode()
    raise ValueError(f"unknown export format {format!r} (csv or json)")
