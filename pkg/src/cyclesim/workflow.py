"""Two-step methodology: design-point calibration/sizing, then off-design.

A design run solves the model with the operational specifications imposed
and the flagged-free geometry/calibration parameters as unknowns, then
freezes everything into a SizedModel whose provenance records which values
were specified and which were solved.  Off-design runs keep geometry and
efficiencies constant and vary only boundary values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .components import DESIGN, OFFDESIGN, PerformanceMetrics, family_of
from .errors import (
    CycleError,
    ModelError,
    NonPhysicalSizing,
    NotWellPosed,
    OverrideNotBoundary,
    SolveFailed,
)
from .network import Model, NonlinearSystem, SpecEntry, assemble, validate
from .solver import SolverConfig, SolveResult, newton_solve

# quantity -> design_value parameter, for specs that pin component parameters
_PARAM_SPECS = {
    "pump": {"dp": "dp_design"},
    "turbine": {"pi": "pi_design"},
    "combustion_chamber": {"p_c": "p_c_design", "of": "of_design"},
    "gas_generator": {"p_c": "p_c_design", "of": "of_design"},
    "shaft": {"speed": "N_design"},
}


@dataclass
class SizedModel:
    """A design solution frozen for off-design use."""

    model: Model
    design_result: SolveResult
    design_metrics: PerformanceMetrics
    provenance: dict = field(default_factory=dict)

    @property
    def design_solution(self) -> dict:
        return self.model.design_solution


@dataclass
class SimulationOutcome:
    result: SolveResult
    metrics: PerformanceMetrics
    system: NonlinearSystem


def apply_design_specs(model: Model, specs: dict | None) -> Model:
    """Merge a {"component.quantity": value} map into the model: quantities
    that name design_value parameters set the parameter, the rest become
    specification equations."""
    if not specs:
        return model
    for path, value in specs.items():
        comp_name, _, quantity = path.partition(".")
        comp = model.component(comp_name)  # raises before solving
        fam = family_of(comp)
        param = _PARAM_SPECS.get(fam.name, {}).get(quantity)
        if param is not None:
            comp.params[param] = float(value)
            continue
        if quantity not in fam.spec_targets:
            raise ModelError(
                f"design spec {path}: family {fam.name} has no quantity "
                f"{quantity!r}")
        model.design_specs = [s for s in model.design_specs
                              if not (s.component == comp_name
                                      and s.quantity == quantity)]
        model.design_specs.append(SpecEntry(comp_name, quantity, float(value)))
    return model


def _solver_config(model: Model, config: SolverConfig | None) -> SolverConfig:
    if config is not None:
        return config
    if model.solver_options:
        return SolverConfig(**model.solver_options)
    return SolverConfig()


def run_design(model: Model, specs: dict | None = None,
               config: SolverConfig | None = None) -> SizedModel:
    """Size the model: solve with specifications imposed and free parameters
    as unknowns, then freeze geometry/calibration into a SizedModel."""
    m = model.copy()
    m.mode = DESIGN
    apply_design_specs(m, specs)

    report = validate(m)
    if not report.is_well_posed:
        raise NotWellPosed(
            f"design model not well-posed: {report.status} "
            f"({report.n_vars} unknowns vs {report.n_eqs} equations); "
            + "; ".join(report.diagnostics[:6]))

    system = assemble(m)
    result = newton_solve(system, _solver_config(m, config))
    if not result.converged:
        raise SolveFailed(result, f"design solve failed: {result.status} "
                                  f"({result.message})")
    system.check_physical(result.x)

    solution = system.solution_dict(result.x)
    sized = m.copy()
    sized.mode = OFFDESIGN
    provenance: dict[str, str] = {}

    sv = system.state_view(result.x)
    for comp in sized.components:
        fam = family_of(comp)
        for pname in list(comp.params):
            key = f"{comp.name}.{pname}"
            if comp.is_free(pname):
                value = solution[key]
                pdef = next(p for p in fam.params if p.name == pname)
                if pdef.unit == "area" and value <= 1e-9:
                    raise NonPhysicalSizing(
                        f"{comp.name}.{pname} sized non-positive ({value:.3e} m^2)")
                comp.params[pname] = value
                provenance[key] = "solved"
            else:
                provenance[key] = "specified"

        b = system.bound_components[comp.name]
        if fam.name == "pump":
            s_in = sv.fluid(b.fluid_nodes["in"])
            s_out = sv.fluid(b.fluid_nodes["out"])
            _, speed = sv.mech(b.mech_nodes["mech"])
            sized.design_refs[comp.name] = {
                "mdot_d": s_in.mdot,
                "dp_d": s_out.p0 - s_in.p0,
                "N_d": speed,
                "rho_d": b.mixes_static["in"].liquid_density(),
            }
            for k in sized.design_refs[comp.name]:
                provenance[f"{comp.name}.ref.{k}"] = "recorded"
        elif fam.name == "cooling_jacket" and "chamber_out_node" in b.refs:
            mdot_ch = sv.fluid(b.refs["chamber_out_node"]).mdot
            sized.design_refs[comp.name] = {"mdot_chamber_d": mdot_ch}
            provenance[f"{comp.name}.ref.mdot_chamber_d"] = "recorded"

    sized.design_solution = solution
    sized.initial_guesses = dict(sized.initial_guesses)
    sized.initial_guesses.update(solution)
    sized.provenance = provenance

    metrics = system.metrics(result.x)
    return SizedModel(model=sized, design_result=result,
                      design_metrics=metrics, provenance=provenance)


def _boundary_check(model: Model, path: str):
    comp_name, _, pname = path.partition(".")
    comp = model.component(comp_name)
    fam = family_of(comp)
    for p in fam.params:
        if p.name == pname:
            if p.role != "operational":
                raise OverrideNotBoundary(
                    f"override {path} targets a {p.role} parameter; only "
                    "boundary (operational) values may change off-design")
            return comp, pname
    raise OverrideNotBoundary(f"override {path}: no such parameter")


def run_offdesign(sized: SizedModel | Model, boundary_overrides: dict | None = None,
                  config: SolverConfig | None = None) -> SimulationOutcome:
    """Simulate the sized model with geometry and efficiencies frozen.

    Overrides may only address operational boundary values (tank pressures
    and temperatures, valve openings, ambient pressures).
    """
    base = sized.model if isinstance(sized, SizedModel) else sized
    m = base.copy()
    m.mode = OFFDESIGN
    for path, value in (boundary_overrides or {}).items():
        comp, pname = _boundary_check(m, path)
        comp.params[pname] = float(value)

    system = assemble(m)
    result = newton_solve(system, _solver_config(m, config))
    if not result.converged:
        raise SolveFailed(result, f"off-design solve failed: {result.status} "
                                  f"({result.message})")
    system.check_physical(result.x)
    return SimulationOutcome(result=result, metrics=system.metrics(result.x),
                             system=system)
