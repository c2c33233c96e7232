"""Model graph: connections, degrees-of-freedom validation, flattening.

A connection merges two ports into one node carrying a single set of
unknowns (p0, T0, mdot for fluid nodes; power, speed for mechanical ones),
the non-causal port-merge semantics of schematic modeling environments.
Assembly flattens the component equations plus active specification
equations into one square nonlinear algebraic system with named, scaled
variables and residuals.

Compositions are resolved statically at assembly by propagating tank
contents through the component mixing rules; a junction merging streams of
different species uses an equal-weight pre-blend (the bundled cycles only
ever merge identical compositions, where the blend is exact).
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import numpy as np

from . import fluids
from .components import (
    DESIGN,
    FLUID,
    MECH,
    OFFDESIGN,
    PARAM_GUESS,
    SCALES,
    BoundComponent,
    Component,
    Equation,
    FAMILIES,
    FluidState,
    PerformanceMetrics,
    family_of,
)
from .errors import (
    AlreadyConnected,
    InvalidParameter,
    KindMismatch,
    ModelError,
    NotWellPosed,
    UnknownPort,
)
from .fluids import G0, FluidDb, default_db

WELL_POSED = "well_posed"
UNDER_DETERMINED = "under_determined"
OVER_DETERMINED = "over_determined"


@dataclass
class SpecEntry:
    """One specification equation: (component, quantity) pinned to a value.

    mode selects when the equation is active: "design" (default),
    "offdesign", or "always".
    """

    component: str
    quantity: str
    value: float
    mode: str = "design"

    def active(self, model_mode: str) -> bool:
        return self.mode == "always" or self.mode == model_mode


@dataclass
class DofReport:
    n_vars: int
    n_eqs: int
    status: str
    deficit: int
    problems: list = field(default_factory=list)  # fatal model defects
    notes: list = field(default_factory=list)     # informational
    per_component: dict = field(default_factory=dict)

    @property
    def diagnostics(self) -> list:
        return self.problems + self.notes

    @property
    def is_well_posed(self) -> bool:
        return self.status == WELL_POSED and not self.problems

    def as_dict(self) -> dict:
        return {
            "n_vars": self.n_vars,
            "n_eqs": self.n_eqs,
            "status": self.status,
            "deficit": self.deficit,
            "diagnostics": list(self.diagnostics),
            "per_component": self.per_component,
        }


@dataclass
class Model:
    """The network: components, connections, mode and specifications."""

    name: str = "model"
    description: str = ""
    mode: str = DESIGN
    components: list = field(default_factory=list)
    connections: list = field(default_factory=list)      # [(ref_a, ref_b)]
    design_specs: list = field(default_factory=list)     # [SpecEntry]
    initial_guesses: dict = field(default_factory=dict)  # var name -> value
    solver_options: dict = field(default_factory=dict)
    design_refs: dict = field(default_factory=dict)      # comp -> recorded refs
    provenance: dict = field(default_factory=dict)       # "comp.param" -> origin
    design_solution: dict = field(default_factory=dict)  # var name -> value
    db: FluidDb | None = None

    def __post_init__(self):
        if self.db is None:
            self.db = default_db()

    # -- construction -------------------------------------------------------

    def add(self, family: str, name: str, **params) -> Component:
        if any(c.name == name for c in self.components):
            raise ModelError(f"duplicate component name {name!r}")
        comp = Component(family=family, name=name, params=params)
        family_of(comp)  # raises UnknownComponentFamily early
        self.components.append(comp)
        return comp

    def component(self, name: str) -> Component:
        for c in self.components:
            if c.name == name:
                return c
        raise ModelError(f"no component named {name!r}")

    def _resolve_port(self, ref: str):
        comp_name, sep, port_name = ref.partition(".")
        if not sep:
            raise UnknownPort(f"port reference {ref!r} must be 'component.port'")
        comp = None
        for c in self.components:
            if c.name == comp_name:
                comp = c
                break
        if comp is None:
            raise UnknownPort(f"unknown component in port reference {ref!r}")
        for port in family_of(comp).ports(comp):
            if port.name == port_name:
                return comp, port
        raise UnknownPort(f"component {comp_name!r} has no port {port_name!r}")

    def connect(self, a: str, b: str) -> "Model":
        comp_a, port_a = self._resolve_port(a)
        comp_b, port_b = self._resolve_port(b)
        if port_a.kind != port_b.kind:
            raise KindMismatch(f"cannot connect {a} ({port_a.kind}) to {b} ({port_b.kind})")
        if port_a.kind == FLUID and {port_a.direction, port_b.direction} != {"in", "out"}:
            raise KindMismatch(
                f"fluid connection {a} -> {b} must join an outlet to an inlet")
        used = {ref for pair in self.connections for ref in pair}
        for ref in (a, b):
            if ref in used:
                raise AlreadyConnected(f"port {ref} is already connected")
        self.connections.append((a, b))
        return self

    def spec(self, component: str, quantity: str, value: float, mode: str = "design") -> "Model":
        self.design_specs.append(SpecEntry(component, quantity, value, mode))
        return self

    def copy(self) -> "Model":
        db = self.db
        clone = Model(
            name=self.name,
            description=self.description,
            mode=self.mode,
            components=copy.deepcopy(self.components),
            connections=list(self.connections),
            design_specs=copy.deepcopy(self.design_specs),
            initial_guesses=dict(self.initial_guesses),
            solver_options=dict(self.solver_options),
            design_refs=copy.deepcopy(self.design_refs),
            provenance=dict(self.provenance),
            design_solution=dict(self.design_solution),
            db=db,
        )
        return clone

    # -- topology helpers -----------------------------------------------------

    def _build_nodes(self):
        """Nodes in deterministic order (component order, then port order).

        Returns (nodes, port_to_node, diagnostics); dangling ports become
        single-port nodes so DOF counting stays meaningful and the report
        can name them.
        """
        pair_of = {}
        for a, b in self.connections:
            pair_of[a] = b
            pair_of[b] = a
        nodes = []
        port_to_node = {}
        diagnostics = []
        for comp in self.components:
            fam = family_of(comp)
            for port in fam.ports(comp):
                ref = f"{comp.name}.{port.name}"
                if ref in port_to_node:
                    continue
                peer = pair_of.get(ref)
                members = [(comp.name, port.name, port.kind, port.direction)]
                if peer is None:
                    diagnostics.append(f"dangling port {ref}")
                else:
                    peer_comp, peer_port = self._resolve_port(peer)
                    members.append((peer_comp.name, peer_port.name,
                                    port.kind, None))
                # name fluid nodes after their outlet side
                name = ref
                if port.kind == FLUID and port.direction == "in" and peer is not None:
                    name = peer
                node = _Node(index=len(nodes), kind=port.kind, name=name)
                for m in members:
                    node.ports.append(m[:2])
                    port_to_node[f"{m[0]}.{m[1]}"] = node.index
                nodes.append(node)
        return nodes, port_to_node, diagnostics


@dataclass
class _Node:
    index: int
    kind: str
    name: str
    ports: list = field(default_factory=list)  # [(comp, port)]


def connect(model: Model, a: str, b: str) -> Model:
    """Functional alias of Model.connect."""
    return model.connect(a, b)


# ---------------------------------------------------------------------------
# degrees of freedom


def validate(model: Model) -> DofReport:
    """Count unknowns against equations and name the mismatch candidates.

    Pure: repeated calls on an unchanged model return identical reports.
    """
    problems = []
    notes = []
    per_component = {}
    db = model.db

    for comp in model.components:
        fam = family_of(comp)
        problems.extend(fam.check(comp, db))

    names = [c.name for c in model.components]
    for n in sorted(set(names)):
        if names.count(n) > 1:
            problems.append(f"duplicate component name {n!r}")

    nodes, port_to_node, dangling = model._build_nodes()
    problems.extend(dangling)

    n_vars = 0
    for node in nodes:
        n_vars += 3 if node.kind == FLUID else 2

    n_eqs = 0
    for comp in model.components:
        fam = family_of(comp)
        free = [p for p in comp.params if comp.is_free(p)]
        eqs = fam.equations(comp, model.mode)
        n_eqs += len(eqs)
        n_vars += len(free)
        per_component[comp.name] = {
            "family": comp.family,
            "equations": len(eqs),
            "free_params": free,
            "specs": [],
        }
        for p in free:
            notes.append(f"{comp.name}.{p} is free (sized by the solve)")
        pdefs = {p.name: p for p in fam.params}
        for pname, pdef in pdefs.items():
            if pdef.role == "design_value" and comp.numeric(pname) is None \
                    and model.mode == DESIGN:
                notes.append(
                    f"{comp.name}.{pname} unset: candidate missing design specification")
        if comp.family == "tank":
            for pname in ("p_out", "T_out"):
                if comp.numeric(pname) is None:
                    notes.append(
                        f"{comp.name}.{pname} unset: boundary value not pinned")

    active_specs = [s for s in model.design_specs if s.active(model.mode)]
    for spec_entry in active_specs:
        try:
            comp = model.component(spec_entry.component)
        except ModelError:
            problems.append(
                f"design spec addresses unknown component {spec_entry.component!r}")
            continue
        fam = family_of(comp)
        if spec_entry.quantity not in fam.spec_targets:
            problems.append(
                f"design spec {spec_entry.component}.{spec_entry.quantity}: "
                f"family {fam.name} has no such quantity")
            continue
        n_eqs += 1
        per_component[comp.name]["specs"].append(
            f"{spec_entry.quantity} = {spec_entry.value}")

    if n_vars == n_eqs:
        status, deficit = WELL_POSED, 0
    elif n_vars > n_eqs:
        status, deficit = UNDER_DETERMINED, n_vars - n_eqs
        candidates = ", ".join(f"{c}.{p}" for c, info in per_component.items()
                               for p in info["free_params"])
        notes.append(
            f"{deficit} more unknown(s) than equation(s); add specification(s)"
            + (f" or fix free parameter(s) among: {candidates}" if candidates else ""))
    else:
        status, deficit = OVER_DETERMINED, n_eqs - n_vars
        spec_list = ", ".join(f"{s.component}.{s.quantity}" for s in active_specs)
        notes.append(
            f"{deficit} more equation(s) than unknown(s)"
            + (f"; remove a specification among: {spec_list}" if spec_list else ""))

    return DofReport(n_vars=n_vars, n_eqs=n_eqs, status=status,
                     deficit=deficit, problems=problems, notes=notes,
                     per_component=per_component)


# ---------------------------------------------------------------------------
# assembly


@dataclass
class Var:
    name: str
    unit: str
    scale: float
    initial_guess: float
    bounds: tuple

    def as_dict(self) -> dict:
        return {"name": self.name, "unit": self.unit, "scale": self.scale,
                "initial_guess": self.initial_guess, "bounds": list(self.bounds)}


_BOUNDS_BY_UNIT = {
    "pressure": (1.0, math.inf),
    "temperature": (1.0, math.inf),
    "massflow": (-math.inf, math.inf),
    "speed": (1e-3, math.inf),
    "area": (1e-12, math.inf),
    "loss": (0.0, math.inf),
    "power": (-math.inf, math.inf),
    "dimensionless": (-math.inf, math.inf),
}

_GUESS_FLUID = {"p0": 1e6, "T0": 300.0, "mdot": 1.0}
_HOT_T_GUESS = 3000.0
_GUESS_MECH = {"power": 1e5, "speed": 3000.0}
_FLUID_UNITS = {"p0": "pressure", "T0": "temperature", "mdot": "massflow"}
_MECH_UNITS = {"power": "power", "speed": "speed"}


class StateView:
    """Read access to the physical variable vector for residual closures."""

    __slots__ = ("x", "_fluid_offsets", "_mech_offsets", "_mixes")

    def __init__(self, x, fluid_offsets, mech_offsets, mixes):
        self.x = x
        self._fluid_offsets = fluid_offsets
        self._mech_offsets = mech_offsets
        self._mixes = mixes

    def fluid(self, node: int) -> FluidState:
        off = self._fluid_offsets[node]
        x = self.x
        return FluidState(p0=x[off], T0=x[off + 1], mdot=x[off + 2],
                          mix=self._mixes[node])

    def mech(self, node: int):
        off = self._mech_offsets[node]
        return self.x[off], self.x[off + 1]

    def param(self, acc) -> float:
        tag, payload = acc
        return self.x[payload] if tag == "var" else payload


class NonlinearSystem:
    """Flattened residual function with named, scaled variables.

    Immutable after assembly; safe for concurrent evaluation.
    """

    def __init__(self, model, variables, equations, fluid_offsets,
                 mech_offsets, node_mixes, bounds_comps, nodes, sparsity):
        self.model = model
        self.variables: list[Var] = variables
        self.equations: list[Equation] = equations
        self.residual_names = [e.name for e in equations]
        self.residual_scales = np.array([SCALES[e.unit] for e in equations])
        self.var_scales = np.array([v.scale for v in variables])
        self.x0 = np.array([v.initial_guess for v in variables])
        self.lower = np.array([v.bounds[0] for v in variables])
        self.upper = np.array([v.bounds[1] for v in variables])
        self._fluid_offsets = fluid_offsets
        self._mech_offsets = mech_offsets
        self._node_mixes = node_mixes
        self.bound_components: dict[str, BoundComponent] = bounds_comps
        self.nodes = nodes
        self.sparsity = sparsity
        self.var_index = {v.name: i for i, v in enumerate(self.variables)}
        if len(self.variables) != len(self.equations):
            raise NotWellPosed(
                f"assembled {len(self.variables)} unknowns vs "
                f"{len(self.equations)} equations")

    @property
    def n(self) -> int:
        return len(self.variables)

    def state_view(self, x) -> StateView:
        return StateView(x, self._fluid_offsets, self._mech_offsets,
                         self._node_mixes)

    def residual_eval(self, x) -> np.ndarray:
        sv = self.state_view(x)
        r = np.empty(len(self.equations))
        for i, eq in enumerate(self.equations):
            r[i] = eq.fn(sv)
        return r

    def solution_dict(self, x) -> dict:
        return {v.name: float(x[i]) for i, v in enumerate(self.variables)}

    # -- post-solution reporting ---------------------------------------------

    def derived(self, x) -> dict:
        """Per-component derived quantities (nozzle exit states, monitor)."""
        sv = self.state_view(x)
        out = {}
        for name, b in self.bound_components.items():
            d = FAMILIES[b.comp.family].derived(b, sv)
            if d:
                out[name] = d
        return out

    def metrics(self, x) -> PerformanceMetrics:
        sv = self.state_view(x)
        warnings = []
        thrust = 0.0
        monitors = [b for b in self.bound_components.values()
                    if b.comp.family == "monitor"]
        nozzles = [b for b in self.bound_components.values()
                   if b.comp.family in ("nozzle", "nozzle_conv")]
        if monitors:
            thrust = FAMILIES["monitor"].derived(monitors[0], sv)["thrust"]
        else:
            for noz in nozzles:
                thrust += FAMILIES[noz.comp.family].derived(noz, sv)["thrust"]
        for noz in nozzles:
            d = FAMILIES[noz.comp.family].derived(noz, sv)
            if d.get("separation_risk"):
                warnings.append(
                    f"{noz.name}: exit pressure {d['p_e']:.0f} Pa below the "
                    "Summerfield limit (flow separation risk)")

        mdot_fuel = mdot_ox = mdot_total = 0.0
        for b in self.bound_components.values():
            if b.comp.family != "tank":
                continue
            mdot = sv.fluid(b.fluid_nodes["out"]).mdot
            mdot_total += mdot
            mix = b.mixes_static["out"]
            roles = {sp.role for sp, _ in mix.components}
            if "oxidizer" in roles:
                mdot_ox += mdot
            elif "fuel" in roles:
                mdot_fuel += mdot
        of_ratio = (mdot_ox / mdot_fuel) if mdot_fuel > 1e-12 else None

        power_residual = 0.0
        for b in self.bound_components.values():
            if b.comp.family != "shaft":
                continue
            eta = sv.param(b.pacc["eta_mech"])
            produced = sum(sv.mech(nn)[0] for nn in b.refs["mech_sources"])
            consumed = sum(sv.mech(nn)[0] for nn in b.refs["mech_sinks"])
            power_residual += abs(eta * produced - consumed)

        for b in self.bound_components.values():
            if b.comp.family == "junction":
                flows = [abs(sv.fluid(b.fluid_nodes[p]).mdot)
                         for p in ("in1", "in2", "out")]
                if max(flows) < 1e-9:
                    warnings.append(f"{b.name}: all flows zero (degenerate junction)")

        isp = thrust / (mdot_total * G0) if mdot_total > 1e-12 else 0.0
        return PerformanceMetrics(thrust=thrust, isp=isp, of_ratio=of_ratio,
                                  power_balance_residual=power_residual,
                                  mdot_total=mdot_total, warnings=warnings)

    def check_physical(self, x) -> None:
        """Consistency checks at a converged solution; raises the named
        error when a component sits in an unphysical regime."""
        from .errors import (
            NegativeFuelFlow,
            PressureRise,
            ReverseFlow,
            ReversePressureGradient,
        )
        sv = self.state_view(x)
        for name, b in self.bound_components.items():
            fam = b.comp.family
            if fam == "turbine":
                s_in = sv.fluid(b.fluid_nodes["in"])
                s_out = sv.fluid(b.fluid_nodes["out"])
                if s_out.p0 >= s_in.p0:
                    raise PressureRise(
                        f"turbine {name}: outlet pressure {s_out.p0:.4g} Pa is "
                        f"not below inlet {s_in.p0:.4g} Pa")
            elif fam == "injector":
                s_in = sv.fluid(b.fluid_nodes["in"])
                s_out = sv.fluid(b.fluid_nodes["out"])
                if s_in.p0 <= s_out.p0:
                    raise ReversePressureGradient(
                        f"injector {name}: inlet pressure {s_in.p0:.4g} Pa does "
                        f"not exceed outlet {s_out.p0:.4g} Pa")
            elif fam in ("combustion_chamber", "gas_generator"):
                f = sv.fluid(b.fluid_nodes["fuel_in"]).mdot
                ox = sv.fluid(b.fluid_nodes["ox_in"]).mdot
                out = sv.fluid(b.fluid_nodes["out"]).mdot
                if f < 0:
                    raise NegativeFuelFlow(
                        f"{fam} {name}: fuel flow {f:.4g} kg/s is negative")
                if ox < 0 or out <= 0:
                    raise ReverseFlow(
                        f"{fam} {name}: reversed flow (ox {ox:.4g}, out {out:.4g})")

    def conservation_report(self, x) -> dict:
        """Relative mass / enthalpy-flux / shaft-power closure at a solution."""
        sv = self.state_view(x)
        report = {"mass": {}, "enthalpy": {}, "shaft_power": {}}
        for name, b in self.bound_components.items():
            fam = b.comp.family
            if fam in ("junction", "splitter"):
                signed = 0.0
                scale = 0.0
                for port in (family_of(b.comp).ports(b.comp)):
                    s = sv.fluid(b.fluid_nodes[port.name])
                    signed += s.mdot if port.direction == "in" else -s.mdot
                    scale = max(scale, abs(s.mdot))
                report["mass"][name] = abs(signed) / max(scale, 1e-30)
            if fam in ("pipe", "valve", "splitter", "injector"):
                flux_in = flux_out = 0.0
                for port in family_of(b.comp).ports(b.comp):
                    s = sv.fluid(b.fluid_nodes[port.name])
                    cp = b.mixes_static[port.name].cp()
                    h = s.mdot * cp * s.T0
                    if port.direction == "in":
                        flux_in += h
                    else:
                        flux_out += h
                report["enthalpy"][name] = (abs(flux_in - flux_out)
                                            / max(abs(flux_in), 1e-30))
            if fam == "shaft":
                eta = sv.param(b.pacc["eta_mech"])
                produced = sum(sv.mech(nn)[0] for nn in b.refs["mech_sources"])
                consumed = sum(sv.mech(nn)[0] for nn in b.refs["mech_sinks"])
                report["shaft_power"][name] = (abs(eta * produced - consumed)
                                               / max(abs(produced), 1e-30))
        return report


def _propagate_mixes(model: Model, nodes, port_to_node) -> dict:
    """Static composition propagation from the tanks downstream."""
    db = model.db
    node_mix: dict[int, object] = {}
    pending = [c for c in model.components]
    for _ in range(len(pending) + 1):
        progressed = False
        remaining = []
        for comp in pending:
            fam = family_of(comp)
            ports = fam.ports(comp)
            in_ports = [p for p in ports if p.kind == FLUID and p.direction == "in"]
            out_ports = [p for p in ports if p.kind == FLUID and p.direction == "out"]
            if not out_ports:
                continue
            in_mixes = {}
            ready = True
            for p in in_ports:
                idx = port_to_node[f"{comp.name}.{p.name}"]
                if idx not in node_mix:
                    ready = False
                    break
                in_mixes[p.name] = node_mix[idx]
            if not ready:
                remaining.append(comp)
                continue
            for pname, mix in fam.out_mixes(comp, in_mixes, db).items():
                node_mix[port_to_node[f"{comp.name}.{pname}"]] = mix
            progressed = True
        pending = remaining
        if not pending or not progressed:
            break
    unresolved = [n.name for n in nodes
                  if n.kind == FLUID and n.index not in node_mix]
    if unresolved:
        raise ModelError(
            "cannot resolve composition for node(s) "
            f"{unresolved} (disconnected from any tank, or recirculating)")
    return node_mix


def assemble(model: Model) -> NonlinearSystem:
    """Flatten a well-posed model into one square nonlinear system."""
    report = validate(model)
    if not report.is_well_posed:
        raise NotWellPosed(
            f"model is not well-posed: {report.status} "
            f"({report.n_vars} unknowns, {report.n_eqs} equations); "
            + "; ".join((report.problems + report.notes)[:8]))

    db = model.db
    nodes, port_to_node, _ = model._build_nodes()
    node_mixes = _propagate_mixes(model, nodes, port_to_node)

    comp_by_name = {c.name: c for c in model.components}
    out_side = {}  # node index -> component feeding it
    for node in nodes:
        for comp_name, port_name in node.ports:
            comp = comp_by_name[comp_name]
            for p in family_of(comp).ports(comp):
                if p.name == port_name and p.kind == FLUID and p.direction == "out":
                    out_side[node.index] = comp

    variables: list[Var] = []
    fluid_offsets = {}
    mech_offsets = {}

    def guess_for(name, default):
        return float(model.initial_guesses.get(name, default))

    for node in nodes:
        if node.kind == FLUID:
            fluid_offsets[node.index] = len(variables)
            feeder = out_side.get(node.index)
            hot = feeder is not None and feeder.family in (
                "combustion_chamber", "gas_generator")
            for fieldname in ("p0", "T0", "mdot"):
                unit = _FLUID_UNITS[fieldname]
                base = _GUESS_FLUID[fieldname]
                if fieldname == "T0" and hot:
                    base = _HOT_T_GUESS
                vname = f"{node.name}.{fieldname}"
                variables.append(Var(
                    name=vname, unit=unit, scale=SCALES[unit],
                    initial_guess=guess_for(vname, base),
                    bounds=_BOUNDS_BY_UNIT[unit]))
        else:
            mech_offsets[node.index] = len(variables)
            for fieldname in ("power", "speed"):
                unit = _MECH_UNITS[fieldname]
                vname = f"{node.name}.{fieldname}"
                variables.append(Var(
                    name=vname, unit=unit, scale=SCALES[unit],
                    initial_guess=guess_for(vname, _GUESS_MECH[fieldname]),
                    bounds=_BOUNDS_BY_UNIT[unit]))

    # freed parameters become solver variables
    free_param_index = {}
    for comp in model.components:
        fam = family_of(comp)
        pdefs = {p.name: p for p in fam.params}
        for pname in comp.params:
            if not comp.is_free(pname):
                continue
            pdef = pdefs[pname]
            unit = pdef.unit
            if pdef.bounds is not None:
                bounds = pdef.bounds
            elif pdef.role == "calibration" and unit == "dimensionless":
                bounds = (1e-6, 1.0)
            else:
                bounds = _BOUNDS_BY_UNIT[unit]
            vname = f"{comp.name}.{pname}"
            free_param_index[vname] = len(variables)
            variables.append(Var(
                name=vname, unit=unit, scale=SCALES[unit],
                initial_guess=guess_for(vname, PARAM_GUESS.get(unit, 1.0)),
                bounds=bounds))

    # bind components
    bounds_comps: dict[str, BoundComponent] = {}
    for comp in model.components:
        fam = family_of(comp)
        b = BoundComponent(comp=comp)
        for port in fam.ports(comp):
            idx = port_to_node[f"{comp.name}.{port.name}"]
            if port.kind == FLUID:
                b.fluid_nodes[port.name] = idx
                b.mixes_static[port.name] = node_mixes[idx]
            else:
                b.mech_nodes[port.name] = idx
        for pdef in fam.params:
            vname = f"{comp.name}.{pdef.name}"
            if comp.is_free(pdef.name):
                b.pacc[pdef.name] = ("var", free_param_index[vname])
            else:
                v = comp.params.get(pdef.name, pdef.default)
                if pdef.kind == "float" and v is not None:
                    v = float(v)
                b.pacc[pdef.name] = ("fix", v)
        b.refs["db"] = db
        b.refs["design_refs"] = model.design_refs.get(comp.name, {})
        bounds_comps[comp.name] = b

    # cross-component references
    for name, b in bounds_comps.items():
        fam = b.comp.family
        if fam == "shaft":
            sources, sinks = [], []
            for port_name, node_idx in b.mech_nodes.items():
                peers = [pn for pn in nodes[node_idx].ports
                         if pn[0] != b.comp.name]
                if not peers:
                    raise NotWellPosed(f"shaft port {name}.{port_name} unconnected")
                peer_family = comp_by_name[peers[0][0]].family
                if peer_family == "turbine":
                    sources.append(node_idx)
                elif peer_family == "pump":
                    sinks.append(node_idx)
                else:
                    raise InvalidParameter(
                        f"shaft {name} can only couple pumps and turbines, "
                        f"found {peer_family}")
            b.refs["mech_sources"] = sources
            b.refs["mech_sinks"] = sinks
        elif fam == "nozzle":
            feeder = out_side.get(b.fluid_nodes["in"])
            if feeder is None or feeder.family != "combustion_chamber":
                raise ModelError(
                    f"nozzle {name} must be fed by a combustion chamber "
                    "(its exit area is area_ratio times the chamber throat)")
            b.refs["A_throat"] = bounds_comps[feeder.name].pacc["A_throat"]
        elif fam == "cooling_jacket":
            chamber_name = b.comp.param("chamber")
            if chamber_name:
                chamber = bounds_comps.get(chamber_name)
                if chamber is None:
                    raise ModelError(
                        f"cooling jacket {name} references unknown chamber "
                        f"{chamber_name!r}")
                b.refs["chamber_out_node"] = chamber.fluid_nodes["out"]
        elif fam == "monitor":
            b.refs["nozzles"] = [bb for bb in bounds_comps.values()
                                 if bb.comp.family in ("nozzle", "nozzle_conv")]

    # liquid/gas working-fluid preconditions
    from .errors import GasInPump, LiquidInTurbine
    for name, b in bounds_comps.items():
        fam = b.comp.family
        if fam == "pump" and not b.mixes_static["in"].is_liquid:
            raise GasInPump(f"pump {name}: working fluid must be liquid")
        if fam == "turbine" and not b.mixes_static["in"].is_gas:
            raise LiquidInTurbine(f"turbine {name}: working fluid must be gas")
        if fam == "cooling_jacket" and not b.mixes_static["cold_in"].is_liquid:
            raise ModelError(f"cooling jacket {name}: coolant must enter liquid")

    # equations: component residuals, then specification targets
    equations: list[Equation] = []
    eq_comp: list[str] = []
    for comp in model.components:
        fam = family_of(comp)
        for eq in fam.equations(comp, model.mode, bounds_comps[comp.name]):
            equations.append(eq)
            eq_comp.append(comp.name)
    for spec_entry in model.design_specs:
        if not spec_entry.active(model.mode):
            continue
        comp = comp_by_name[spec_entry.component]
        fam = family_of(comp)
        eq = fam.target_equation(comp, spec_entry.quantity, spec_entry.value,
                                 bounds_comps[comp.name])
        equations.append(eq)
        eq_comp.append(comp.name)

    # coarse sparsity: every equation of a component touches that component's
    # node variables, its free parameters and its referenced extras
    dep_sets = {}
    for name, b in bounds_comps.items():
        deps = set()
        for idx in b.fluid_nodes.values():
            off = fluid_offsets[idx]
            deps.update((off, off + 1, off + 2))
        for idx in b.mech_nodes.values():
            off = mech_offsets[idx]
            deps.update((off, off + 1))
        for acc in b.pacc.values():
            if acc[0] == "var":
                deps.add(acc[1])
        if "chamber_out_node" in b.refs:
            off = fluid_offsets[b.refs["chamber_out_node"]]
            deps.add(off + 2)
        if "A_throat" in b.refs and b.refs["A_throat"][0] == "var":
            deps.add(b.refs["A_throat"][1])
        if b.comp.family == "monitor":
            for noz in b.refs.get("nozzles", []):
                for idx in noz.fluid_nodes.values():
                    off = fluid_offsets[idx]
                    deps.update((off, off + 1, off + 2))
        dep_sets[name] = deps
    sparsity = []
    for ri, comp_name in enumerate(eq_comp):
        for vi in sorted(dep_sets[comp_name]):
            sparsity.append((ri, vi))

    return NonlinearSystem(model, variables, equations, fluid_offsets,
                           mech_offsets, node_mixes, bounds_comps, nodes,
                           sparsity)
