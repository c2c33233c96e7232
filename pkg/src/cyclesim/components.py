"""Reusable component palette: ports, parameters and residual equations.

Each family maps a component instance plus the states on its ports to a
vector of residuals that must vanish at a solution.  Equation sets depend
on the model mode:

  design     operational specifications (pressure leaps, expansion ratio,
             chamber pressure, mixture ratio, shaft speed) are imposed as
             equations while geometry parameters marked "free" are solved;
  offdesign  geometry and efficiencies are frozen and the performance
             relations (pump characteristic curve, choked corrected flow)
             replace the specifications.

Families are registered in FAMILIES; the HTTP palette and the model-file
loader are both generated from that registry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from . import fluids
from .errors import InvalidParameter
from .fluids import (
    G0,
    Mixture,
    gas_props,
    gamma_function,
    mach_from_area_ratio,
    orifice_mass_flux_gas,
)

# Scale per unit class, used both for variables and residuals.
SCALES = {
    "pressure": 1e6,
    "temperature": 1e3,
    "massflow": 1e1,
    "speed": 1e3,
    "area": 1e-3,
    "power": 1e6,
    "loss": 1e6,
    "dimensionless": 1.0,
}

# Default initial guesses for freed parameters, per unit class.
PARAM_GUESS = {"area": 1e-3, "loss": 1e6, "power": 1e6, "dimensionless": 0.8}

FLUID = "fluid"
MECH = "mech"

DESIGN = "design"
OFFDESIGN = "offdesign"


@dataclass(frozen=True)
class PortDef:
    name: str
    kind: str        # fluid | mech
    direction: str   # in | out (fluid); mech ports carry no direction


@dataclass(frozen=True)
class ParamDef:
    """Declares one component parameter.

    role:
      calibration  efficiency-like degree of freedom; may be freed at design
      geometry     sized at design (free) then frozen for off-design
      operational  boundary value, overridable in off-design simulations
      design_value value that activates a specification equation in design
      structural   model structure (compositions, curve coefficients, refs)
    """

    name: str
    role: str
    unit: str = "dimensionless"
    default: object = None
    required: bool = False
    kind: str = "float"  # float | mixture | vector | name | int
    bounds: tuple | None = None  # variable bounds when freed; unit-class default


@dataclass
class Component:
    """A palette element instance: family name, unique name, raw parameters."""

    family: str
    name: str
    params: dict = field(default_factory=dict)

    def param(self, key, default=None):
        return self.params.get(key, default)

    def is_free(self, key) -> bool:
        return self.params.get(key) == "free"

    def numeric(self, key, default=None):
        v = self.params.get(key, default)
        return None if v == "free" else v


@dataclass
class Equation:
    """One residual: name for diagnostics, unit class for scaling, and the
    evaluation closure (None when only counting for DOF analysis)."""

    name: str
    unit: str
    fn: Callable | None = None


@dataclass
class FluidState:
    p0: float
    T0: float
    mdot: float
    mix: Mixture


@dataclass
class BoundComponent:
    """A component wired into an assembled system: node indices per port,
    parameter accessors (fixed value or variable index) and resolved
    cross-component references.  Port compositions are resolved statically
    at assembly (see network module)."""

    comp: Component
    fluid_nodes: dict = field(default_factory=dict)   # port -> node index
    mech_nodes: dict = field(default_factory=dict)    # port -> node index
    pacc: dict = field(default_factory=dict)          # param -> accessor
    mixes_static: dict = field(default_factory=dict)  # port -> Mixture
    refs: dict = field(default_factory=dict)

    @property
    def name(self):
        return self.comp.name


def _density(mix: Mixture, p0: float, T0: float) -> float:
    """Liquid density from the database; total density p0/(R T0) for gas."""
    if mix.is_liquid:
        return mix.liquid_density()
    g = gas_props(mix)
    return p0 / (g.R * max(T0, 1e-9))


def _sgn_sq(x: float) -> float:
    """x|x|: sign-correct quadratic used in friction laws."""
    return x * abs(x)


class Family:
    """Base for all component families."""

    name = ""
    doc = ""
    params: tuple[ParamDef, ...] = ()
    # quantity -> unit class of the target residual built from it
    spec_targets: dict[str, str] = {}

    @classmethod
    def ports(cls, comp: Component) -> tuple[PortDef, ...]:
        raise NotImplementedError

    @classmethod
    def check(cls, comp: Component, db: fluids.FluidDb) -> list[str]:
        """Return parameter diagnostics (empty when the instance is sound)."""
        errs = []
        known = {p.name for p in cls.params}
        for key in comp.params:
            if key not in known:
                errs.append(f"{comp.name}: unknown parameter {key!r} for family {cls.name}")
        for p in cls.params:
            v = comp.params.get(p.name, p.default)
            if v == "free":
                # geometry/calibration free at design; operational freed by
                # boundary swaps (a pinned spec quantity takes its place)
                if p.role not in ("geometry", "calibration", "operational"):
                    errs.append(f"{comp.name}.{p.name}: {p.role} parameters "
                                f"cannot be free")
                continue
            if v is None:
                if p.required:
                    errs.append(f"{comp.name}.{p.name} is required")
                continue
            if p.kind == "float" and not isinstance(v, (int, float)):
                errs.append(f"{comp.name}.{p.name}: expected a number, got {v!r}")
        return errs

    @classmethod
    def equations(cls, comp: Component, mode: str, b: BoundComponent | None = None) -> list[Equation]:
        """Equation list for the mode.  With b=None only names/units are
        returned (DOF counting); with a bound component the closures are
        attached in the same order."""
        raise NotImplementedError

    @classmethod
    def target_equation(cls, comp: Component, quantity: str, value: float,
                        b: BoundComponent | None = None) -> Equation:
        raise InvalidParameter(
            f"{comp.name}: family {cls.name} has no spec quantity {quantity!r}")

    @classmethod
    def out_mixes(cls, comp: Component, in_mixes: dict, db: fluids.FluidDb) -> dict:
        """Composition rule: mixture on each outgoing port given the inlets."""
        return {}

    @classmethod
    def derived(cls, b: BoundComponent, sv) -> dict:
        """Post-solution derived quantities (exit states, thrust, ...)."""
        return {}


def _eff_check(errs, comp, key, lo=0.0, hi=1.0):
    v = comp.numeric(key)
    if isinstance(v, (int, float)) and not (lo < v <= hi):
        errs.append(f"{comp.name}.{key} must be in ({lo}, {hi}], got {v}")


# ---------------------------------------------------------------------------
# tanks and lines


class Tank(Family):
    name = "tank"
    doc = "Propellant reservoir pinning outlet total pressure and temperature."
    params = (
        ParamDef("p_out", "operational", "pressure"),
        ParamDef("T_out", "operational", "temperature"),
        ParamDef("contents", "structural", kind="mixture", required=True),
    )
    spec_targets = {"mdot": "massflow"}

    @classmethod
    def ports(cls, comp):
        return (PortDef("out", FLUID, "out"),)

    @classmethod
    def check(cls, comp, db):
        errs = super().check(comp, db)
        contents = comp.param("contents")
        if contents is not None:
            try:
                db.mixture(contents)
            except Exception as exc:
                errs.append(f"{comp.name}.contents: {exc}")
        return errs

    @classmethod
    def equations(cls, comp, mode, b=None):
        eqs = []
        if comp.numeric("p_out") is not None:
            fn = None
            if b is not None:
                node = b.fluid_nodes["out"]
                p_out = b.pacc["p_out"]
                fn = lambda sv: sv.fluid(node).p0 - sv.param(p_out)
            eqs.append(Equation(f"{comp.name}.p_out", "pressure", fn))
        if comp.numeric("T_out") is not None:
            fn = None
            if b is not None:
                node = b.fluid_nodes["out"]
                T_out = b.pacc["T_out"]
                fn = lambda sv: sv.fluid(node).T0 - sv.param(T_out)
            eqs.append(Equation(f"{comp.name}.T_out", "temperature", fn))
        return eqs

    @classmethod
    def target_equation(cls, comp, quantity, value, b=None):
        if quantity == "mdot":
            fn = None
            if b is not None:
                node = b.fluid_nodes["out"]
                fn = lambda sv: sv.fluid(node).mdot - value
            return Equation(f"{comp.name}.spec.mdot", "massflow", fn)
        return super().target_equation(comp, quantity, value, b)

    @classmethod
    def out_mixes(cls, comp, in_mixes, db):
        return {"out": db.mixture(comp.param("contents"))}


class Pipe(Family):
    name = "pipe"
    doc = "Adiabatic line with a quadratic friction pressure drop."
    params = (
        ParamDef("k_loss", "geometry", "loss", required=True),
    )
    spec_targets = {"mdot": "massflow", "dp": "pressure", "p_out": "pressure"}

    @classmethod
    def ports(cls, comp):
        return (PortDef("in", FLUID, "in"), PortDef("out", FLUID, "out"))

    @classmethod
    def _k_eff(cls, b, sv):
        return sv.param(b.pacc["k_loss"])

    @classmethod
    def equations(cls, comp, mode, b=None):
        fns = [None, None, None]
        if b is not None:
            ni, no = b.fluid_nodes["in"], b.fluid_nodes["out"]

            def f_mass(sv):
                return sv.fluid(no).mdot - sv.fluid(ni).mdot

            def f_temp(sv):
                return sv.fluid(no).T0 - sv.fluid(ni).T0

            def f_dp(sv):
                s_in, s_out = sv.fluid(ni), sv.fluid(no)
                rho = _density(s_in.mix, s_in.p0, s_in.T0)
                k = cls._k_eff(b, sv)
                return s_out.p0 - s_in.p0 + k * _sgn_sq(s_in.mdot) / rho

            fns = [f_mass, f_temp, f_dp]
        return [
            Equation(f"{comp.name}.continuity", "massflow", fns[0]),
            Equation(f"{comp.name}.temperature", "temperature", fns[1]),
            Equation(f"{comp.name}.pressure_drop", "pressure", fns[2]),
        ]

    @classmethod
    def target_equation(cls, comp, quantity, value, b=None):
        fn = None
        if quantity == "mdot":
            if b is not None:
                ni = b.fluid_nodes["in"]
                fn = lambda sv: sv.fluid(ni).mdot - value
            return Equation(f"{comp.name}.spec.mdot", "massflow", fn)
        if quantity == "dp":
            if b is not None:
                ni, no = b.fluid_nodes["in"], b.fluid_nodes["out"]
                fn = lambda sv: (sv.fluid(ni).p0 - sv.fluid(no).p0) - value
            return Equation(f"{comp.name}.spec.dp", "pressure", fn)
        if quantity == "p_out":
            if b is not None:
                no = b.fluid_nodes["out"]
                fn = lambda sv: sv.fluid(no).p0 - value
            return Equation(f"{comp.name}.spec.p_out", "pressure", fn)
        return super().target_equation(comp, quantity, value, b)

    @classmethod
    def out_mixes(cls, comp, in_mixes, db):
        return {"out": in_mixes["in"]}


class Valve(Pipe):
    name = "valve"
    doc = "Pipe with an opening fraction; effective loss is k/opening^2."
    params = Pipe.params + (
        ParamDef("opening", "operational", default=1.0, bounds=(1e-3, 1.0)),
    )
    spec_targets = dict(Pipe.spec_targets)

    @classmethod
    def check(cls, comp, db):
        errs = super().check(comp, db)
        opening = comp.numeric("opening", 1.0)
        if isinstance(opening, (int, float)) and not (0.0 < opening <= 1.0):
            errs.append(f"{comp.name}.opening must be in (0, 1], got {opening} "
                        "(opening = 0 is a degenerate zero-flow branch)")
        return errs

    @classmethod
    def _k_eff(cls, b, sv):
        opening = sv.param(b.pacc["opening"])
        return sv.param(b.pacc["k_loss"]) / (opening * opening)


# ---------------------------------------------------------------------------
# turbomachinery


class Pump(Family):
    name = "pump"
    doc = ("Liquid pump: pressure leap specified at design, affinity-scaled "
           "quadratic head curve off-design.")
    params = (
        ParamDef("eta", "calibration", required=True),
        ParamDef("dp_design", "design_value", "pressure"),
        ParamDef("char", "structural", kind="vector", default=(1.5, 0.0, -0.5)),
    )
    spec_targets = {"dp": "pressure", "mdot": "massflow"}

    @classmethod
    def ports(cls, comp):
        return (PortDef("in", FLUID, "in"), PortDef("out", FLUID, "out"),
                PortDef("mech", MECH, "mech"))

    @classmethod
    def check(cls, comp, db):
        errs = super().check(comp, db)
        _eff_check(errs, comp, "eta")
        char = comp.param("char", (1.5, 0.0, -0.5))
        if not (isinstance(char, (list, tuple)) and len(char) == 3):
            errs.append(f"{comp.name}.char must be three coefficients (a, b, c)")
        return errs

    @classmethod
    def equations(cls, comp, mode, b=None):
        fns = {}
        if b is not None:
            ni, no = b.fluid_nodes["in"], b.fluid_nodes["out"]
            nm = b.mech_nodes["mech"]
            eta = b.pacc["eta"]

            def f_mass(sv):
                return sv.fluid(no).mdot - sv.fluid(ni).mdot

            def f_temp(sv):
                return sv.fluid(no).T0 - sv.fluid(ni).T0

            def f_power(sv):
                s_in, s_out = sv.fluid(ni), sv.fluid(no)
                rho = s_in.mix.liquid_density()
                power, _ = sv.mech(nm)
                return power - s_in.mdot * (s_out.p0 - s_in.p0) / (rho * sv.param(eta))

            fns = {"mass": f_mass, "temp": f_temp, "power": f_power}

            if mode == DESIGN:
                dp = b.pacc.get("dp_design")

                def f_mode(sv):
                    return (sv.fluid(no).p0 - sv.fluid(ni).p0) - sv.param(dp)
            else:
                refs = b.refs["design_refs"]
                a, bb, c = comp.param("char", (1.5, 0.0, -0.5))

                def f_mode(sv):
                    s_in, s_out = sv.fluid(ni), sv.fluid(no)
                    _, speed = sv.mech(nm)
                    n = speed / refs["N_d"]
                    qh = s_in.mdot / refs["mdot_d"]
                    head = refs["dp_d"] * (a * n * n + bb * n * qh + c * qh * qh)
                    return (s_out.p0 - s_in.p0) - head

            fns["mode"] = f_mode

        eqs = [
            Equation(f"{comp.name}.continuity", "massflow", fns.get("mass")),
            Equation(f"{comp.name}.temperature", "temperature", fns.get("temp")),
            Equation(f"{comp.name}.power", "power", fns.get("power")),
        ]
        if mode == DESIGN:
            if comp.numeric("dp_design") is not None:
                eqs.append(Equation(f"{comp.name}.dp_spec", "pressure", fns.get("mode")))
        else:
            eqs.append(Equation(f"{comp.name}.head_curve", "pressure", fns.get("mode")))
        return eqs

    @classmethod
    def target_equation(cls, comp, quantity, value, b=None):
        fn = None
        if quantity == "dp":
            if b is not None:
                ni, no = b.fluid_nodes["in"], b.fluid_nodes["out"]
                fn = lambda sv: (sv.fluid(no).p0 - sv.fluid(ni).p0) - value
            return Equation(f"{comp.name}.spec.dp", "pressure", fn)
        if quantity == "mdot":
            if b is not None:
                ni = b.fluid_nodes["in"]
                fn = lambda sv: sv.fluid(ni).mdot - value
            return Equation(f"{comp.name}.spec.mdot", "massflow", fn)
        return super().target_equation(comp, quantity, value, b)

    @classmethod
    def out_mixes(cls, comp, in_mixes, db):
        return {"out": in_mixes["in"]}


class Turbine(Family):
    name = "turbine"
    doc = ("Gas turbine: expansion ratio specified at design, always-choked "
           "corrected flow through the sized effective area off-design.")
    params = (
        ParamDef("eta", "calibration", required=True),
        ParamDef("pi_design", "design_value"),
        ParamDef("A_eff", "geometry", "area"),
    )
    spec_targets = {"pi": "pressure", "mdot": "massflow"}

    @classmethod
    def ports(cls, comp):
        return (PortDef("in", FLUID, "in"), PortDef("out", FLUID, "out"),
                PortDef("mech", MECH, "mech"))

    @classmethod
    def check(cls, comp, db):
        errs = super().check(comp, db)
        _eff_check(errs, comp, "eta")
        pi = comp.numeric("pi_design")
        if isinstance(pi, (int, float)) and pi <= 1.0:
            errs.append(f"{comp.name}.pi_design must be > 1, got {pi}")
        return errs

    @staticmethod
    def _work_fraction(pi: float, gamma: float, eta: float) -> float:
        """eta (1 - pi^-((g-1)/g)), the actual-to-inlet enthalpy drop ratio."""
        pi = max(pi, 1e-9)
        return eta * (1.0 - pi ** (-(gamma - 1.0) / gamma))

    @classmethod
    def equations(cls, comp, mode, b=None):
        fns = {}
        if b is not None:
            ni, no = b.fluid_nodes["in"], b.fluid_nodes["out"]
            nm = b.mech_nodes["mech"]
            eta = b.pacc["eta"]
            props = gas_props(b.mixes_static["in"])
            gam = gamma_function(props.gamma)

            def f_mass(sv):
                return sv.fluid(no).mdot - sv.fluid(ni).mdot

            def f_temp(sv):
                s_in, s_out = sv.fluid(ni), sv.fluid(no)
                w = cls._work_fraction(s_in.p0 / s_out.p0, props.gamma, sv.param(eta))
                return s_out.T0 - s_in.T0 * (1.0 - w)

            def f_power(sv):
                s_in, s_out = sv.fluid(ni), sv.fluid(no)
                power, _ = sv.mech(nm)
                w = cls._work_fraction(s_in.p0 / s_out.p0, props.gamma, sv.param(eta))
                return power - s_in.mdot * props.cp * s_in.T0 * w

            a_eff = b.pacc["A_eff"]

            def f_choked(sv):
                s_in = sv.fluid(ni)
                cap = gam * s_in.p0 * sv.param(a_eff) / math.sqrt(props.R * max(s_in.T0, 1e-9))
                return s_in.mdot - cap

            fns = {"mass": f_mass, "temp": f_temp, "power": f_power, "choked": f_choked}

            if mode == DESIGN and comp.numeric("pi_design") is not None:
                pi = b.pacc["pi_design"]

                def f_pi(sv):
                    return sv.fluid(ni).p0 - sv.param(pi) * sv.fluid(no).p0

                fns["pi"] = f_pi

        eqs = [
            Equation(f"{comp.name}.continuity", "massflow", fns.get("mass")),
            Equation(f"{comp.name}.outlet_temperature", "temperature", fns.get("temp")),
            Equation(f"{comp.name}.power", "power", fns.get("power")),
            Equation(f"{comp.name}.choked_flow", "massflow", fns.get("choked")),
        ]
        if mode == DESIGN and comp.numeric("pi_design") is not None:
            eqs.append(Equation(f"{comp.name}.pi_spec", "pressure", fns.get("pi")))
        return eqs

    @classmethod
    def target_equation(cls, comp, quantity, value, b=None):
        fn = None
        if quantity == "pi":
            if b is not None:
                ni, no = b.fluid_nodes["in"], b.fluid_nodes["out"]
                fn = lambda sv: sv.fluid(ni).p0 - value * sv.fluid(no).p0
            return Equation(f"{comp.name}.spec.pi", "pressure", fn)
        if quantity == "mdot":
            if b is not None:
                ni = b.fluid_nodes["in"]
                fn = lambda sv: sv.fluid(ni).mdot - value
            return Equation(f"{comp.name}.spec.mdot", "massflow", fn)
        return super().target_equation(comp, quantity, value, b)

    @classmethod
    def out_mixes(cls, comp, in_mixes, db):
        return {"out": in_mixes["in"]}


class Shaft(Family):
    name = "shaft"
    doc = ("Mechanical union of turbomachines: equal speeds and a power "
           "balance with a transmission efficiency.")
    params = (
        ParamDef("eta_mech", "calibration", default=1.0),
        ParamDef("n_ports", "structural", kind="int", default=2),
        ParamDef("N_design", "design_value", "speed"),
    )
    spec_targets = {"speed": "speed"}

    @classmethod
    def ports(cls, comp):
        n = int(comp.param("n_ports", 2))
        return tuple(PortDef(f"mech{i + 1}", MECH, "mech") for i in range(n))

    @classmethod
    def check(cls, comp, db):
        errs = super().check(comp, db)
        _eff_check(errs, comp, "eta_mech")
        n = comp.param("n_ports", 2)
        if not isinstance(n, int) or n < 2:
            errs.append(f"{comp.name}.n_ports must be an integer >= 2")
        return errs

    @classmethod
    def equations(cls, comp, mode, b=None):
        n = int(comp.param("n_ports", 2))
        eqs = []
        nodes = None
        if b is not None:
            nodes = [b.mech_nodes[f"mech{i + 1}"] for i in range(n)]
        for i in range(1, n):
            fn = None
            if b is not None:
                n0, nk = nodes[0], nodes[i]
                fn = (lambda n0, nk: lambda sv: sv.mech(nk)[1] - sv.mech(n0)[1])(n0, nk)
            eqs.append(Equation(f"{comp.name}.speed_{i + 1}", "speed", fn))
        fn = None
        if b is not None:
            eta = b.pacc["eta_mech"]
            sources = b.refs["mech_sources"]   # node indices attached to turbines
            sinks = b.refs["mech_sinks"]       # node indices attached to pumps

            def f_balance(sv):
                produced = sum(sv.mech(nn)[0] for nn in sources)
                consumed = sum(sv.mech(nn)[0] for nn in sinks)
                return sv.param(eta) * produced - consumed

            fn = f_balance
        eqs.append(Equation(f"{comp.name}.power_balance", "power", fn))
        if mode == DESIGN and comp.numeric("N_design") is not None:
            fn = None
            if b is not None:
                n0 = b.mech_nodes["mech1"]
                nd = b.pacc["N_design"]
                fn = lambda sv: sv.mech(n0)[1] - sv.param(nd)
            eqs.append(Equation(f"{comp.name}.speed_spec", "speed", fn))
        return eqs

    @classmethod
    def target_equation(cls, comp, quantity, value, b=None):
        if quantity == "speed":
            fn = None
            if b is not None:
                n0 = b.mech_nodes["mech1"]
                fn = lambda sv: sv.mech(n0)[1] - value
            return Equation(f"{comp.name}.spec.speed", "speed", fn)
        return super().target_equation(comp, quantity, value, b)


# ---------------------------------------------------------------------------
# combustion devices


class CombustionChamber(Family):
    name = "combustion_chamber"
    doc = ("Fixed-products combustor with a choked throat; design mode pins "
           "chamber pressure and mixture ratio while sizing the throat.")
    params = (
        ParamDef("eta_comb", "calibration", required=True),
        ParamDef("A_throat", "geometry", "area"),
        ParamDef("p_c_design", "design_value", "pressure"),
        ParamDef("of_design", "design_value"),
    )
    spec_targets = {"p_c": "pressure", "of": "massflow", "mdot": "massflow",
                    "Tc": "temperature"}
    has_throat = True

    @classmethod
    def ports(cls, comp):
        return (PortDef("fuel_in", FLUID, "in"), PortDef("ox_in", FLUID, "in"),
                PortDef("out", FLUID, "out"))

    @classmethod
    def check(cls, comp, db):
        errs = super().check(comp, db)
        _eff_check(errs, comp, "eta_comb")
        return errs

    @classmethod
    def _tc_closure(cls, b):
        db = b.refs["db"]
        fuel_mix = b.mixes_static["fuel_in"]
        ox_mix = b.mixes_static["ox_in"]
        entry = db.product_entry(fuel_mix, ox_mix)
        props = gas_props(entry.products)
        q = fuel_mix.heat_of_combustion()
        eta = b.pacc["eta_comb"]

        def tc(sv, f, ox, T_f, T_ox):
            total = f + ox
            if total <= 1e-12:
                return T_f
            t_mix = (f * T_f + ox * T_ox) / total
            burnable = f
            if entry.of_stoich > 0:
                burnable = min(f, ox / entry.of_stoich)
            heat = sv.param(eta) * q * max(burnable, 0.0)
            return t_mix + heat / (total * props.cp)

        return tc, props

    @classmethod
    def equations(cls, comp, mode, b=None):
        fns = {}
        if b is not None:
            nf, nox, no = (b.fluid_nodes["fuel_in"], b.fluid_nodes["ox_in"],
                           b.fluid_nodes["out"])
            tc, props = cls._tc_closure(b)
            gam = gamma_function(props.gamma)

            def f_mass(sv):
                return sv.fluid(no).mdot - sv.fluid(nf).mdot - sv.fluid(nox).mdot

            def f_pf(sv):
                return sv.fluid(nf).p0 - sv.fluid(no).p0

            def f_pox(sv):
                return sv.fluid(nox).p0 - sv.fluid(no).p0

            def f_energy(sv):
                sf, sox, so = sv.fluid(nf), sv.fluid(nox), sv.fluid(no)
                return so.T0 - tc(sv, sf.mdot, sox.mdot, sf.T0, sox.T0)

            fns = {"mass": f_mass, "pf": f_pf, "pox": f_pox, "energy": f_energy}

            if cls.has_throat:
                a_t = b.pacc["A_throat"]

                def f_choked(sv):
                    so = sv.fluid(no)
                    cap = gam * so.p0 * sv.param(a_t) / math.sqrt(props.R * max(so.T0, 1e-9))
                    return so.mdot - cap

                fns["choked"] = f_choked

            if mode == DESIGN:
                if comp.numeric("p_c_design") is not None:
                    pc = b.pacc["p_c_design"]
                    fns["p_c"] = lambda sv: sv.fluid(no).p0 - sv.param(pc)
                if comp.numeric("of_design") is not None:
                    of = b.pacc["of_design"]
                    fns["of"] = (lambda sv: sv.fluid(nox).mdot
                                 - sv.param(of) * sv.fluid(nf).mdot)

        eqs = [
            Equation(f"{comp.name}.mass_balance", "massflow", fns.get("mass")),
            Equation(f"{comp.name}.fuel_feed_pressure", "pressure", fns.get("pf")),
            Equation(f"{comp.name}.ox_feed_pressure", "pressure", fns.get("pox")),
            Equation(f"{comp.name}.energy", "temperature", fns.get("energy")),
        ]
        if cls.has_throat:
            eqs.append(Equation(f"{comp.name}.choked_throat", "massflow", fns.get("choked")))
        if mode == DESIGN:
            if comp.numeric("p_c_design") is not None:
                eqs.append(Equation(f"{comp.name}.p_c_spec", "pressure", fns.get("p_c")))
            if comp.numeric("of_design") is not None:
                eqs.append(Equation(f"{comp.name}.of_spec", "massflow", fns.get("of")))
        return eqs

    @classmethod
    def target_equation(cls, comp, quantity, value, b=None):
        fn = None
        if quantity == "p_c":
            if b is not None:
                no = b.fluid_nodes["out"]
                fn = lambda sv: sv.fluid(no).p0 - value
            return Equation(f"{comp.name}.spec.p_c", "pressure", fn)
        if quantity == "of":
            if b is not None:
                nf, nox = b.fluid_nodes["fuel_in"], b.fluid_nodes["ox_in"]
                fn = lambda sv: sv.fluid(nox).mdot - value * sv.fluid(nf).mdot
            return Equation(f"{comp.name}.spec.of", "massflow", fn)
        if quantity == "mdot":
            if b is not None:
                no = b.fluid_nodes["out"]
                fn = lambda sv: sv.fluid(no).mdot - value
            return Equation(f"{comp.name}.spec.mdot", "massflow", fn)
        if quantity == "Tc":
            if b is not None:
                no = b.fluid_nodes["out"]
                fn = lambda sv: sv.fluid(no).T0 - value
            return Equation(f"{comp.name}.spec.Tc", "temperature", fn)
        return super().target_equation(comp, quantity, value, b)

    @classmethod
    def out_mixes(cls, comp, in_mixes, db):
        entry = db.product_entry(in_mixes["fuel_in"], in_mixes["ox_in"])
        return {"out": entry.products}


class GasGenerator(CombustionChamber):
    name = "gas_generator"
    doc = ("Fuel-rich burner feeding a turbine; reuses the chamber equations "
           "without a throat (the downstream nozzle or turbine sets the flow).")
    params = (
        ParamDef("eta_comb", "calibration", required=True),
        ParamDef("p_c_design", "design_value", "pressure"),
        ParamDef("of_design", "design_value"),
    )
    has_throat = False


# ---------------------------------------------------------------------------
# nozzles


def _nozzle_exit(p0, T0, mdot, gamma, R, M_e, eta_noz, A_e, p_amb):
    T_e = T0 / (1.0 + 0.5 * (gamma - 1.0) * M_e * M_e)
    p_e = p0 * (T_e / max(T0, 1e-12)) ** (gamma / (gamma - 1.0))
    v_e = eta_noz * M_e * math.sqrt(gamma * R * T_e)
    thrust = mdot * v_e + (p_e - p_amb) * A_e
    return {"M_e": M_e, "T_e": T_e, "p_e": p_e, "v_e": v_e, "A_e": A_e,
            "thrust": thrust, "momentum_thrust": mdot * v_e,
            "separation_risk": p_e < 0.4 * p_amb}


class Nozzle(Family):
    name = "nozzle"
    doc = ("Convergent-divergent nozzle expanding the chamber flow to the "
           "supersonic branch of its area ratio; contributes thrust.")
    params = (
        ParamDef("area_ratio", "geometry", required=True),
        ParamDef("eta_noz", "calibration", default=1.0),
        ParamDef("p_amb", "operational", "pressure", default=0.0),
    )
    spec_targets = {"thrust": "power"}

    @classmethod
    def ports(cls, comp):
        return (PortDef("in", FLUID, "in"),)

    @classmethod
    def check(cls, comp, db):
        errs = super().check(comp, db)
        _eff_check(errs, comp, "eta_noz")
        ar = comp.numeric("area_ratio")
        if isinstance(ar, (int, float)) and ar < 1.0:
            errs.append(f"{comp.name}.area_ratio must be >= 1, got {ar}")
        return errs

    @classmethod
    def equations(cls, comp, mode, b=None):
        return []

    @classmethod
    def _exit_state(cls, b, sv):
        ni = b.fluid_nodes["in"]
        s = sv.fluid(ni)
        props = gas_props(b.mixes_static["in"])
        ar = sv.param(b.pacc["area_ratio"])
        m_e = mach_from_area_ratio(max(ar, 1.0), props.gamma, "supersonic")
        a_t = sv.param(b.refs["A_throat"])
        return _nozzle_exit(s.p0, s.T0, s.mdot, props.gamma, props.R, m_e,
                            sv.param(b.pacc["eta_noz"]), ar * a_t,
                            sv.param(b.pacc["p_amb"]))

    @classmethod
    def target_equation(cls, comp, quantity, value, b=None):
        if quantity == "thrust":
            fn = None
            if b is not None:
                fn = lambda sv: cls._exit_state(b, sv)["thrust"] - value
            return Equation(f"{comp.name}.spec.thrust", "power", fn)
        return super().target_equation(comp, quantity, value, b)

    @classmethod
    def derived(cls, b, sv):
        return cls._exit_state(b, sv)


class ConvergentNozzle(Family):
    name = "nozzle_conv"
    doc = ("Convergent nozzle (gas-generator exhaust, cold-gas thruster): "
           "sonic or pressure-matched subsonic exit at its throat.")
    params = (
        ParamDef("A_throat", "geometry", "area", required=True),
        ParamDef("eta_noz", "calibration", default=1.0),
        ParamDef("p_amb", "operational", "pressure", default=0.0),
    )
    spec_targets = {"mdot": "massflow"}

    @classmethod
    def ports(cls, comp):
        return (PortDef("in", FLUID, "in"),)

    @classmethod
    def equations(cls, comp, mode, b=None):
        fn = None
        if b is not None:
            ni = b.fluid_nodes["in"]
            props = gas_props(b.mixes_static["in"])
            a_t = b.pacc["A_throat"]
            p_amb = b.pacc["p_amb"]

            def f_capacity(sv):
                s = sv.fluid(ni)
                pr = sv.param(p_amb) / max(s.p0, 1e-9)
                flux = orifice_mass_flux_gas(s.p0, max(s.T0, 1e-9), pr,
                                             props.gamma, props.R)
                return s.mdot - sv.param(a_t) * flux

            fn = f_capacity
        return [Equation(f"{comp.name}.flow_capacity", "massflow", fn)]

    @classmethod
    def target_equation(cls, comp, quantity, value, b=None):
        if quantity == "mdot":
            fn = None
            if b is not None:
                ni = b.fluid_nodes["in"]
                fn = lambda sv: sv.fluid(ni).mdot - value
            return Equation(f"{comp.name}.spec.mdot", "massflow", fn)
        return super().target_equation(comp, quantity, value, b)

    @classmethod
    def derived(cls, b, sv):
        ni = b.fluid_nodes["in"]
        s = sv.fluid(ni)
        props = gas_props(b.mixes_static["in"])
        g = props.gamma
        p_amb = sv.param(b.pacc["p_amb"])
        pr_crit = (2.0 / (g + 1.0)) ** (g / (g - 1.0))
        pr = p_amb / max(s.p0, 1e-9)
        m_e = 1.0 if pr <= pr_crit else fluids.mach_from_pressure_ratio(pr, g)
        return _nozzle_exit(s.p0, s.T0, s.mdot, g, props.R, m_e,
                            sv.param(b.pacc["eta_noz"]),
                            sv.param(b.pacc["A_throat"]), p_amb)


# ---------------------------------------------------------------------------
# thermal / feed elements


class CoolingJacket(Family):
    name = "cooling_jacket"
    doc = ("Regenerative cooling circuit: fixed design heat pickup scaled "
           "with chamber flow to the 0.8 power, plus a friction drop; the "
           "heated coolant leaves as its gas form.")
    params = (
        ParamDef("Q_design", "calibration", "power"),
        ParamDef("k_loss", "geometry", "loss"),
        ParamDef("chamber", "structural", kind="name"),
        ParamDef("exponent", "structural", default=0.8),
    )
    spec_targets = {"T_out": "temperature", "p_out": "pressure", "dp": "pressure"}

    @classmethod
    def ports(cls, comp):
        return (PortDef("cold_in", FLUID, "in"), PortDef("cold_out", FLUID, "out"))

    @classmethod
    def equations(cls, comp, mode, b=None):
        fns = [None, None, None]
        if b is not None:
            ni, no = b.fluid_nodes["cold_in"], b.fluid_nodes["cold_out"]
            q_acc = b.pacc["Q_design"]
            k_acc = b.pacc["k_loss"]
            cp = b.mixes_static["cold_in"].cp()
            rho = b.mixes_static["cold_in"].liquid_density()
            exponent = float(comp.param("exponent", 0.8))
            chamber_node = b.refs.get("chamber_out_node")
            refs = b.refs.get("design_refs") or {}
            mdot_ch_d = refs.get("mdot_chamber_d")

            def f_mass(sv):
                return sv.fluid(no).mdot - sv.fluid(ni).mdot

            def f_energy(sv):
                s_in, s_out = sv.fluid(ni), sv.fluid(no)
                q = sv.param(q_acc)
                if mode == OFFDESIGN and chamber_node is not None and mdot_ch_d:
                    ratio = max(sv.fluid(chamber_node).mdot, 0.0) / mdot_ch_d
                    q = q * ratio ** exponent
                mdot = max(s_in.mdot, 1e-9)
                return s_out.T0 - (s_in.T0 + q / (mdot * cp))

            def f_dp(sv):
                s_in, s_out = sv.fluid(ni), sv.fluid(no)
                k = sv.param(k_acc)
                return s_out.p0 - s_in.p0 + k * _sgn_sq(s_in.mdot) / rho

            fns = [f_mass, f_energy, f_dp]
        return [
            Equation(f"{comp.name}.continuity", "massflow", fns[0]),
            Equation(f"{comp.name}.heat_pickup", "temperature", fns[1]),
            Equation(f"{comp.name}.pressure_drop", "pressure", fns[2]),
        ]

    @classmethod
    def target_equation(cls, comp, quantity, value, b=None):
        fn = None
        if quantity == "T_out":
            if b is not None:
                no = b.fluid_nodes["cold_out"]
                fn = lambda sv: sv.fluid(no).T0 - value
            return Equation(f"{comp.name}.spec.T_out", "temperature", fn)
        if quantity == "p_out":
            if b is not None:
                no = b.fluid_nodes["cold_out"]
                fn = lambda sv: sv.fluid(no).p0 - value
            return Equation(f"{comp.name}.spec.p_out", "pressure", fn)
        if quantity == "dp":
            if b is not None:
                ni, no = b.fluid_nodes["cold_in"], b.fluid_nodes["cold_out"]
                fn = lambda sv: (sv.fluid(ni).p0 - sv.fluid(no).p0) - value
            return Equation(f"{comp.name}.spec.dp", "pressure", fn)
        return super().target_equation(comp, quantity, value, b)

    @classmethod
    def out_mixes(cls, comp, in_mixes, db):
        return {"cold_out": db.gasified(in_mixes["cold_in"])}


class Injector(Family):
    name = "injector"
    doc = ("Orifice feeding a combustion device: incompressible law for "
           "liquids, compressible law for gases; discharge area sized at design.")
    params = (
        ParamDef("Cd", "calibration", required=True),
        ParamDef("A_inj", "geometry", "area"),
    )
    spec_targets = {"dp": "pressure", "mdot": "massflow"}

    @classmethod
    def ports(cls, comp):
        return (PortDef("in", FLUID, "in"), PortDef("out", FLUID, "out"))

    @classmethod
    def check(cls, comp, db):
        errs = super().check(comp, db)
        _eff_check(errs, comp, "Cd")
        return errs

    @classmethod
    def equations(cls, comp, mode, b=None):
        fns = [None, None, None]
        if b is not None:
            ni, no = b.fluid_nodes["in"], b.fluid_nodes["out"]
            cd = b.pacc["Cd"]
            a_acc = b.pacc["A_inj"]
            mix = b.mixes_static["in"]
            liquid = mix.is_liquid
            props = None if liquid else gas_props(mix)
            rho = mix.liquid_density() if liquid else None

            def f_mass(sv):
                return sv.fluid(no).mdot - sv.fluid(ni).mdot

            def f_temp(sv):
                return sv.fluid(no).T0 - sv.fluid(ni).T0

            def f_orifice(sv):
                s_in, s_out = sv.fluid(ni), sv.fluid(no)
                area = sv.param(a_acc) * sv.param(cd)
                if liquid:
                    dp = s_in.p0 - s_out.p0
                    flow = area * math.copysign(math.sqrt(2.0 * rho * abs(dp)), dp)
                else:
                    if s_in.p0 >= s_out.p0:
                        pr = s_out.p0 / max(s_in.p0, 1e-9)
                        flow = area * orifice_mass_flux_gas(
                            s_in.p0, max(s_in.T0, 1e-9), pr, props.gamma, props.R)
                    else:
                        pr = s_in.p0 / max(s_out.p0, 1e-9)
                        flow = -area * orifice_mass_flux_gas(
                            s_out.p0, max(s_in.T0, 1e-9), pr, props.gamma, props.R)
                return s_in.mdot - flow

            fns = [f_mass, f_temp, f_orifice]
        return [
            Equation(f"{comp.name}.continuity", "massflow", fns[0]),
            Equation(f"{comp.name}.temperature", "temperature", fns[1]),
            Equation(f"{comp.name}.orifice", "massflow", fns[2]),
        ]

    @classmethod
    def target_equation(cls, comp, quantity, value, b=None):
        fn = None
        if quantity == "dp":
            if b is not None:
                ni, no = b.fluid_nodes["in"], b.fluid_nodes["out"]
                fn = lambda sv: (sv.fluid(ni).p0 - sv.fluid(no).p0) - value
            return Equation(f"{comp.name}.spec.dp", "pressure", fn)
        if quantity == "mdot":
            if b is not None:
                ni = b.fluid_nodes["in"]
                fn = lambda sv: sv.fluid(ni).mdot - value
            return Equation(f"{comp.name}.spec.mdot", "massflow", fn)
        return super().target_equation(comp, quantity, value, b)

    @classmethod
    def out_mixes(cls, comp, in_mixes, db):
        return {"out": in_mixes["in"]}


# ---------------------------------------------------------------------------
# flow topology elements


class Junction(Family):
    name = "junction"
    doc = "Two inlets merge: common pressure, enthalpy-weighted outlet temperature."
    params = ()

    @classmethod
    def ports(cls, comp):
        return (PortDef("in1", FLUID, "in"), PortDef("in2", FLUID, "in"),
                PortDef("out", FLUID, "out"))

    @classmethod
    def equations(cls, comp, mode, b=None):
        fns = [None] * 4
        if b is not None:
            n1, n2, no = b.fluid_nodes["in1"], b.fluid_nodes["in2"], b.fluid_nodes["out"]
            cp1 = b.mixes_static["in1"].cp()
            cp2 = b.mixes_static["in2"].cp()
            cpo = b.mixes_static["out"].cp()

            def f_mass(sv):
                return sv.fluid(no).mdot - sv.fluid(n1).mdot - sv.fluid(n2).mdot

            def f_p1(sv):
                return sv.fluid(n1).p0 - sv.fluid(no).p0

            def f_p2(sv):
                return sv.fluid(n2).p0 - sv.fluid(no).p0

            def f_energy(sv):
                s1, s2, so = sv.fluid(n1), sv.fluid(n2), sv.fluid(no)
                return (so.T0 * cpo * (s1.mdot + s2.mdot)
                        - s1.mdot * cp1 * s1.T0 - s2.mdot * cp2 * s2.T0)

            fns = [f_mass, f_p1, f_p2, f_energy]
        return [
            Equation(f"{comp.name}.mass_balance", "massflow", fns[0]),
            Equation(f"{comp.name}.pressure_in1", "pressure", fns[1]),
            Equation(f"{comp.name}.pressure_in2", "pressure", fns[2]),
            Equation(f"{comp.name}.energy_mix", "power", fns[3]),
        ]

    @classmethod
    def out_mixes(cls, comp, in_mixes, db):
        # static pre-blend assuming equal split; refined dynamically when the
        # inlet compositions differ (see network assembly)
        return {"out": Mixture.blend([(in_mixes["in1"], 0.5), (in_mixes["in2"], 0.5)])}


class Splitter(Family):
    name = "splitter"
    doc = "One inlet forks into two branches; the split fraction is a free unknown."
    params = ()

    @classmethod
    def ports(cls, comp):
        return (PortDef("in", FLUID, "in"), PortDef("out1", FLUID, "out"),
                PortDef("out2", FLUID, "out"))

    @classmethod
    def equations(cls, comp, mode, b=None):
        fns = [None] * 5
        if b is not None:
            ni, n1, n2 = b.fluid_nodes["in"], b.fluid_nodes["out1"], b.fluid_nodes["out2"]
            fns = [
                lambda sv: sv.fluid(ni).mdot - sv.fluid(n1).mdot - sv.fluid(n2).mdot,
                lambda sv: sv.fluid(n1).p0 - sv.fluid(ni).p0,
                lambda sv: sv.fluid(n2).p0 - sv.fluid(ni).p0,
                lambda sv: sv.fluid(n1).T0 - sv.fluid(ni).T0,
                lambda sv: sv.fluid(n2).T0 - sv.fluid(ni).T0,
            ]
        return [
            Equation(f"{comp.name}.mass_balance", "massflow", fns[0]),
            Equation(f"{comp.name}.pressure_out1", "pressure", fns[1]),
            Equation(f"{comp.name}.pressure_out2", "pressure", fns[2]),
            Equation(f"{comp.name}.temperature_out1", "temperature", fns[3]),
            Equation(f"{comp.name}.temperature_out2", "temperature", fns[4]),
        ]

    @classmethod
    def out_mixes(cls, comp, in_mixes, db):
        return {"out1": in_mixes["in"], "out2": in_mixes["in"]}


class Monitor(Family):
    name = "monitor"
    doc = ("Performance metering: aggregates thrust over every nozzle at its "
           "own ambient pressure and reports specific impulse and mixture ratio.")
    params = (
        ParamDef("p_amb", "operational", "pressure", default=0.0),
    )
    spec_targets = {"thrust": "power"}

    @classmethod
    def ports(cls, comp):
        return ()

    @classmethod
    def equations(cls, comp, mode, b=None):
        return []

    @classmethod
    def _total_thrust(cls, b, sv):
        p_amb = sv.param(b.pacc["p_amb"])
        total = 0.0
        for noz in b.refs.get("nozzles", []):
            d = FAMILIES[noz.comp.family].derived(noz, sv)
            total += d["momentum_thrust"] + (d["p_e"] - p_amb) * d["A_e"]
        return total

    @classmethod
    def target_equation(cls, comp, quantity, value, b=None):
        if quantity == "thrust":
            fn = None
            if b is not None:
                fn = lambda sv: cls._total_thrust(b, sv) - value
            return Equation(f"{comp.name}.spec.thrust", "power", fn)
        return super().target_equation(comp, quantity, value, b)

    @classmethod
    def derived(cls, b, sv):
        return {"thrust": cls._total_thrust(b, sv)}


FAMILIES: dict[str, type[Family]] = {
    f.name: f for f in (
        Tank, Pipe, Valve, Pump, Turbine, Shaft, CombustionChamber,
        GasGenerator, Nozzle, ConvergentNozzle, CoolingJacket, Injector,
        Junction, Splitter, Monitor,
    )
}


def family_of(comp: Component) -> type[Family]:
    from .errors import UnknownComponentFamily
    try:
        return FAMILIES[comp.family]
    except KeyError:
        raise UnknownComponentFamily(
            f"unknown component family {comp.family!r} (component {comp.name!r})") from None


@dataclass
class PerformanceMetrics:
    """Engine-level outputs: F, Isp = F/(mdot g0), mixture ratio and the
    residual shaft power imbalance (zero at a converged solution)."""

    thrust: float
    isp: float
    of_ratio: float | None
    power_balance_residual: float
    mdot_total: float
    warnings: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "thrust": self.thrust,
            "isp": self.isp,
            "of_ratio": self.of_ratio,
            "power_balance_residual": self.power_balance_residual,
            "mdot_total": self.mdot_total,
            "warnings": list(self.warnings),
        }
