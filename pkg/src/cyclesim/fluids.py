"""Ideal-fluid property database and compressible-flow identities.

Working fluids are ideal liquids (constant density and cp) and ideal gases
(constant cp and gamma), so every thermodynamic relation used by the
component equations reduces to a closed form collected here:

    R      = cp (gamma - 1) / gamma                     specific gas constant
    Gamma  = sqrt(g) (2/(g+1))^((g+1)/(2(g-1)))         choked-flow constant
    mdot   = Gamma p0 A* / sqrt(R T0)                   choked mass flow
    A/A*   = (1/M) [(2/(g+1))(1 + (g-1)/2 M^2)]^((g+1)/(2(g-1)))

Combustion avoids chemical equilibrium entirely: each propellant pair maps
to a fixed product pseudo-gas, and the chamber temperature follows from a
constant heat-of-combustion energy balance with an efficiency knob.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    EmptyMixture,
    GasInLiquidMixture,
    InvalidGamma,
    InvalidMach,
    LiquidInGasMixture,
    NoSolution,
    UnknownPropellantPair,
    UnknownSpecies,
)

R_UNIVERSAL = 8.314462618  # J/(mol K)
G0 = 9.80665               # m/s^2, standard gravity (exact)

GAS = "ideal_gas"
LIQUID = "ideal_liquid"

_DATA_DIR = Path(__file__).parent / "data"
FLUID_DB_ENV = "CYCLESIM_FLUIDS"


@dataclass(frozen=True)
class Species:
    """One pure substance, either an ideal gas or an ideal liquid.

    For gases R is always derived from cp and gamma (R = cp (g-1)/g), so the
    ideal-gas relation holds exactly; molar_mass is informational.
    """

    name: str
    phase: str
    cp: float                      # J/(kg K)
    gamma: float | None = None     # gas only
    molar_mass: float | None = None  # kg/mol, gas only
    density: float | None = None   # kg/m^3, liquid only
    heat_of_combustion: float = 0.0  # J per kg fuel, fuel species only
    role: str = "inert"            # fuel | oxidizer | inert
    gas_form: str | None = None    # species this liquid turns into when heated

    def __post_init__(self):
        if self.cp <= 0:
            raise ValueError(f"species {self.name}: cp must be > 0")
        if self.phase == GAS:
            if self.gamma is None or self.gamma <= 1.0:
                raise InvalidGamma(f"species {self.name}: gas needs gamma > 1")
        elif self.phase == LIQUID:
            if self.density is None or self.density <= 0:
                raise ValueError(f"species {self.name}: liquid needs density > 0")
        else:
            raise ValueError(f"species {self.name}: unknown phase {self.phase!r}")
        if self.heat_of_combustion < 0:
            raise ValueError(f"species {self.name}: heat_of_combustion must be >= 0")

    @property
    def is_gas(self) -> bool:
        return self.phase == GAS

    @property
    def R(self) -> float:
        """Specific gas constant, J/(kg K)."""
        if not self.is_gas:
            raise GasInLiquidMixture(f"{self.name} is a liquid, has no R")
        return self.cp * (self.gamma - 1.0) / self.gamma


@dataclass(frozen=True)
class Mixture:
    """Mass-fraction composition; fractions must sum to 1 within 1e-12."""

    components: tuple[tuple[Species, float], ...]

    def __post_init__(self):
        for sp, w in self.components:
            if w < 0:
                raise ValueError(f"mixture: negative mass fraction for {sp.name}")
        if self.components:
            total = sum(w for _, w in self.components)
            if abs(total - 1.0) > 1e-12:
                raise ValueError(f"mixture: mass fractions sum to {total}, not 1")

    @classmethod
    def of(cls, *pairs) -> "Mixture":
        return cls(tuple(pairs))

    @classmethod
    def pure(cls, species: Species) -> "Mixture":
        return cls(((species, 1.0),))

    @property
    def is_empty(self) -> bool:
        return not self.components

    @property
    def is_gas(self) -> bool:
        return bool(self.components) and all(sp.is_gas for sp, _ in self.components)

    @property
    def is_liquid(self) -> bool:
        return bool(self.components) and all(not sp.is_gas for sp, _ in self.components)

    def species_names(self) -> tuple[str, ...]:
        return tuple(sp.name for sp, _ in self.components)

    def cp(self) -> float:
        """Mass-fraction-weighted cp (phase-agnostic)."""
        if self.is_empty:
            raise EmptyMixture("cp of empty mixture")
        return sum(w * sp.cp for sp, w in self.components)

    def liquid_density(self) -> float:
        """Volume-additive mixture density; requires all-liquid composition."""
        if self.is_empty:
            raise EmptyMixture("density of empty mixture")
        if not self.is_liquid:
            raise GasInLiquidMixture(
                f"density undefined for gas-bearing mixture {self.species_names()}")
        return 1.0 / sum(w / sp.density for sp, w in self.components if w > 0)

    def heat_of_combustion(self) -> float:
        """Mass-weighted heat release, J per kg of this mixture."""
        if self.is_empty:
            raise EmptyMixture("heat of combustion of empty mixture")
        return sum(w * sp.heat_of_combustion for sp, w in self.components)

    @staticmethod
    def blend(weighted: list[tuple["Mixture", float]]) -> "Mixture":
        """Mass-weighted merge of mixtures (junction rule)."""
        total = sum(w for _, w in weighted)
        if total <= 0:
            # degenerate zero-flow blend: fall back to the first composition
            return weighted[0][0]
        accum: dict[str, list] = {}
        for mix, w in weighted:
            for sp, frac in mix.components:
                entry = accum.setdefault(sp.name, [sp, 0.0])
                entry[1] += frac * w / total
        comps = tuple((sp, frac) for sp, frac in accum.values() if frac > 0)
        # renormalize away rounding residue
        s = sum(f for _, f in comps)
        return Mixture(tuple((sp, f / s) for sp, f in comps))


@dataclass(frozen=True)
class GasProperties:
    """Derived gas view of a mixture; R = cp - cp/gamma holds exactly."""

    cp: float
    gamma: float
    R: float


def gas_props(mix: Mixture) -> GasProperties:
    """Mass-fraction-weighted gas properties of a mixture.

    cv is weighted per species (cv_i = cp_i / gamma_i), then
    gamma = cp/cv and R = cp - cv.
    """
    if mix.is_empty:
        raise EmptyMixture("gas_props of empty mixture")
    for sp, _ in mix.components:
        if not sp.is_gas:
            raise LiquidInGasMixture(f"{sp.name} is a liquid")
    cp = sum(w * sp.cp for sp, w in mix.components)
    cv = sum(w * sp.cp / sp.gamma for sp, w in mix.components)
    return GasProperties(cp=cp, gamma=cp / cv, R=cp - cv)


def gamma_function(gamma: float) -> float:
    """Vandenkerckhove function Gamma(g), strictly increasing on (1, 2]."""
    if gamma <= 1.0:
        raise InvalidGamma(f"gamma must be > 1, got {gamma}")
    return math.sqrt(gamma) * (2.0 / (gamma + 1.0)) ** (
        (gamma + 1.0) / (2.0 * (gamma - 1.0)))


def choked_mass_flow(p0: float, T0: float, area: float, gamma: float, R: float) -> float:
    """mdot through a sonic throat: Gamma(g) p0 A / sqrt(R T0)."""
    return gamma_function(gamma) * p0 * area / math.sqrt(R * T0)


def area_ratio_from_mach(M: float, gamma: float) -> float:
    """Isentropic A/A* as a function of Mach number."""
    if M <= 0:
        raise InvalidMach(f"Mach must be > 0, got {M}")
    if gamma <= 1.0:
        raise InvalidGamma(f"gamma must be > 1, got {gamma}")
    g = gamma
    t = (2.0 / (g + 1.0)) * (1.0 + 0.5 * (g - 1.0) * M * M)
    return t ** ((g + 1.0) / (2.0 * (g - 1.0))) / M


def mach_from_area_ratio(area_ratio: float, gamma: float, branch: str) -> float:
    """Invert A/A* on the requested branch by bracketed bisection.

    Converges to |AR(M) - AR| <= 1e-10 AR; unconditionally convergent even
    next to the sonic singularity, which Newton is not.
    """
    if area_ratio < 1.0:
        raise NoSolution(f"area ratio {area_ratio} < 1 has no solution")
    if branch not in ("subsonic", "supersonic"):
        raise ValueError(f"branch must be subsonic or supersonic, got {branch!r}")
    if area_ratio == 1.0:
        return 1.0
    if branch == "subsonic":
        lo, hi = 1e-9, 1.0
    else:
        lo, hi = 1.0, 2.0
        while area_ratio_from_mach(hi, gamma) < area_ratio:
            hi *= 2.0
            if hi > 1e6:
                raise NoSolution(f"area ratio {area_ratio} out of range")
    tol = 1e-10 * area_ratio
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        ar = area_ratio_from_mach(mid, gamma)
        if abs(ar - area_ratio) <= tol:
            return mid
        # AR decreases with M below M=1 and increases above
        if (ar > area_ratio) == (branch == "subsonic"):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def pressure_ratio_from_mach(M: float, gamma: float) -> float:
    """Isentropic static/total pressure ratio p/p0 at Mach M."""
    g = gamma
    return (1.0 + 0.5 * (g - 1.0) * M * M) ** (-g / (g - 1.0))


def mach_from_pressure_ratio(pr: float, gamma: float) -> float:
    """Invert p/p0 -> M (closed form)."""
    if not 0.0 < pr <= 1.0:
        raise InvalidMach(f"pressure ratio must be in (0, 1], got {pr}")
    g = gamma
    return math.sqrt(2.0 / (g - 1.0) * (pr ** (-(g - 1.0) / g) - 1.0))


def orifice_mass_flux_gas(p0: float, T0: float, pr: float, gamma: float, R: float) -> float:
    """Compressible orifice mass flux (kg/s/m^2) for downstream/upstream
    total-pressure ratio pr; chokes at the critical ratio."""
    g = gamma
    pr_crit = (2.0 / (g + 1.0)) ** (g / (g - 1.0))
    if pr <= pr_crit:
        return gamma_function(g) * p0 / math.sqrt(R * T0)
    M = mach_from_pressure_ratio(pr, g)
    return (p0 * math.sqrt(g / (R * T0)) * M
            * (1.0 + 0.5 * (g - 1.0) * M * M) ** (-(g + 1.0) / (2.0 * (g - 1.0))))


@dataclass(frozen=True)
class ProductEntry:
    """Fixed combustion products for one propellant pair."""

    fuel_species: tuple[str, ...]
    oxidizer_species: tuple[str, ...]
    products: "Mixture"
    of_stoich: float = 0.0  # 0 disables the oxidizer-limited cutoff


@dataclass
class FluidDb:
    """Species table plus per-propellant-pair product entries.

    Shipped as a JSON data file so the palette can be extended without
    touching code; CYCLESIM_FLUIDS overrides the bundled path.
    """

    species: dict[str, Species] = field(default_factory=dict)
    products: list[ProductEntry] = field(default_factory=list)

    def get(self, name: str) -> Species:
        try:
            return self.species[name]
        except KeyError:
            raise UnknownSpecies(f"unknown species {name!r}") from None

    def mixture(self, spec) -> Mixture:
        """Build a Mixture from a species name or a {name: fraction} map."""
        if isinstance(spec, str):
            return Mixture.pure(self.get(spec))
        if isinstance(spec, dict):
            return Mixture(tuple((self.get(n), float(w)) for n, w in spec.items()))
        raise UnknownSpecies(f"cannot interpret mixture spec {spec!r}")

    def gasified(self, mix: Mixture) -> Mixture:
        """Swap each liquid species for its declared gas form (heated coolant)."""
        out = []
        for sp, w in mix.components:
            if not sp.is_gas and sp.gas_form:
                out.append((self.get(sp.gas_form), w))
            else:
                out.append((sp, w))
        return Mixture(tuple(out))

    def product_entry(self, fuel: Mixture, oxidizer: Mixture) -> ProductEntry:
        fuel_names = set(fuel.species_names())
        ox_names = set(oxidizer.species_names())
        for entry in self.products:
            if fuel_names <= set(entry.fuel_species) and ox_names <= set(entry.oxidizer_species):
                return entry
        raise UnknownPropellantPair(
            f"no product entry for fuel {sorted(fuel_names)} with oxidizer {sorted(ox_names)}")

    def combustion(self, fuel: Mixture, oxidizer: Mixture, of_ratio: float,
                   inlet_T_fuel: float, inlet_T_ox: float,
                   eta_comb: float) -> tuple[Mixture, float]:
        """Fixed-products energy balance.

        Tc = T_mix + eta q_eff / ((1 + of) cp_products), with T_mix the
        mass-weighted inlet temperature.  Below the stoichiometric mixture
        ratio the released heat is oxidizer-limited: q_eff = q of/of_stoich
        (entries with of_stoich = 0 burn all fuel regardless).
        """
        if of_ratio < 0:
            raise ValueError(f"of_ratio must be >= 0, got {of_ratio}")
        if not 0.0 < eta_comb <= 1.0:
            raise ValueError(f"eta_comb must be in (0, 1], got {eta_comb}")
        entry = self.product_entry(fuel, oxidizer)
        props = gas_props(entry.products)
        t_mix = (inlet_T_fuel + of_ratio * inlet_T_ox) / (1.0 + of_ratio)
        q = fuel.heat_of_combustion()
        if entry.of_stoich > 0:
            q *= min(1.0, of_ratio / entry.of_stoich)
        tc = t_mix + eta_comb * q / ((1.0 + of_ratio) * props.cp)
        return entry.products, tc


def load_db(path: str | os.PathLike | None = None) -> FluidDb:
    """Load a fluid database file; default resolves via CYCLESIM_FLUIDS
    then the bundled data file."""
    if path is None:
        path = os.environ.get(FLUID_DB_ENV) or _DATA_DIR / "fluids.json"
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    db = FluidDb()
    for name, fields in raw.get("species", {}).items():
        db.species[name] = Species(name=name, **fields)
    for entry in raw.get("combustion_products", []):
        db.products.append(ProductEntry(
            fuel_species=tuple(entry["fuel"]),
            oxidizer_species=tuple(entry["oxidizer"]),
            products=db.mixture(entry["products"]),
            of_stoich=float(entry.get("of_stoich", 0.0)),
        ))
    return db


_default_db: FluidDb | None = None


def default_db() -> FluidDb:
    """Process-wide default database (respects CYCLESIM_FLUIDS at first use)."""
    global _default_db
    if _default_db is None:
        _default_db = load_db()
    return _default_db
