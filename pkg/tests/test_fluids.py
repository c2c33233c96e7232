"""Fluid property and compressible-flow oracles.

Expected values are frozen from independent hand/closed-form evaluation of
the stated identities, not from the code under test.
"""

import math

import numpy as np
import pytest

from cyclesim import fluids
from cyclesim.errors import (
    EmptyMixture,
    InvalidGamma,
    LiquidInGasMixture,
    NoSolution,
    UnknownPropellantPair,
)
from cyclesim.fluids import (
    FluidDb,
    Mixture,
    ProductEntry,
    Species,
    area_ratio_from_mach,
    choked_mass_flow,
    gamma_function,
    gas_props,
    load_db,
    mach_from_area_ratio,
)

GAS_A = Species(name="gas_a", phase="ideal_gas", cp=1000.0, gamma=1.4)
GAS_B = Species(name="gas_b", phase="ideal_gas", cp=2000.0, gamma=1.3)
AIRISH = Species(name="airish", phase="ideal_gas", cp=1004.5, gamma=1.4)
BRINE = Species(name="brine", phase="ideal_liquid", cp=4000.0, density=1100.0)


class TestGasProps:
    def test_single_species_identity(self):
        props = gas_props(Mixture.pure(AIRISH))
        assert props.cp == pytest.approx(1004.5)
        assert props.gamma == pytest.approx(1.4)
        # R forced by the ideal-gas relation: cp (g-1)/g = 287.0
        assert props.R == pytest.approx(287.0, abs=1e-9)

    def test_fifty_fifty_weighting(self):
        # hand arithmetic: cp = 1500, cv = (1000/1.4 + 2000/1.3)/2 = 1126.3736,
        # gamma = 1500/1126.3736 = 1.331716, R = cp - cv = 373.6264
        props = gas_props(Mixture.of((GAS_A, 0.5), (GAS_B, 0.5)))
        assert props.cp == pytest.approx(1500.0)
        assert props.gamma == pytest.approx(1.331716, rel=1e-5)
        assert props.R == pytest.approx(373.6264, rel=1e-5)

    def test_empty_mixture(self):
        with pytest.raises(EmptyMixture):
            gas_props(Mixture(()))

    def test_liquid_rejected(self):
        with pytest.raises(LiquidInGasMixture):
            gas_props(Mixture.of((GAS_A, 0.5), (BRINE, 0.5)))

    def test_weighting_linear_in_mass_fraction(self):
        # blend props vary continuously and match the pure species at x = 0, 1
        xs = np.linspace(0.0, 1.0, 21)
        cps = []
        for x in xs:
            if x == 0.0:
                mix = Mixture.pure(GAS_B)
            elif x == 1.0:
                mix = Mixture.pure(GAS_A)
            else:
                mix = Mixture.of((GAS_A, x), (GAS_B, 1.0 - x))
            cps.append(gas_props(mix).cp)
        assert cps[0] == pytest.approx(2000.0)
        assert cps[-1] == pytest.approx(1000.0)
        diffs = np.diff(cps)
        assert np.allclose(diffs, diffs[0])  # exactly linear in x


class TestGammaFunction:
    def test_value_at_14(self):
        # sqrt(1.4) (2/2.4)^3 = 0.6847315
        assert gamma_function(1.4) == pytest.approx(0.6847, abs=1e-4)

    def test_value_at_12(self):
        # sqrt(1.2) (2/2.2)^5.5 = 0.6485295
        assert gamma_function(1.2) == pytest.approx(0.6485, abs=1e-4)

    def test_domain_boundary(self):
        assert math.isfinite(gamma_function(1.0001))
        assert gamma_function(1.0001) > 0
        with pytest.raises(InvalidGamma):
            gamma_function(1.0)

    def test_strictly_monotone(self):
        # consistent with the frozen values: Gamma(1.2) < Gamma(1.4), i.e.
        # strictly increasing over (1, 2], sampled at 100 points
        gammas = np.linspace(1.0001, 2.0, 100)
        values = [gamma_function(g) for g in gammas]
        assert all(a < b for a, b in zip(values, values[1:]))


class TestAreaRatio:
    def test_throat_identity(self):
        for g in (1.15, 1.3, 1.4, 1.66):
            assert area_ratio_from_mach(1.0, g) == pytest.approx(1.0)

    def test_closed_form_m2(self):
        # (0.83333 * 1.8)^3 / 2 = 1.6875 exactly
        assert area_ratio_from_mach(2.0, 1.4) == pytest.approx(1.6875, abs=1e-9)

    def test_inverse_supersonic(self):
        m = mach_from_area_ratio(1.6875, 1.4, "supersonic")
        assert m == pytest.approx(2.0, abs=1e-8)

    def test_inverse_below_unity(self):
        with pytest.raises(NoSolution):
            mach_from_area_ratio(0.99, 1.4, "subsonic")

    @pytest.mark.parametrize("gamma", [1.15, 1.4])
    def test_round_trip_identity(self, gamma):
        machs = np.concatenate([np.linspace(0.05, 0.95, 19),
                                np.linspace(1.05, 8.0, 25)])
        for m in machs:
            branch = "subsonic" if m < 1 else "supersonic"
            ar = area_ratio_from_mach(m, gamma)
            back = mach_from_area_ratio(ar, gamma, branch)
            assert back == pytest.approx(m, abs=1e-8)


class TestChokedFlow:
    def test_hand_value(self):
        # Gamma(1.4) 1e6 1e-3 / sqrt(287 * 300) = 2.33356 kg/s
        mdot = choked_mass_flow(1e6, 300.0, 1e-3, 1.4, 287.0)
        assert mdot == pytest.approx(2.333, abs=1e-3)


def synthetic_db():
    """Database with a plain (non-oxidizer-limited) propellant pair."""
    fuel = Species(name="fuelx", phase="ideal_liquid", cp=2000.0, density=800.0,
                   heat_of_combustion=1e7, role="fuel")
    ox = Species(name="oxx", phase="ideal_liquid", cp=1700.0, density=1100.0,
                 role="oxidizer")
    prod = Species(name="prodx", phase="ideal_gas", cp=2000.0, gamma=1.25)
    db = FluidDb(species={s.name: s for s in (fuel, ox, prod)})
    db.products.append(ProductEntry(
        fuel_species=("fuelx",), oxidizer_species=("oxx",),
        products=Mixture.pure(prod), of_stoich=0.0))
    return db


class TestCombustion:
    def test_hand_energy_balance(self):
        # Tc = 200 + 1e7 / (5 * 2000) = 1200 K at of = 4, eta = 1
        db = synthetic_db()
        fuel = db.mixture("fuelx")
        ox = db.mixture("oxx")
        _, tc = db.combustion(fuel, ox, of_ratio=4.0, inlet_T_fuel=200.0,
                              inlet_T_ox=200.0, eta_comb=1.0)
        assert tc == pytest.approx(1200.0, rel=1e-12)

    def test_large_of_limit(self):
        db = synthetic_db()
        fuel, ox = db.mixture("fuelx"), db.mixture("oxx")
        _, tc = db.combustion(fuel, ox, of_ratio=1e9, inlet_T_fuel=300.0,
                              inlet_T_ox=120.0, eta_comb=1.0)
        assert tc == pytest.approx(120.0, rel=1e-6)

    def test_unknown_pair(self):
        db = synthetic_db()
        with pytest.raises(UnknownPropellantPair):
            db.combustion(db.mixture("oxx"), db.mixture("fuelx"), 1.0,
                          300.0, 300.0, 1.0)

    def test_tc_decreasing_beyond_stoichiometric(self):
        db = load_db()
        fuel, ox = db.mixture("lh2"), db.mixture("lox")
        ofs = np.linspace(7.937, 60.0, 40)
        tcs = [db.combustion(fuel, ox, of, 100.0, 97.0, 0.95)[1] for of in ofs]
        assert all(a > b for a, b in zip(tcs, tcs[1:]))

    def test_products_fixed_composition(self):
        db = load_db()
        products, _ = db.combustion(db.mixture("lh2"), db.mixture("lox"),
                                    5.0, 100.0, 97.0, 0.9)
        assert products.species_names() == ("lox_lh2_products",)


class TestDatabase:
    def test_bundled_species_present(self):
        db = load_db()
        for name in ("lh2", "h2", "lox", "o2", "rp1", "lch4", "ch4", "n2",
                     "he", "air", "water"):
            assert db.get(name).name == name

    def test_air_matches_hand_constants(self):
        sp = load_db().get("air")
        assert sp.R == pytest.approx(287.0, abs=0.01)

    def test_gasified_swaps_liquid_for_gas_form(self):
        db = load_db()
        hot = db.gasified(db.mixture("lh2"))
        assert hot.species_names() == ("h2",)
        assert hot.is_gas

    def test_env_override(self, tmp_path, monkeypatch):
        alt = tmp_path / "alt.json"
        alt.write_text('{"species": {"argon": {"phase": "ideal_gas", '
                       '"cp": 520.0, "gamma": 1.667}}}')
        monkeypatch.setenv(fluids.FLUID_DB_ENV, str(alt))
        db = load_db()
        assert db.get("argon").gamma == pytest.approx(1.667)
