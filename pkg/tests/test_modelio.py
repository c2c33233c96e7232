"""Model file round trips, loader diagnostics, export stability, CLI codes."""

import json

import pytest

from cyclesim.cli import main
from cyclesim.errors import ParseError, UnknownComponentFamily
from cyclesim.modelio import (
    bundled_models,
    export_results,
    load_bundled,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
)
from cyclesim.network import validate
from cyclesim.solver import sweep
from cyclesim.workflow import run_design, run_offdesign


def model_signature(m):
    return (
        m.name, m.mode,
        [(c.family, c.name, c.params) for c in m.components],
        list(m.connections),
        [(s.component, s.quantity, s.value, s.mode) for s in m.design_specs],
        m.initial_guesses, m.design_refs, m.provenance, m.design_solution,
    )


class TestModelFiles:
    @pytest.mark.parametrize("name", ["cold_gas", "pressure_fed",
                                      "gas_generator", "expander"])
    def test_round_trip_semantic_equality(self, name, tmp_path):
        m1 = load_bundled(name)
        path = tmp_path / "m.json"
        save_model(m1, path)
        m2 = load_model(path)
        save_model(m2, tmp_path / "m2.json")
        m3 = load_model(tmp_path / "m2.json")
        assert model_signature(m1) == model_signature(m2) == model_signature(m3)

    def test_bundled_expander_well_posed(self):
        assert validate(load_bundled("expander")).is_well_posed

    def test_sized_model_round_trip(self, tmp_path):
        sized = run_design(load_bundled("cold_gas"))
        path = tmp_path / "sized.json"
        save_model(sized.model, path)
        again = load_model(path)
        assert model_signature(again) == model_signature(sized.model)
        out = run_offdesign(again)
        assert out.result.converged

    def test_misspelled_family_named(self):
        raw = json.loads(bundled_models()["pressure_fed"].read_text())
        raw["components"][2]["family"] = "pmup"
        with pytest.raises(UnknownComponentFamily) as exc:
            model_from_dict(raw)
        assert "pmup" in str(exc.value)
        assert "components[2]" in str(exc.value)

    def test_duplicate_names_list_both_locations(self):
        raw = json.loads(bundled_models()["pressure_fed"].read_text())
        raw["components"][3]["name"] = raw["components"][1]["name"]
        with pytest.raises(ParseError) as exc:
            model_from_dict(raw)
        msg = str(exc.value)
        assert "components[3]" in msg and "components[1]" in msg

    def test_unknown_fields_rejected_with_location(self):
        raw = json.loads(bundled_models()["cold_gas"].read_text())
        raw["banana"] = 1
        raw["components"][0]["paramz"] = {}
        with pytest.raises(ParseError) as exc:
            model_from_dict(raw)
        msg = str(exc.value)
        assert "banana" in msg
        assert "components[0]" in msg and "paramz" in msg

    def test_every_error_listed_not_just_first(self):
        raw = json.loads(bundled_models()["pressure_fed"].read_text())
        raw["components"][0]["family"] = "pmup"
        raw["components"][1]["params"]["bogus"] = 1.0
        raw["connections"].append(["nowhere.out", "chamber.fuel_in"])
        with pytest.raises(ParseError) as exc:
            model_from_dict(raw)
        assert len(exc.value.diagnostics) >= 3

    def test_json_syntax_error_carries_line(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"format_version": 1,\n  "mode": design}\n')
        with pytest.raises(ParseError) as exc:
            load_model(bad)
        assert "line 2" in str(exc.value)

    def test_inline_species_extension(self, tmp_path):
        raw = {
            "format_version": 1, "name": "inline", "mode": "design",
            "fluids": {"species": {"argon": {
                "phase": "ideal_gas", "cp": 520.0, "gamma": 1.667}}},
            "components": [
                {"family": "tank", "name": "t",
                 "params": {"p_out": 1e6, "T_out": 300.0, "contents": "argon"}},
                {"family": "nozzle_conv", "name": "n",
                 "params": {"A_throat": "free", "eta_noz": 1.0, "p_amb": 0.0}},
            ],
            "connections": [["t.out", "n.in"]],
            "design_specs": [
                {"component": "n", "quantity": "mdot", "value": 1.0}],
        }
        m = model_from_dict(raw)
        assert validate(m).is_well_posed
        sized = run_design(m)
        assert sized.design_result.converged


class TestExport:
    def test_single_solve_one_row(self):
        out = run_offdesign(run_design(load_bundled("cold_gas")))
        data = export_results(out, "csv").decode().splitlines()
        assert len(data) == 2  # header + one data row
        assert data[0].startswith("status,")
        assert data[1].startswith("converged,")

    def test_sweep_rows_and_failed_marker(self):
        sized = run_design(load_bundled("pressure_fed"))
        table = sweep(sized.model, "fuel_valve.opening",
                      [1.0, 0.0, 0.9])
        data = export_results(table, "csv").decode().splitlines()
        assert len(data) == 4
        failed = data[2].split(",")
        assert failed[1] == "failed"
        assert set(failed[2:10]) == {""}  # empty values on the failed row

    def test_byte_identical_exports(self):
        out = run_offdesign(run_design(load_bundled("cold_gas")))
        assert export_results(out, "csv") == export_results(out, "csv")
        assert export_results(out, "json") == export_results(out, "json")

    def test_json_mirrors_csv_columns(self):
        out = run_offdesign(run_design(load_bundled("cold_gas")))
        payload = json.loads(export_results(out, "json"))
        header = export_results(out, "csv").decode().splitlines()[0].split(",")
        assert payload["columns"] == header
        assert len(payload["rows"]) == 1


class TestCli:
    def test_validate_ok_exit_0(self, capsys):
        rc = main(["validate", str(bundled_models()["expander"])])
        assert rc == 0
        assert "well_posed" in capsys.readouterr().out

    def test_validate_failure_exit_2(self, tmp_path, capsys):
        raw = json.loads(bundled_models()["pressure_fed"].read_text())
        raw["design_specs"] = []
        path = tmp_path / "under.json"
        path.write_text(json.dumps(raw))
        assert main(["validate", str(path)]) == 2

    def test_missing_file_exit_4(self, capsys):
        assert main(["validate", "/nonexistent/model.json"]) == 4

    def test_corrupt_file_exit_4(self, tmp_path, capsys):
        path = tmp_path / "corrupt.json"
        path.write_text("{nope")
        assert main(["validate", str(path)]) == 4

    def test_design_simulate_pipeline(self, tmp_path, capsys):
        sized_path = tmp_path / "sized.json"
        rc = main(["design", str(bundled_models()["pressure_fed"]),
                   "--out", str(sized_path)])
        assert rc == 0
        assert sized_path.exists()
        results = tmp_path / "run.csv"
        rc = main(["simulate", str(sized_path), "--set",
                   "fuel_tank.p_out=2300000", "--out", str(results)])
        assert rc == 0
        assert results.read_text().startswith("status,")

    def test_solver_failure_exit_3(self, tmp_path, capsys):
        sized_path = tmp_path / "sized.json"
        rc = main(["design", str(bundled_models()["pressure_fed"]),
                   "--out", str(sized_path), "--max-iters", "1"])
        assert rc == 3

    def test_sweep_command(self, tmp_path, capsys):
        sized_path = tmp_path / "sized.json"
        main(["design", str(bundled_models()["pressure_fed"]),
              "--out", str(sized_path)])
        out = tmp_path / "sweep.csv"
        rc = main(["sweep", str(sized_path), "--param", "fuel_tank.p_out",
                   "--from", "2300000", "--to", "2500000", "--steps", "3",
                   "--out", str(out)])
        assert rc == 0
        assert len(out.read_text().splitlines()) == 4

    def test_examples_listing(self, capsys):
        assert main(["examples"]) == 0
        listing = capsys.readouterr().out
        for name in ("cold_gas", "pressure_fed", "gas_generator", "expander"):
            assert name in listing
