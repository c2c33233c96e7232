"""HTTP facade: status-code contract, registry-driven palette, job polling."""

import json
import time

import pytest
from fastapi.testclient import TestClient

from cyclesim.components import FAMILIES
from cyclesim.modelio import bundled_models
from cyclesim.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def read_model(name):
    return json.loads(bundled_models()[name].read_text())


@pytest.fixture(scope="module")
def sized_pressure_fed(client):
    r = client.post("/api/v1/design", json={"model": read_model("pressure_fed")})
    assert r.status_code == 200
    return r.json()["sized_model"]


class TestPalette:
    def test_components_generated_from_registry(self, client):
        r = client.get("/api/v1/components")
        assert r.status_code == 200
        payload = r.json()
        assert len(payload) == len(FAMILIES)
        assert {e["family"] for e in payload} == set(FAMILIES)

    def test_expected_families_present(self, client):
        families = {e["family"] for e in client.get("/api/v1/components").json()}
        for required in ("pump", "turbine", "combustion_chamber", "tank",
                         "nozzle", "cooling_jacket", "injector", "shaft",
                         "junction", "splitter", "valve", "gas_generator"):
            assert required in families

    def test_ports_carry_kind_and_direction(self, client):
        payload = client.get("/api/v1/components").json()
        pump = next(e for e in payload if e["family"] == "pump")
        ports = {p["name"]: p for p in pump["ports"]}
        assert ports["in"]["kind"] == "fluid"
        assert ports["in"]["direction"] == "in"
        assert ports["mech"]["kind"] == "mech"


class TestValidate:
    def test_well_posed_200(self, client):
        r = client.post("/api/v1/models/validate",
                        json={"model": read_model("expander")})
        assert r.status_code == 200
        assert r.json()["status"] == "well_posed"

    def test_under_determined_422_with_body(self, client):
        raw = read_model("pressure_fed")
        raw["design_specs"] = raw["design_specs"][:-1]
        r = client.post("/api/v1/models/validate", json={"model": raw})
        assert r.status_code == 422
        body = r.json()
        assert body["status"] == "under_determined"
        assert body["deficit"] == 1
        assert body["diagnostics"]

    def test_malformed_model_400(self, client):
        raw = read_model("pressure_fed")
        raw["components"][0]["family"] = "pmup"
        r = client.post("/api/v1/models/validate", json={"model": raw})
        assert r.status_code == 400

    def test_missing_model_section_400(self, client):
        r = client.post("/api/v1/models/validate", json={"nope": 1})
        assert r.status_code == 400

    def test_non_object_body_400(self, client):
        r = client.post("/api/v1/models/validate", json=[1, 2, 3])
        assert r.status_code == 400


class TestSolveEndpoints:
    def test_design_returns_metrics_and_sized_model(self, client):
        r = client.post("/api/v1/design", json={"model": read_model("expander")})
        assert r.status_code == 200
        body = r.json()
        assert body["metrics"]["thrust"] > 0
        assert body["metrics"]["isp"] > 0
        assert body["sized_model"]["mode"] == "offdesign"
        assert body["provenance"]["chamber.A_throat"] == "solved"

    def test_simulate_populates_thrust_and_isp(self, client, sized_pressure_fed):
        r = client.post("/api/v1/simulate", json={"model": sized_pressure_fed})
        assert r.status_code == 200
        body = r.json()
        assert body["metrics"]["thrust"] > 0
        assert body["metrics"]["isp"] > 0

    def test_solver_failure_409_with_trace(self, client):
        r = client.post("/api/v1/design",
                        json={"model": read_model("pressure_fed"),
                              "solver": {"max_iters": 1}})
        assert r.status_code == 409
        assert "trace" in r.json()

    def test_bad_override_422(self, client, sized_pressure_fed):
        r = client.post("/api/v1/simulate",
                        json={"model": sized_pressure_fed,
                              "overrides": {"chamber.A_throat": 1.0}})
        assert r.status_code == 422

    def test_deterministic_responses(self, client, sized_pressure_fed):
        r1 = client.post("/api/v1/simulate", json={"model": sized_pressure_fed})
        r2 = client.post("/api/v1/simulate", json={"model": sized_pressure_fed})
        assert r1.json() == r2.json()


class TestSweepEndpoint:
    def test_inline_sweep(self, client, sized_pressure_fed):
        r = client.post("/api/v1/sweep", json={
            "model": sized_pressure_fed, "param": "fuel_tank.p_out",
            "from": 2.3e6, "to": 2.5e6, "steps": 3})
        assert r.status_code == 200
        body = r.json()
        assert len(body["points"]) == 3
        assert body["all_converged"]

    def test_failed_point_marked(self, client, sized_pressure_fed):
        r = client.post("/api/v1/sweep", json={
            "model": sized_pressure_fed, "param": "fuel_valve.opening",
            "values": [1.0, 0.0, 0.9]})
        assert r.status_code == 200
        statuses = [p["status"] for p in r.json()["points"]]
        assert statuses == ["converged", "failed", "converged"]

    def test_async_sweep_with_polling(self, client, sized_pressure_fed):
        r = client.post("/api/v1/sweep", json={
            "model": sized_pressure_fed, "param": "fuel_tank.p_out",
            "from": 2.3e6, "to": 2.5e6, "steps": 4, "async": True})
        assert r.status_code == 200
        job_id = r.json()["job_id"]
        deadline = time.time() + 30
        while time.time() < deadline:
            j = client.get(f"/api/v1/jobs/{job_id}").json()
            if j["done"]:
                break
            time.sleep(0.02)
        assert j["done"]
        assert j["progress"] == {"completed": 4, "total": 4}
        assert len(j["points"]) == 4

    def test_unknown_job_404(self, client):
        assert client.get("/api/v1/jobs/doesnotexist").status_code == 404

    def test_missing_param_422(self, client, sized_pressure_fed):
        r = client.post("/api/v1/sweep", json={"model": sized_pressure_fed})
        assert r.status_code == 422


class TestExamples:
    def test_listing(self, client):
        r = client.get("/api/v1/examples")
        assert r.status_code == 200
        names = {e["name"] for e in r.json()}
        assert names == {"cold_gas", "pressure_fed", "gas_generator", "expander"}

    def test_fetch_single(self, client):
        r = client.get("/api/v1/examples/expander")
        assert r.status_code == 200
        assert r.json()["name"] == "expander"

    def test_unknown_404(self, client):
        assert client.get("/api/v1/examples/nope").status_code == 404
