import dataclasses
import json

import pytest
from fastapi.testclient import TestClient

from trisim.econometrics import GateCondition, ModelSpec, StationarityGate
from trisim.service import create_app


@pytest.fixture(scope="module")
def client(model_path):
    model = ModelSpec.load(model_path)
    return TestClient(create_app(model, max_workers=2))


def planner_scenario(**overrides):
    """Advanced planner scenario: large portfolio, 30-year drawdown."""
    request = {
        "initial_wealth": 2_500_000,
        "horizon": 30,
        "stock_share_start": 0.6,
        "stock_share_end": 0.4,
        "domestic_share": 0.7,
        "cashflow": {"amount": 100_000, "sign": "withdraw", "growth_rate": 0.03, "frequency": 12},
        "factor_overrides": {"vol": 10.0, "rate": 3.0, "valuation": -0.5, "spread": 1.5},
        "n_paths": 2000,
        "master_seed": 31,
    }
    request.update(overrides)
    return request


class TestHealthAndDefaults:
    def test_healthz(self, client):
        response = client.get("/healthz")
        assert response.status_code == 200
        assert response.text == "ok"

    def test_defaults_expose_factors_and_ranges(self, client):
        body = client.get("/api/defaults").json()
        assert body["initial_factors"]["year"] == 2024
        assert body["initial_factors"]["vol"] > 0
        assert body["factor_ranges"]["valuation"]["min"] < 0
        assert body["horizon"] == {"min": 1, "max": 50}
        assert body["stationary"] is True

    def test_model_summary(self, client):
        body = client.get("/api/model").json()
        assert body["gate"]["passed"] is True
        assert set(body["residual_diagnostics"]) == {
            "vol", "spread", "rate", "growth", "domestic", "intl", "bond",
        }
        assert body["valuation"]["slope_b"] == pytest.approx(1 - body["valuation"]["gamma"])
        assert len(body["residual_correlation"]["matrix"]) == 8


class TestSimulate:
    def test_planner_scenario_returns_five_paths(self, client):
        response = client.post("/api/simulate", json=planner_scenario())
        assert response.status_code == 200
        body = response.json()
        assert set(body["percentile_paths"]) == {"10", "30", "50", "70", "90"}
        for path in body["percentile_paths"].values():
            assert len(path["wealth"]) == 31
            assert path["wealth"][0]["wealth"] == 2_500_000
        assert 0 <= body["ruin_probability"] <= 1
        assert body["model_version"] == "1"
        assert body["elapsed_ms"] > 0
        assert body["config"]["factor_overrides"]["vol"] == 10.0

    def test_percentile_paths_ordered(self, client):
        body = client.post("/api/simulate", json=planner_scenario()).json()
        finals = [body["percentile_paths"][q]["wealth"][-1]["wealth"] for q in ("10", "30", "50", "70", "90")]
        assert finals == sorted(finals)

    def test_identical_request_identical_body(self, client):
        a = client.post("/api/simulate", json=planner_scenario()).json()
        b = client.post("/api/simulate", json=planner_scenario()).json()
        a.pop("elapsed_ms")
        b.pop("elapsed_ms")
        assert a == b

    def test_missing_seed_generated_and_echoed(self, client):
        request = planner_scenario()
        del request["master_seed"]
        body = client.post("/api/simulate", json=request).json()
        assert body["master_seed"] == body["config"]["master_seed"] >= 0

    def test_share_out_of_range_names_field(self, client):
        response = client.post("/api/simulate", json=planner_scenario(stock_share_start=1.5))
        assert response.status_code == 400
        errors = response.json()["errors"]
        assert any("stock_share_start" in e["field"] for e in errors)

    def test_malformed_json_is_400(self, client):
        response = client.post(
            "/api/simulate", content=b"{not json", headers={"content-type": "application/json"}
        )
        assert response.status_code == 400
        assert response.json()["errors"]

    def test_unknown_field_rejected(self, client):
        response = client.post("/api/simulate", json=planner_scenario(bogus_field=1))
        assert response.status_code == 400
        assert any("bogus_field" in e["field"] for e in response.json()["errors"])

    def test_factor_override_out_of_range(self, client):
        response = client.post(
            "/api/simulate", json=planner_scenario(factor_overrides={"vol": -3.0})
        )
        assert response.status_code == 400
        assert any("vol" in e["field"] for e in response.json()["errors"])

    def test_path_cap_enforced(self, client):
        response = client.post("/api/simulate", json=planner_scenario(n_paths=200_000))
        assert response.status_code == 400
        assert any("n_paths" in e["field"] for e in response.json()["errors"])


class TestGateRefusal:
    def test_nonstationary_model_yields_409(self, model_path):
        model = ModelSpec.load(model_path)
        failed_gate = StationarityGate(
            (GateCondition("vol_slope", 1.2, False),), passed=False
        )
        broken = dataclasses.replace(model, gate=failed_gate)
        client = TestClient(create_app(broken))
        response = client.post("/api/simulate", json=planner_scenario())
        assert response.status_code == 409
        assert "stationarity" in response.json()["errors"][0]["message"]

    def test_force_flag_allows_run(self, model_path):
        model = ModelSpec.load(model_path)
        failed_gate = StationarityGate(
            (GateCondition("vol_slope", 0.9, False),), passed=False
        )
        broken = dataclasses.replace(model, gate=failed_gate)
        client = TestClient(create_app(broken))
        response = client.post(
            "/api/simulate", json=planner_scenario(allow_nonstationary=True, horizon=5, n_paths=200)
        )
        assert response.status_code == 200
