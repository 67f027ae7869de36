import math

import pytest
from fastapi.testclient import TestClient

from supou.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app(), raise_server_exceptions=False)


GAMMA_MIX = {"kind": "gamma", "parameters": {"alpha": 0.6}}
IG = {"kind": "inverse_gaussian", "parameters": {"delta": 1.0, "gamma": 1.0},
      "centered": True}


class TestBasics:
    def test_health(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        assert resp.json() == {"status": "ok"}

    def test_default_config(self, client):
        resp = client.get("/config/default")
        assert resp.status_code == 200
        assert set(resp.json()) == {"correlation", "cumulants", "scaling",
                                    "simulate", "verify"}


class TestCorrelation:
    def test_gamma_closed_form(self, client):
        resp = client.post("/correlation", json={
            "mixing": GAMMA_MIX,
            "tau_grid": {"min": 0.01, "max": 100.0, "count": 7}})
        assert resp.status_code == 200
        rows = resp.json()["rows"]
        assert rows[0]["tau"] == 0.0  # include_zero default
        for row in rows:
            expected = (1.0 + row["tau"]) ** -0.6
            assert row["quadrature"] == pytest.approx(expected, rel=1e-8)
            assert row["closed_form"] == pytest.approx(expected, rel=1e-12)

    def test_degenerate_has_no_closed_form_column_value(self, client):
        resp = client.post("/correlation", json={
            "mixing": {"kind": "degenerate", "parameters": {"rate": 3.0}},
            "tau_grid": {"min": 1.0, "max": 10.0, "count": 2},
            "include_zero": False})
        assert resp.status_code == 200
        row = resp.json()["rows"][0]
        assert row["quadrature"] == pytest.approx(math.exp(-3.0), rel=1e-10)
        assert row["closed_form"] is None


class TestCumulants:
    def test_basic_table(self, client):
        resp = client.post("/cumulants", json={
            "mixing": {"kind": "degenerate", "parameters": {"rate": 1.0}},
            "marginal": {"kind": "gamma",
                         "parameters": {"shape": 1.0, "rate": 1.0},
                         "centered": True},
            "kind": "integrated", "orders": [2],
            "t_grid": {"min": 1.0, "max": 10.0, "count": 2}})
        assert resp.status_code == 200
        row = resp.json()["rows"][0]
        assert row["cumulant"] == pytest.approx(2.0 * math.exp(-1.0), rel=1e-12)

    def test_cross_check(self, client):
        resp = client.post("/cumulants", json={
            "mixing": GAMMA_MIX, "marginal": IG, "orders": [2, 3],
            "t_grid": {"min": 10.0, "max": 1000.0, "count": 4},
            "cross_check": True})
        assert resp.status_code == 200
        assert resp.json()["cross_check_max_rel"] < 1e-7

    def test_unknown_mixing_kind_is_422(self, client):
        resp = client.post("/cumulants", json={
            "mixing": {"kind": "nope", "parameters": {}},
            "marginal": IG})
        assert resp.status_code == 422

    def test_extra_field_is_422(self, client):
        resp = client.post("/cumulants", json={
            "mixing": GAMMA_MIX, "marginal": IG, "surprise": 1})
        assert resp.status_code == 422

    def test_bad_parameter_is_422_with_detail(self, client):
        resp = client.post("/cumulants", json={
            "mixing": {"kind": "gamma", "parameters": {"alpha": -1.0}},
            "marginal": IG})
        assert resp.status_code == 422
        assert "detail" in resp.json()

    def test_student_marginal_is_422(self, client):
        resp = client.post("/cumulants", json={
            "mixing": GAMMA_MIX,
            "marginal": {"kind": "student", "parameters": {"nu": 5.0}}})
        assert resp.status_code == 422
        assert "analytic" in resp.json()["detail"]


class TestScaling:
    def test_sigma_mode(self, client):
        resp = client.post("/scaling", json={
            "mixing": {"kind": "gamma", "parameters": {"alpha": 0.5}},
            "marginal": IG, "mode": "sigma", "orders": [2, 3],
            "exponents": [2, 4],
            "t_grid": {"min": 1e3, "max": 1e6, "count": 9}})
        assert resp.status_code == 200
        data = resp.json()
        by_m = {row["exponent"]: row for row in data["rows"]}
        assert by_m[2]["estimate"] == pytest.approx(1.5, abs=0.05)
        assert by_m[3]["estimate"] == pytest.approx(2.5, abs=0.05)
        assert by_m[2]["theoretical"] == pytest.approx(1.5)
        assert data["verdict"] == "intermittent"
        assert "2" in data["plot_data"] or 2 in data["plot_data"]

    def test_degenerate_not_intermittent(self, client):
        resp = client.post("/scaling", json={
            "mixing": {"kind": "degenerate", "parameters": {"rate": 1.0}},
            "marginal": IG, "mode": "tau", "orders": [1, 2, 3, 4],
            "exponents": [2, 4],
            "t_grid": {"min": 1e3, "max": 1e6, "count": 9}})
        assert resp.status_code == 200
        assert resp.json()["verdict"] == "not-intermittent"


class TestSimulate:
    def test_small_run(self, client):
        resp = client.post("/simulate", json={
            "mixing": {"kind": "degenerate", "parameters": {"rate": 1.0}},
            "marginal": {"kind": "gamma",
                         "parameters": {"shape": 1.0, "rate": 1.0},
                         "centered": True},
            "horizon": 20.0, "step": 0.1, "replicas": 400, "seed": 1,
            "orders": [1, 2], "t_points": [10.0],
            "autocorrelation_lags": [1.0]})
        assert resp.status_code == 200
        data = resp.json()
        assert data["seed_ledger"]["base_seed"] == 1
        k2 = [r for r in data["cumulants"] if r["m"] == 2][0]
        assert k2["value"] == pytest.approx(k2["analytic"], abs=4 * k2["se"])
        ac = data["autocorrelations"][0]
        assert ac["expected"] == pytest.approx(math.exp(-1.0))

    def test_identical_seeds_identical_output(self, client):
        payload = {
            "mixing": {"kind": "degenerate", "parameters": {"rate": 1.0}},
            "marginal": {"kind": "gamma", "parameters": {"shape": 1.0, "rate": 1.0}},
            "horizon": 10.0, "step": 0.1, "replicas": 50, "seed": 7,
            "orders": [1, 2], "t_points": [5.0], "autocorrelation_lags": []}
        a = client.post("/simulate", json=payload).json()
        b = client.post("/simulate", json=payload).json()
        assert a == b

    def test_unsupported_mixing_is_422(self, client):
        resp = client.post("/simulate", json={
            "mixing": GAMMA_MIX,
            "marginal": {"kind": "gamma", "parameters": {"shape": 1.0, "rate": 1.0}}})
        assert resp.status_code == 422


class TestVerify:
    def test_battery_passes(self, client):
        resp = client.post("/verify", json={"alpha": 0.6, "grid_count": 9})
        assert resp.status_code == 200
        data = resp.json()
        assert data["passed"] is True
        assert all(c["passed"] for c in data["checks"])
        ids = {c["check_id"] for c in data["checks"]}
        assert "intermittency-verdict" in ids
        assert "bdlp-integral-identity" in ids

    def test_negative_control_fails(self, client):
        resp = client.post("/verify", json={"alpha": 0.6, "expected_alpha": 0.2,
                                            "grid_count": 9})
        assert resp.status_code == 200
        data = resp.json()
        assert data["passed"] is False
        failed = {c["check_id"] for c in data["checks"] if not c["passed"]}
        assert "sigma-integrated-m2" in failed
