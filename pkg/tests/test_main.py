import csv
import io
import json
import math
from pathlib import Path

import pytest

from carnot import TS_COLUMNS
from errors import ConfigError
from fock import FieldState
from main import SWEEP_COLUMNS, check_grid, parse_grid, sweep_workers

CLASSICAL = "data/configs/classical_limit.json"
SINGLE_BATH = "data/configs/single_bath_coherent.json"
LOSSY = "data/configs/lossy_dephased.json"
SHORT_TAU = "data/configs/short_tau_steady_state.json"


@pytest.fixture(autouse=True)
def repo_root(monkeypatch):
    monkeypatch.chdir(Path(__file__).parent.parent)


def csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_cycle_classical_limit(run_cli):
    code, out, _ = run_cli("cycle", "--config", CLASSICAL)
    assert code == 0
    report = json.loads(out)
    assert report["eta"] == pytest.approx(0.25, rel=1e-9)
    assert report["eta_closed_form"] == pytest.approx(0.25, rel=1e-12)
    assert report["positive_work"] is True
    assert report["frequency_labeling"] == "hot-cold"
    assert report["limits"]["ideal"] == pytest.approx(0.25)
    assert [c["index"] for c in report["corners"]] == [1, 2, 3, 4]


def test_cycle_single_bath_coherence_does_work(run_cli):
    code, out, _ = run_cli("cycle", "--config", SINGLE_BATH)
    assert code == 0
    report = json.loads(out)
    assert report["zeta_h"] < 0.0
    assert report["positive_work"] is True
    assert report["eta"] == pytest.approx(-report["zeta_h"], rel=1e-9)
    assert report["positive_work_condition"]["satisfied"] is True


def test_cycle_writes_corner_csv_and_text(run_cli, tmp_path):
    corners = tmp_path / "corners.csv"
    code, out, _ = run_cli("cycle", "--config", CLASSICAL, "--csv", str(corners), "--format", "text")
    assert code == 0
    assert out.splitlines()[0].split() == ["index", "nu_radps", "T_eff_K", "n_mean", "entropy_JperK"]
    rows = csv_rows(corners.read_text())
    assert [r["index"] for r in rows] == ["1", "2", "3", "4"]


def test_cycle_output_is_byte_identical(run_cli, tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert run_cli("cycle", "--config", LOSSY, "--out", str(first))[0] == 0
    assert run_cli("cycle", "--config", LOSSY, "--out", str(second))[0] == 0
    assert first.read_bytes() == second.read_bytes()


def test_cycle_hz_units(run_cli):
    code, out, _ = run_cli("cycle", "--config", CLASSICAL, "--set", "units=Hz")
    assert code == 0
    report = json.loads(out)
    assert report["corners"][0]["nu_radps"] == pytest.approx(2 * math.pi * 2e10)
    assert report["eta"] == pytest.approx(0.25, rel=1e-9)


def test_malformed_field_reports_path(run_cli, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"hot": {"prep": {"p_e": 0.1, "c1": {"re": "x"}, "c2": 0.5}}}))
    code, out, err = run_cli("cycle", "--config", str(path))
    assert code == 2
    assert out == ""
    assert "hot.prep.c1.re" in err


def test_invalid_json_exits_2(run_cli, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    code, _, err = run_cli("cycle", "--config", str(path))
    assert code == 2
    assert "invalid JSON" in err


def test_unknown_command_exits_2(run_cli):
    assert run_cli("warp-drive")[0] == 2


def test_steady_state_without_excited_atoms(run_cli):
    code, out, _ = run_cli("steady-state", "--set", 'hot.prep={"p_e": 0, "c1": 1, "c2": 0}')
    assert code == 0
    report = json.loads(out)
    assert report["mean_photon_analytic"] == 0.0
    assert report["mean_photon_numeric"] == pytest.approx(0.0, abs=1e-12)
    assert report["relative_gap"] == pytest.approx(0.0, abs=1e-12)


def test_steady_state_rejects_undersized_truncation(run_cli):
    code, out, err = run_cli("steady-state")
    assert code == 2
    assert out == ""
    assert "engine.n_max" in err
    assert "short_tau_steady_state.json" in err


def test_steady_state_runaway_exits_3(run_cli):
    code, out, err = run_cli("steady-state", "--set",
                             'hot.prep={"p_e": 0.5, "c1": 0.5, "c2": 0.5, "xi": 0}')
    assert code == 3
    assert out == ""
    assert "maser threshold exceeded" in err


def test_steady_state_short_tau_matches_closed_form(run_cli, tmp_path):
    dump = tmp_path / "rho.json"
    code, out, _ = run_cli("steady-state", "--config", SHORT_TAU, "--dump-state", str(dump))
    assert code == 0
    report = json.loads(out)
    assert report["mean_photon_analytic"] == pytest.approx(1.1020408163265305, rel=1e-6)
    assert report["relative_gap"] <= 0.03
    assert len(report["populations"]) == 61
    state = FieldState.from_json(json.loads(dump.read_text()))
    assert state.n_max == 60
    assert state.populations[0] == pytest.approx(report["populations"][0], rel=1e-15)


def test_steady_state_transient_block(run_cli):
    code, out, _ = run_cli("steady-state", "--config", SHORT_TAU, "--set", "solver.t_final=100")
    assert code == 0
    transient = json.loads(out)["transient"]
    assert transient["mean_photon_numeric"] == pytest.approx(transient["mean_photon_analytic"], rel=0.03)


def test_sweep_requires_grid(run_cli):
    code, _, err = run_cli("sweep", "--config", CLASSICAL, "--param", "q_factor")
    assert code == 2
    assert "grid is empty" in err


def test_sweep_quality_factor(run_cli, monkeypatch):
    monkeypatch.setenv("PCE_NUM_THREADS", "3")
    code, out, _ = run_cli("sweep", "--config", LOSSY)
    assert code == 0
    rows = csv_rows(out)
    assert list(rows[0]) == SWEEP_COLUMNS
    assert [r["value"] for r in rows] == ["10000000000", "100000000000", "1000000000000",
                                          "10000000000000", "100000000000000", "inf"]
    etas = [float(r["eta"]) for r in rows]
    assert all(a <= b for a, b in zip(etas, etas[1:]))
    assert etas[-1] == pytest.approx(0.25, rel=1e-9)
    assert all(r["error"] == "" for r in rows)


def test_sweep_dephasing_factor(run_cli):
    code, out, _ = run_cli("sweep", "--config", SINGLE_BATH, "--param", "xi", "--grid", "0,0.5,1")
    assert code == 0
    etas = [float(r["eta"]) for r in csv_rows(out)]
    assert etas[0] == pytest.approx(0.0, abs=1e-9)
    assert etas[0] < etas[1] < etas[2]


def test_sweep_temperature_ratio(run_cli):
    code, out, _ = run_cli("sweep", "--config", CLASSICAL, "--param", "t_ratio", "--grid", "1.25,2", "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert rows[0]["eta"] == pytest.approx(0.2, rel=1e-9)
    assert rows[1]["eta"] == pytest.approx(0.5, rel=1e-9)


def test_sweep_records_failed_points(run_cli):
    code, out, _ = run_cli("sweep", "--config", SINGLE_BATH, "--set", "hot.prep.coherence=1e-4",
                           "--param", "xi", "--grid", "0,1")
    assert code == 0
    rows = csv_rows(out)
    assert rows[0]["error"] == ""
    assert "1 + zeta" in rows[1]["error"]
    assert rows[1]["eta"] == ""


def test_ts_diagram_csv(run_cli):
    code, out, _ = run_cli("ts-diagram", "--config", CLASSICAL, "--set", "solver.points_per_stroke=5")
    assert code == 0
    rows = csv_rows(out)
    assert list(rows[0]) == TS_COLUMNS
    assert len(rows) == 20
    assert [r["stroke"] for r in rows[::5]] == ["1-2", "2-3", "3-4", "4-1"]


def test_feasibility_json(run_cli):
    code, out, _ = run_cli("feasibility", "--platform", "microwave", "--format", "json")
    assert code == 0
    (row,) = json.loads(out)
    assert row["loss_term"] == pytest.approx(0.1)
    assert row["loss_decade"] == -1
    assert row["verdict"] == "loss dominates"


def test_feasibility_text_lists_all_platforms(run_cli):
    code, out, _ = run_cli("feasibility")
    assert code == 0
    assert [line.split()[0] for line in out.splitlines()[2:]] == ["optical", "microwave", "circuit"]


def test_feasibility_unknown_platform(run_cli):
    code, _, err = run_cli("feasibility", "--platform", "trapped-ion")
    assert code == 2
    assert "unknown platform" in err


def test_feasibility_applies_platform_overrides(run_cli):
    code, out, _ = run_cli("feasibility", "--platform", "optical", "--format", "json",
                           "--set", "platforms.optical.q_max=1e12")
    assert code == 0
    (row,) = json.loads(out)
    assert row["q"] == 1e12
    assert row["loss_term"] == pytest.approx(1e-4)
    assert row["verdict"] == "coherence dominates"


@pytest.mark.parametrize("override,path", [
    ("hot.T=500", "hot"),
    ("platforms.optical.q_max=lots", "platforms.optical.q_max"),
    ("platforms.optical.depth=3", "platforms.optical"),
])
def test_feasibility_rejects_bad_overrides(run_cli, override, path):
    code, out, err = run_cli("feasibility", "--set", override)
    assert code == 2
    assert out == ""
    assert path in err


@pytest.mark.parametrize("flag", [["--config", CLASSICAL], ["--tol", "1e-6"]])
def test_feasibility_takes_no_engine_config(run_cli, flag):
    assert run_cli("feasibility", *flag)[0] == 2


def test_parse_grid():
    assert parse_grid("1e2, 1e3,inf") == [100.0, 1000.0, "inf"]


@pytest.mark.parametrize("param,grid", [
    ("q_factor", []),
    ("xi", [0.0, math.inf]),
    ("xi", [0.0, 1.0, 0.5]),
    ("lamb", [1.0]),
])
def test_check_grid_rejects(param, grid):
    with pytest.raises(ConfigError):
        check_grid(param, grid)


def test_check_grid_accepts_descending():
    check_grid("q_factor", [math.inf, 1e12, 1e10])


def test_sweep_workers(monkeypatch):
    monkeypatch.setenv("PCE_NUM_THREADS", "4")
    assert sweep_workers() == 4
    monkeypatch.setenv("PCE_NUM_THREADS", "0")
    assert sweep_workers() == 1
    monkeypatch.setenv("PCE_NUM_THREADS", "many")
    with pytest.raises(ConfigError):
        sweep_workers()
