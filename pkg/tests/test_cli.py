import json

import pytest

from nrmobility.cli import main

SMALL = {"num_ues": 3, "sim_duration": 2.0, "element_sweep": [16, 32], "antenna_elements": 16}


@pytest.fixture
def scenario(tmp_path):
    p = tmp_path / "scenario.json"
    p.write_text(json.dumps(SMALL))
    return p


def test_validate_prints_effective_config(scenario, capsys):
    assert main(["validate", "--config", str(scenario), "--seed", "5"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["rng_seed"] == 5 and out["num_ues"] == 3


def test_run_writes_expected_files(scenario, tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", str(scenario), "--seed", "7", "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == sorted(f"run_{e}elem_seed7{s}" for e in (16, 32)
                           for s in (".csv", "_events.csv", "_reports.csv", ".meta.json"))
    meta = json.loads((out / "run_32elem_seed7.meta.json").read_text())
    assert meta["seed"] == 7 and meta["antenna_elements"] == 32


def test_run_twice_is_byte_identical(scenario, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", str(scenario), "--seed", "7", "--out", str(a)]) == 0
    assert main(["run", "--config", str(scenario), "--seed", "7", "--out", str(b), "--jobs", "2"]) == 0
    for p in a.iterdir():
        assert p.read_bytes() == (b / p.name).read_bytes()


def test_coverage_map_columns(scenario, tmp_path):
    out = tmp_path / "cov"
    assert main(["coverage-map", "--config", str(scenario), "--positions", "20", "--out", str(out),
                 "--elements", "16,128"]) == 0
    csv = out / "coverage-map_16-128elem_seed0.csv"
    lines = csv.read_text().splitlines()
    assert lines[0] == "x_m,y_m,rsrp_e16_dbm,rsrp_e128_dbm,rsrp_nbf_dbm"
    assert len(lines) == 21


def test_invalid_scenario_exits_1(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"time_step": 0}))
    out = tmp_path / "out"
    assert main(["run", "--config", str(p), "--out", str(out)]) == 1
    assert "time_step > 0" in capsys.readouterr().err
    assert not out.exists()


def test_syntax_error_exits_1(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "num_ues": 3,\n  oops\n}')
    assert main(["validate", "--config", str(p)]) == 1
    assert "line 3" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    [],
    ["run"],
    ["fly", "--config", "x.json"],
    ["run", "--config", "{cfg}", "--elements", "sixteen"],
    ["run", "--config", "{cfg}", "--jobs", "0"],
    ["coverage-map", "--config", "{cfg}", "--positions", "0"],
    ["run", "--config", "{missing}"],
])
def test_usage_errors_exit_2_without_output(argv, scenario, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    argv = [a.format(cfg=scenario, missing=tmp_path / "nope.json") for a in argv]
    before = set(tmp_path.iterdir())
    assert main(argv) == 2
    assert set(tmp_path.iterdir()) == before


def test_writes_only_inside_out_dir(scenario, tmp_path, monkeypatch):
    work = tmp_path / "work"
    work.mkdir()
    monkeypatch.chdir(work)
    assert main(["run", "--config", str(scenario), "--out", "results"]) == 0
    assert [p.name for p in work.iterdir()] == ["results"]
