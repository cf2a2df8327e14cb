import copy
import csv
import json
import subprocess
import sys

import pytest

from tban.cli import run, to_json
from tban.montecarlo import CSV_HEADER

BASE = {
    "lattice": {"width": 3, "height": 3},
    "potentials": {"T": 1.0, "k": 5, "w0": -3.0, "w1": 1.0, "w2": 1.0, "w3": -1.0, "w4": 0.0},
    "boundary": {"value": 1},
    "dynamics": {"mode": "synchronous", "burn_in": 200, "samples": 4000, "thinning": 1, "seed": 7},
    "sweep": {"param": "T", "from": 0.5, "to": 2.0, "steps": 3},
}


@pytest.fixture
def write_config(tmp_path):
    def write(cfg=None, **sections):
        cfg = copy.deepcopy(cfg or BASE)
        for key, patch in sections.items():
            if patch is None:
                cfg.pop(key, None)
            else:
                cfg[key] = {**cfg.get(key, {}), **patch}
        path = tmp_path / f"cfg{len(list(tmp_path.iterdir()))}.json"
        path.write_text(json.dumps(cfg))
        return str(path)
    return write


def invoke(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_symmetric(capsys, write_config):
    code, out, _ = invoke(capsys, "analyze", "--config", write_config())
    assert code == 0
    doc = json.loads(out)
    assert doc["necessary_condition_met"] is True
    assert doc["sufficient_symmetry_met"] is True
    assert doc["config"]["potentials"]["T"] == 1.0


def test_analyze_generic(capsys, write_config):
    code, out, _ = invoke(capsys, "analyze", "--config", write_config(potentials={"w0": -1.0, "k": 2}))
    doc = json.loads(out)
    assert code == 0 and doc["necessary_condition_met"] is False
    assert doc["alt_sum"] == pytest.approx(0.08467870806092892, abs=1e-15)


def test_config_echo_includes_defaults(capsys, write_config):
    cfg = copy.deepcopy(BASE)
    del cfg["dynamics"]["thinning"], cfg["potentials"]["w4"], cfg["sweep"]
    _, out, _ = invoke(capsys, "analyze", "--config", write_config(cfg))
    echo = json.loads(out)["config"]
    assert echo["dynamics"]["thinning"] == 1
    assert echo["dynamics"]["batches"] == 20
    assert echo["potentials"]["w4"] == 0.0


def test_exact_result(capsys, write_config):
    code, out, _ = invoke(capsys, "exact", "--config", write_config(lattice={"width": 1, "height": 1}))
    assert code == 0
    res = json.loads(out)
    assert res["delta"] == pytest.approx(0.9051482536448667, abs=1e-15)
    assert res["p0"] + res["p1"] == 1.0


def test_exact_size_cap(capsys, write_config):
    code, out, err = invoke(capsys, "exact", "--config", write_config(lattice={"width": 13, "height": 1}))
    assert code == 3 and out == ""
    assert "12" in err


def test_missing_temperature(capsys, write_config):
    cfg = copy.deepcopy(BASE)
    del cfg["potentials"]["T"]
    code, _, err = invoke(capsys, "analyze", "--config", write_config(cfg))
    assert code == 1 and "potentials.T" in err


@pytest.mark.parametrize("section,patch,path", [
    ("potentials", {"T": -1.0}, "potentials.T"),
    ("potentials", {"k": 7}, "potentials.k"),
    ("lattice", {"width": 0}, "lattice.width"),
    ("boundary", {"value": 2}, "boundary.value"),
    ("dynamics", {"mode": "parallel"}, "dynamics.mode"),
    ("dynamics", {"samples": "many"}, "dynamics.samples"),
    ("sweep", {"param": "k"}, "sweep.param"),
    ("potentials", {"w9": 1.0}, "potentials.w9"),
])
def test_field_path_errors(capsys, write_config, section, patch, path):
    code, _, err = invoke(capsys, "analyze", "--config", write_config(**{section: patch}))
    assert code == 1 and path in err


def test_unreadable_config(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert invoke(capsys, "analyze", "--config", str(bad))[0] == 1
    assert invoke(capsys, "analyze", "--config", str(tmp_path / "absent.json"))[0] == 1


def test_usage_errors(capsys, write_config):
    assert invoke(capsys, "frobnicate", "--config", write_config())[0] == 1
    assert invoke(capsys, "analyze")[0] == 1
    assert invoke(capsys, "sweep", "--config", write_config())[0] == 1  # no --out


def test_non_convergence_exit_code(capsys, write_config):
    cfg = copy.deepcopy(BASE)
    cfg["lattice"] = {"width": 2, "height": 2}
    cfg["exact"] = {"max_iter": 1}
    code, _, err = invoke(capsys, "exact", "--config", write_config(cfg))
    assert code == 2 and "residual" in err


def test_simulate_seed_override(capsys, write_config):
    path = write_config()
    _, a, _ = invoke(capsys, "simulate", "--config", path)
    _, b, _ = invoke(capsys, "simulate", "--config", path, "--seed", "8")
    da, db = json.loads(a), json.loads(b)
    assert da["config"]["dynamics"]["seed"] == 7 and db["config"]["dynamics"]["seed"] == 8
    assert da["seed"] == 7
    assert {"mean", "stderr", "n_samples"} <= da.keys()


def test_sweep_writes_csv(capsys, write_config, tmp_path):
    out_csv = tmp_path / "sweep.csv"
    code, out, _ = invoke(capsys, "sweep", "--config", write_config(), "--out", str(out_csv), "--threads", "2")
    assert code == 0
    assert json.loads(out)["rows"] == 6
    rows = list(csv.reader(out_csv.open()))
    assert tuple(rows[0]) == CSV_HEADER and len(rows) == 7
    assert invoke(capsys, "sweep", "--config", write_config(sweep=None), "--out", str(out_csv))[0] == 1


def test_validate_reports_perturbation(capsys, write_config):
    _, out, _ = invoke(capsys, "validate", "--config", write_config())
    assert json.loads(out)["isotropic"] is True
    cfg = copy.deepcopy(BASE)
    cfg["arc_weights"] = [{"node": [1, 1], "neighbour": [0, 1], "weight": 1.5}]
    code, out, _ = invoke(capsys, "validate", "--config", write_config(cfg))
    res = json.loads(out)
    assert code == 0 and res["isotropic"] is False and res["symmetric"] is False
    cfg["arc_weights"] = [{"node": [1, 1], "neighbour": [2, 2], "weight": 1.5}]
    assert invoke(capsys, "validate", "--config", write_config(cfg))[0] == 1


def test_float_format_round_trips():
    x = 0.1 + 0.2
    assert json.loads(to_json({"x": x}))["x"] == x
    assert json.loads(to_json({"x": float("nan")}))["x"] is None


@pytest.mark.parametrize("command", ["analyze", "exact", "simulate", "sweep", "validate"])
def test_repeated_runs_are_byte_identical(tmp_path, write_config, command):
    argv = [sys.executable, "-m", "tban", command, "--config", write_config()]
    outputs = []
    for n in range(2):
        extra = ["--out", str(tmp_path / f"s{n}.csv")] if command == "sweep" else []
        proc = subprocess.run(argv + extra, capture_output=True, check=True)
        outputs.append(proc.stdout.replace(str(tmp_path / f"s{n}.csv").encode(), b"OUT"))
    assert outputs[0] == outputs[1]
    if command == "sweep":
        assert (tmp_path / "s0.csv").read_bytes() == (tmp_path / "s1.csv").read_bytes()
