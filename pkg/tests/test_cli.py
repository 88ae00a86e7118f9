import json
import math
import subprocess
import sys

import jsonschema
import pytest

from lklab.cli import MANIFEST_SCHEMA, main, resolve_config, ConfigError
from lklab.measures import load_measure


def run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--out", str(out), "--quiet"])
    return code, out


def test_hl0_outputs_and_manifest(tmp_path):
    code, out = run(tmp_path, "hl0", "--eps", "0.1", "--n", "50", "--seed", "7", "--n-points", "64")
    assert code == 0
    for f in ("measure.json", "hull.csv", "hull.svg", "run.json", "manifest.json"):
        assert (out / f).is_file()
    man = json.loads((out / "manifest.json").read_text())
    jsonschema.validate(man, MANIFEST_SCHEMA)
    assert man["seed"] == 7 and man["config"]["n"] == 50
    runj = json.loads((out / "run.json").read_text())
    assert runj["measured_log_capacity"] == pytest.approx(runj["capacity"], rel=1e-8)
    assert (out / "hull.csv").read_text().splitlines()[0] == "t,theta,re,im"
    assert len(load_measure(out / "measure.json").slices) == 50


def test_hl0_is_deterministic_and_replayable(tmp_path):
    args = ("hl0", "--eps", "0.2", "--n", "20", "--seed", "3", "--n-points", "32")
    _, a = run(tmp_path, *args, name="a")
    _, b = run(tmp_path, *args, name="b")
    code, c = run(tmp_path, "hl0", "--config", str(a / "manifest.json"), name="c")
    assert code == 0
    for f in ("measure.json", "hull.csv", "hull.svg", "run.json"):
        assert (a / f).read_bytes() == (b / f).read_bytes() == (c / f).read_bytes()


def test_hl0_poisson_mode(tmp_path):
    code, out = run(tmp_path, "hl0", "--eps", "0.3", "--mode", "poisson", "--T", "0.5", "--seed", "2",
                    "--n-points", "32")
    assert code == 0
    assert json.loads((out / "run.json").read_text())["mode"] == "poisson"
    assert run(tmp_path, "hl0", "--eps", "0.3", "--mode", "poisson", name="x")[0] == 2


def test_config_errors(tmp_path):
    assert run(tmp_path, "hl0")[0] == 2
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"eps": 0.1, "bogus": 1}))
    assert run(tmp_path, "hl0", "--config", str(cfg))[0] == 2
    cfg.write_text("{not json")
    assert run(tmp_path, "hl0", "--config", str(cfg))[0] == 2
    assert run(tmp_path, "hl0", "--eps", "-1")[0] == 2
    assert run(tmp_path, "entropy", str(tmp_path / "missing.json"))[0] == 2
    assert run(tmp_path, "example", "--name", "poisson-const", "--R", "0.5")[0] == 2


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"eps": 0.1, "seed": 4}))
    merged = resolve_config("hl0", {"seed": 9}, str(cfg))
    assert merged["eps"] == 0.1 and merged["seed"] == 9 and merged["n_points"] == 512
    with pytest.raises(ConfigError):
        resolve_config("entropy", {}, str(tmp_path / "nope.json"))


def test_replay_rejects_other_command(tmp_path):
    _, a = run(tmp_path, "ldp", "sanov", name="a")
    assert run(tmp_path, "hl0", "--config", str(a / "manifest.json"))[0] == 2


def test_example_and_entropy_commands(tmp_path):
    code, out = run(tmp_path, "example", "--name", "poisson-const", "--R", "2", "--n-points", "64",
                    "--times", "0.5,1")
    assert code == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["summary"]["total_entropy"] == pytest.approx(math.log(4 / 3), abs=1e-9)
    assert man["summary"]["winding_ok"] and man["summary"]["nested_ok"]
    code, rep = run(tmp_path, "entropy", str(out / "measure.json"), name="rep")
    assert code == 0
    ent = json.loads((rep / "entropy.json").read_text())
    # The exported measure holds cell averages, which shift the entropy slightly.
    assert ent["total_entropy"] == pytest.approx(math.log(4 / 3), abs=1e-5)
    assert ent["becker_kappa"] == pytest.approx(0.5, abs=1e-6)


def test_entropy_of_atomic_measure(tmp_path):
    _, h = run(tmp_path, "hl0", "--eps", "0.2", "--n", "5", "--n-points", "16", name="h")
    code, rep = run(tmp_path, "entropy", str(h / "measure.json"), "--no-becker", name="rep")
    assert code == 0
    ent = json.loads((rep / "entropy.json").read_text())
    assert ent["total_entropy"] == "inf"


def test_solve_command(tmp_path):
    _, ex = run(tmp_path, "example", "--name", "poisson-const", "--R", "2", "--n-points", "16",
                "--times", "1", name="ex")
    code, out = run(tmp_path, "solve", str(ex / "measure.json"), "--times", "0.5,1", "--n-points", "32")
    assert code == 0
    rows = (out / "hull.csv").read_text().splitlines()
    assert len(rows) == 1 + 2 * 32


def test_example_exp_family_flags_divergence(tmp_path):
    code, out = run(tmp_path, "example", "--name", "poisson-var", "--family", "exp", "--n-points", "16")
    assert code == 0
    s = json.loads((out / "manifest.json").read_text())["summary"]
    assert s["entropy_diverging"] is True
    assert s["total_entropy"] == "inf"


def test_transport_command(tmp_path):
    code, out = run(tmp_path, "transport", "--n", "257", "--trials", "5", "--compare", "2")
    assert code == 0
    tr = json.loads((out / "transport.json").read_text())
    assert tr["H_star"] == pytest.approx(-0.5 * math.log(2 * math.pi * math.e), abs=1e-4)
    assert (out / "interface.csv").is_file()
    code, out = run(tmp_path, "transport", "--gamma", "uniform", "--a", "0", "--b", "2", "--n", "257",
                    "--trials", "5", name="u")
    assert code == 0
    assert json.loads((out / "transport.json").read_text())["H_star"] == pytest.approx(-math.log(2), abs=1e-12)


def test_ldp_commands(tmp_path):
    code, out = run(tmp_path, "ldp", "sanov", "--ns", "100,2000")
    assert code == 0
    exp = json.loads((out / "experiment.json").read_text())
    assert exp["passed"] and exp["n_values"] == [100, 2000]
    assert (out / "experiment.csv").read_text().startswith("n,observed,predicted")
    code, out = run(tmp_path, "ldp", "coarse", "--dyadic-max", "3", "--n-slices", "64", name="c")
    assert code == 0
    code, out = run(tmp_path, "ldp", "concentration", "--eps", "0.4,0.2", "--seeds", "3", name="k")
    assert code == 0
    assert (out / "trend.svg").is_file()


def test_module_entry_point_exit_code(tmp_path):
    res = subprocess.run([sys.executable, "-m", "lklab", "hl0", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 2
    assert "eps" in res.stderr


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("LKLAB_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["ldp", "sanov", "--quiet"]) == 0
    assert (tmp_path / "env" / "experiment.json").is_file()


def test_json_summary_on_stdout(tmp_path, capsys):
    assert main(["ldp", "sanov", "--out", str(tmp_path), "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["passed"] is True
