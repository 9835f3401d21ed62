import json
import os
import subprocess
import sys

import pytest

from gausslab.cli import main, resolve


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_measure_unit_interval(capsys):
    code, out, _ = run(["measure", "--dim", "1", "--center", "0", "--side", "2"], capsys)
    assert code == 0
    assert float(out) == pytest.approx(0.8427007929497149, rel=1e-15)


def test_measure_json(capsys):
    code, out, _ = run(["measure", "--center", "0", "--side", "2", "--emit", "json"], capsys)
    assert code == 0
    rec = json.loads(out)["rows"][0]
    assert rec["gamma"] == pytest.approx(0.8427007929497149, rel=1e-15)


def test_prop32_csv(capsys):
    code, out, _ = run(["counterexample", "--kind", "prop32", "--b", "2", "--nmax", "10", "--emit", "csv"],
                       capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n,x_n,b_n,lower_bound"
    assert len(lines) == 10


def test_unknown_subcommand_prints_usage(capsys):
    code, _, err = run(["frobnicate"], capsys)
    assert code == 2 and "usage" in err


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"side": 2, "colour": 1}))
    code, _, err = run(["measure", "--config", str(cfg), "--center", "0"], capsys)
    assert code == 2 and "colour" in err


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"side": 2.0, "dim": 1, "seed": 9}))
    _, opts = resolve(["measure", "--config", str(cfg), "--side", "3"])
    assert opts["side"] == 3.0 and opts["seed"] == 9 and opts["dim"] == 1


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("GAUSSLAB_SEED", "17")
    assert resolve(["measure"])[1]["seed"] == 17


def test_out_file_is_byte_identical(tmp_path, capsys):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["maximal", "--f", "exp(-abs2(x))", "--resolution", "64", "--emit", "csv"]
    assert main(args + ["--out", str(p1)]) == 0
    assert main(args + ["--out", str(p2)]) == 0
    capsys.readouterr()
    assert p1.read_bytes() == p2.read_bytes()
    assert sorted(os.listdir(tmp_path)) == ["a.csv", "b.csv"]


def test_verify_exit_codes(tmp_path, capsys):
    ok = tmp_path / "ok.json"
    ok.write_text(json.dumps({"checks": "measure"}))
    code, out, _ = run(["verify", "--config", str(ok), "--emit", "json"], capsys)
    assert code == 0 and json.loads(out)["checks"][0]["verdict"] == "pass"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"checks": "welland", "tolerances": {"welland": 0.0},
                               "overrides": {"welland": {"functions": 3, "resolution": 128}}}))
    code, _, _ = run(["verify", "--config", str(bad)], capsys)
    assert code == 1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "gausslab", "measure", "--center", "0", "--side", "2"],
                       capture_output=True, text=True, check=True)
    assert float(r.stdout) == pytest.approx(0.8427007929497149, rel=1e-15)
