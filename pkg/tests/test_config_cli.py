import json
import subprocess
import sys

import pytest
import yaml

from unidim import config as cfgmod
from unidim.cli import main
from unidim.config import ConfigError, digest, resolve


def _files(d, suffix):
    return sorted(p for p in d.iterdir() if p.name.endswith(suffix))


def test_schema_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        resolve({"model": {"name": "lattice"}, "bogus": 1}, "cover")
    with pytest.raises(ConfigError):
        resolve({"model": {"name": "lattice", "colour": "red"}}, "cover")
    with pytest.raises(ConfigError):
        resolve({"model": {"name": "lattice", "params": {"colour": 1}}}, "cover")
    with pytest.raises(ConfigError):
        resolve({"model": {"name": "no-such-model"}}, "cover")
    with pytest.raises(ConfigError):
        resolve({"model": {"name": "lattice"}, "scales": [-1]}, "cover")


def test_resolved_config_is_explicit_and_digest_is_stable(monkeypatch):
    monkeypatch.delenv(cfgmod.OUT_ENV, raising=False)
    a = resolve({"model": {"name": "lattice"}}, "cover")
    b = resolve({"model": {"name": "lattice", "params": {"k": 2}}, "seed": 0}, "cover")
    assert a == b and digest(a) == digest(b)
    assert a["rule"]["family"] and a["scales"] and "n" in a and a["model"]["params"]["k"] == 2
    c = dict(a, out="elsewhere")
    assert digest(c) == digest(a)
    assert digest(dict(a, seed=1)) != digest(a)
    assert resolve({"model": {"name": "finite"}}, "mtp-check")["n"] == cfgmod.MTP_N


def test_rule_must_match_model():
    with pytest.raises(ConfigError):
        resolve({"model": {"name": "lattice"}, "rule": {"family": "cantor-block"}}, "cover")


def test_unknown_config_key_exits_with_error(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(yaml.safe_dump({"model": {"name": "finite"}, "typo": 3}))
    assert main(["mtp-check", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert main(["mtp-check", "--model", "finite", "--colour", "red", "--out", str(tmp_path / "o")]) == 1


def test_mtp_exit_codes(tmp_path):
    out = str(tmp_path / "o")
    assert main(["mtp-check", "--model", "finite", "--n", "200", "--out", out]) == 0
    # a pinned root is not unimodular: the check is red
    assert main(["mtp-check", "--model", "finite", "--root", "first", "--n", "200", "--out", out]) == 2


def test_outputs_carry_digest_and_rerun_is_byte_identical(tmp_path):
    args = ["cover", "--model", "lattice", "--n", "2000", "--scales", "2,4,8,16,32"]
    assert main(args + ["--out", str(tmp_path / "a")]) in (0, 2)
    assert main(args + ["--out", str(tmp_path / "b")]) in (0, 2)
    ca, cb = _files(tmp_path / "a", ".csv"), _files(tmp_path / "b", ".csv")
    assert ca and [p.name for p in ca] == [p.name for p in cb]
    for x, y in zip(ca, cb):
        assert x.read_bytes() == y.read_bytes()
    resolved = yaml.safe_load(_files(tmp_path / "a", "config.yaml")[0].read_text())
    d = digest(resolved)
    assert all(d in p.name for p in (tmp_path / "a").iterdir())
    assert resolved["scales"] == [2.0, 4.0, 8.0, 16.0, 32.0]


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(yaml.safe_dump({"model": {"name": "finite", "params": {"sizes": "3", "probs": "1"}}, "n": 50}))
    out = tmp_path / "o"
    assert main(["mtp-check", "--config", str(cfg), "--n", "80", "--out", str(out)]) == 0
    resolved = yaml.safe_load(_files(out, "config.yaml")[0].read_text())
    assert resolved["n"] == 80 and resolved["model"]["params"]["sizes"] == "3"
    report = json.loads(_files(out, "report.json")[0].read_text())
    assert report


def test_out_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cfgmod.OUT_ENV, str(tmp_path / "env"))
    assert main(["gen", "--model", "finite", "--count", "2"]) == 0
    names = [p.name for p in (tmp_path / "env").iterdir()]
    assert any(n.endswith(".csv") for n in names) and sum(n.endswith(".space") for n in names) == 2


def test_measure_and_kappa_commands(tmp_path):
    out = tmp_path / "o"
    assert main(["measure", "--model", "finite", "--sizes", "5", "--probs", "1", "--n", "100",
                 "--out", str(out)]) == 0
    assert main(["gen", "--model", "finite", "--sizes", "6", "--probs", "1", "--count", "2",
                 "--out", str(out)]) == 0
    spaces = _files(out, ".space")
    assert main(["kappa", str(spaces[0]), str(spaces[1]), "--out", str(out)]) == 0
    assert main(["kappa", str(spaces[0]), "--out", str(out)]) == 1


def test_catalog_lists_models_rules_and_g(capsys):
    assert main(["catalog", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data["models"]) >= 12
    assert all("K" in r for r in data["rules"].values())
    assert {"self", "near1", "nearest"} <= set(data["g"])
    assert main(["catalog"]) == 0
    assert "lattice" in capsys.readouterr().out


def test_console_entry_point_runs():
    r = subprocess.run([sys.executable, "-m", "unidim.cli", "catalog"], capture_output=True, text=True)
    assert r.returncode == 0 and "canopy" in r.stdout
