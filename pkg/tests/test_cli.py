from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import pytest

from hardy_adams.cli import MOSER_COLUMNS, main
from hardy_adams.textio import load

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _run(tmp_path, sub, *extra):
    out = tmp_path / sub
    code = main([sub, "--out", str(out), *extra])
    return code, out


def _csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_moser_table(tmp_path, capsys):
    code, out = _run(tmp_path, "moser")
    assert code == 0
    assert "wrote" in capsys.readouterr().out
    with open(out / "moser.csv", newline="") as fh:
        header = next(csv.reader(fh))
    assert header == list(MOSER_COLUMNS)
    rows = _csv(out / "moser.csv")
    assert [float(r["k"]) for r in rows] == [5, 10, 20, 40]
    assert all(math.isclose(float(r["hardy"]), 1.0, rel_tol=1e-12) for r in rows)
    orl = [float(r["orlicz"]) for r in rows]
    assert all(b < a for a, b in zip(orl, orl[1:]))
    doc = json.loads((out / "moser.json").read_text())
    assert doc["subcommand"] == "moser" and doc["results"]["orlicz_decreasing_in_k"]
    assert len(doc["config_sha256"]) == 64


@pytest.mark.parametrize("sub", ["norms", "adams", "adachi", "reduce"])
def test_subcommands_exit_zero(tmp_path, sub):
    code, out = _run(tmp_path, sub)
    assert code == 0
    assert (out / f"{sub}.json").exists() and (out / f"{sub}.csv").exists()


def test_bad_config_exits_2_with_pointer(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("N: 2\nquadrature:\n  rel_tol: -1\n")
    code, out = _run(tmp_path, "moser", "--config", str(bad))
    assert code == 2
    assert "/quadrature/rel_tol" in capsys.readouterr().err
    assert not (out / "moser.json").exists()


def test_manifest_dimension_conflict_exits_2(tmp_path, capsys):
    cfg = tmp_path / "n3.yaml"
    cfg.write_text("N: 3\ndecompose:\n  manifest: builtin:two_level\n")
    code, _ = _run(tmp_path, "decompose", "--config", str(cfg))
    assert code == 2 and "/N" in capsys.readouterr().err


def test_decompose_two_levels(tmp_path):
    code, out = _run(tmp_path, "decompose")
    assert code == 0
    rows = _csv(out / "decompose.csv")
    assert len({r["level"] for r in rows}) == 2
    for j in (1, 2):
        psi = load(out / f"decompose_level_{j}_profile.txt")
        assert psi.breakpoints[0] == 0.0
    doc = json.loads((out / "decompose.json").read_text())
    assert len(doc["results"]["levels"]) == 2


def test_reruns_are_bit_identical(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert main(["adachi", "--out", str(a)]) == 0
    assert main(["adachi", "--out", str(b), "--threads", "3"]) == 0
    for name in ("adachi.json", "adachi.csv"):
        ja, jb = (a / name).read_bytes(), (b / name).read_bytes()
        if name.endswith(".json"):
            da, db = json.loads(ja), json.loads(jb)
            da["config"].pop("threads"), db["config"].pop("threads")
            da.pop("config_sha256"), db.pop("config_sha256")
            assert da == db
        else:
            assert ja == jb
    c = tmp_path / "c"
    assert main(["adachi", "--out", str(c)]) == 0
    assert (a / "adachi.json").read_bytes() == (c / "adachi.json").read_bytes()


def test_seed_changes_corpus(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    main(["reduce", "--out", str(a), "--seed", "1"])
    main(["reduce", "--out", str(b), "--seed", "2"])
    assert (a / "reduce.csv").read_bytes() != (b / "reduce.csv").read_bytes()


@pytest.mark.parametrize("name", ["default.yaml", "n3.yaml", "moser_decompose.yaml"])
def test_shipped_configs(tmp_path, name):
    code, _ = _run(tmp_path, "decompose", "--config", str(CONFIGS / name))
    assert code == 0


def test_selftest_exits_zero(tmp_path, capsys):
    code, _ = _run(tmp_path, "selftest")
    printed = capsys.readouterr().out
    assert printed.count("criterion") >= 10
    assert code == 0
