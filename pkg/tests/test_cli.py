import csv
import json
import os
import subprocess
import sys

import pytest

from uemetrics.cli import (EXIT_INCONCLUSIVE, EXIT_INVALID, EXIT_OK, EXIT_REFUTED, InvalidInput,
                           main, merge_params, parse_sphere)
from uemetrics.spheres import Berger3, Pullback, Round, ScaledRound


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_construct_cap(tmp_path):
    assert main(["construct", "--out", str(tmp_path)]) == EXIT_OK
    meta = json.loads((tmp_path / "metric.json").read_text())
    assert meta["kind"] == "conical-cap" and meta["n"] == 8
    assert meta["params"]["R"] == 9.38 and meta["params"]["lambda"] == 9.38
    rows = _rows(tmp_path / "profile.csv")
    assert rows[0] == ["t_lo", "t_hi", "f_lo", "f_hi", "df_lo", "df_hi", "d2f_lo", "d2f_hi"]
    assert len(rows) == 201  # header plus samples - 1 cells


def test_construct_rn(tmp_path):
    assert main(["construct", "--kind", "rn", "--out", str(tmp_path)]) == EXIT_OK
    meta = json.loads((tmp_path / "metric.json").read_text())
    assert meta["params"]["lambda"] == pytest.approx(9.16515139)


def test_infeasible_exit(tmp_path, capsys):
    assert main(["construct", "--R", "2", "--eps", "0.1", "--out", str(tmp_path)]) == EXIT_INVALID
    err = capsys.readouterr().err
    assert "minimal feasible" in err and "7.5" in err
    assert main(["construct", "--lambda", "3", "--out", str(tmp_path)]) == EXIT_INVALID


def test_invalid_inputs(tmp_path):
    out = ["--out", str(tmp_path)]
    assert main(["construct", "--sphere", "round:-1"] + out) == EXIT_INVALID
    assert main(["construct", "--sphere", "berger:1,2", "--n", "5"] + out) == EXIT_INVALID
    assert main(["construct", "--config", str(tmp_path / "missing.toml")] + out) == EXIT_INVALID
    assert main(["blowup", "--sigma", "5"] + out) == EXIT_INVALID
    bad = tmp_path / "bad.toml"
    bad.write_text("n = [")
    assert main(["construct", "--config", str(bad)] + out) == EXIT_INVALID
    with pytest.raises(SystemExit):
        main(["construct", "--kind", "klein"])


def test_certify_scal_and_chain(tmp_path):
    code = main(["certify", "--claim", "scal", "--claim", "chain", "--out", str(tmp_path)])
    assert code == EXIT_OK
    certs = json.loads((tmp_path / "certificates.json").read_text())
    assert [c["status"] for c in certs] == ["CERTIFIED"] * 3
    assert certs[0]["target"] == 21.0 and certs[0]["achieved"]["lo"] >= 21.0
    rows = _rows(tmp_path / "scal.csv")
    assert rows[0] == ["t", "scal_lo", "scal_hi", "half_C"]
    assert min(float(r[1]) for r in rows[1:]) >= 21.0


def test_certify_refuted(tmp_path):
    code = main(["certify", "--kind", "cone", "--n", "4", "--target", "1", "--out", str(tmp_path)])
    assert code == EXIT_REFUTED


def test_certify_inconclusive(tmp_path):
    code = main(["certify", "--kind", "sphere-pullback", "--n", "4", "--target", "11.9",
                 "--out", str(tmp_path)])
    assert code == EXIT_INCONCLUSIVE


def test_certify_bilipschitz(tmp_path):
    for sphere in ("scaled:4", "scaled:0.25"):
        code = main(["certify", "--kind", "cone", "--n", "5", "--sphere", sphere,
                     "--claim", "bilipschitz", "--out", str(tmp_path)])
        assert code == EXIT_OK
        cert = json.loads((tmp_path / "certificates.json").read_text())[0]
        assert cert["params"]["Lambda"] == pytest.approx(4.0)


def test_certify_sobolev(tmp_path):
    code = main(["certify", "--kind", "cone", "--n", "5", "--sphere", "scaled:2", "--claim",
                 "sobolev", "--p", "4,6", "--out", str(tmp_path)])
    assert code == EXIT_OK
    certs = json.loads((tmp_path / "certificates.json").read_text())
    assert [c["params"]["expected"] for c in certs] == ["finite", "divergent"]


def test_blowup_rn(tmp_path):
    assert main(["blowup", "--points", "200", "--out", str(tmp_path)]) == EXIT_OK
    bound = json.loads((tmp_path / "green_bound.json").read_text())
    assert bound["p_fit"] == pytest.approx(-6.0, abs=0.05)
    comp = json.loads((tmp_path / "completeness.json").read_text())
    assert all(comp["checks"].values())
    assert all(s["completeness"]["verdict"] == "PASS" for s in comp["sweep"])
    ident = _rows(tmp_path / "identity.csv")
    assert max(float(r[4]) for r in ident[1:]) <= 1e-5
    assert _rows(tmp_path / "green.csv")[0] == ["r", "G", "dG", "d2G", "r^(n-2)G"]


def test_blowup_flat_cone(tmp_path):
    assert main(["blowup", "--model", "cone", "--n", "4", "--sigma", "0", "--points", "100",
                 "--out", str(tmp_path)]) == EXIT_OK
    bound = json.loads((tmp_path / "green_bound.json").read_text())
    assert bound["flat_max_rel_error"] <= 1e-8


def test_oracle_check(tmp_path):
    assert main(["oracle-check", "--points", "5", "--out", str(tmp_path)]) == EXIT_OK
    rows = _rows(tmp_path / "oracle_report.csv")
    assert rows[0] == ["case", "points", "max_rel", "max_abs", "tol", "verdict"]
    assert len(rows) == 11 and all(r[5] == "PASS" for r in rows[1:])
    assert main(["oracle-check", "--case", "sine", "--points", "5", "--tol", "1e-30",
                 "--out", str(tmp_path)]) == EXIT_REFUTED


def test_config_precedence(tmp_path):
    cfg = {"n": 5, "certify": {"n": 6, "target": "3"}}
    p = merge_params("certify", cfg, {"n": None, "target": "4"})
    assert p["n"] == 6 and p["target"] == "4"
    p = merge_params("certify", cfg, {"n": 7})
    assert p["n"] == 7 and p["target"] == "3"
    assert merge_params("certify", {"n": 5}, {})["n"] == 5
    toml = tmp_path / "c.toml"
    toml.write_text('kind = "rn"\n[construct]\nsamples = 11\n')
    assert main(["construct", "--config", str(toml), "--out", str(tmp_path)]) == EXIT_OK
    assert len(_rows(tmp_path / "profile.csv")) == 11
    assert json.loads((tmp_path / "metric.json").read_text())["kind"] == "rn"


def test_parse_sphere():
    assert parse_sphere("round", 3) == Round(3)
    assert parse_sphere("round:2", 3) == Round(3, 2.0)
    assert parse_sphere("scaled:2.5", 4) == ScaledRound(4, 2.5)
    assert parse_sphere("round-scaled", 7) == ScaledRound(7, 42.0)
    assert parse_sphere("berger:1,2", 3) == Berger3(1.0, 2.0)
    assert isinstance(parse_sphere("round@twist:1", 3), Pullback)
    assert isinstance(parse_sphere("berger:1,2@rotate:0,1,0.3", 3), Pullback)
    for bad in ("cube", "scaled", "berger:1", "round@spin:1"):
        with pytest.raises(InvalidInput):
            parse_sphere(bad, 3)


def test_deterministic_output(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["certify", "--claim", "scal", "--claim", "chain", "--claim", "bilipschitz"]
    assert main(args + ["--out", str(a)]) == EXIT_OK
    assert main(args + ["--out", str(b)]) == EXIT_OK
    assert (a / "certificates.json").read_bytes() == (b / "certificates.json").read_bytes()


def test_threads_env(tmp_path):
    env = dict(os.environ, UEMETRICS_THREADS="1")
    args = [sys.executable, "-m", "uemetrics.cli", "certify", "--claim", "scal",
            "--claim", "chain", "--out"]
    one = subprocess.run(args + [str(tmp_path / "one")], env=env, capture_output=True)
    assert one.returncode == EXIT_OK
    env["UEMETRICS_THREADS"] = "4"
    four = subprocess.run(args + [str(tmp_path / "four")], env=env, capture_output=True)
    assert four.returncode == EXIT_OK
    assert (tmp_path / "one" / "certificates.json").read_bytes() == \
        (tmp_path / "four" / "certificates.json").read_bytes()
    env["UEMETRICS_THREADS"] = "zero"
    bad = subprocess.run(args + [str(tmp_path / "bad")], env=env, capture_output=True)
    assert bad.returncode == EXIT_INVALID
