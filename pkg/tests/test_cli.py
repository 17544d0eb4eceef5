import json
import subprocess
import sys
from fractions import Fraction as F

import pytest

from negdep.cli import EXIT_BUDGET, EXIT_INPUT, EXIT_MISMATCH, EXIT_OK, main, resolve_property
from negdep.errors import ParseError
from negdep.families import nu_family
from negdep.measure import load_measure, measure_from_json


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_family_product(capsys):
    code, out, _ = run(capsys, "family", "product:p=1/2,1/2")
    assert code == EXIT_OK
    assert len([l for l in out.splitlines() if '"set"' in l]) == 4


def test_family_nu_roundtrip(capsys, tmp_path):
    code, out, _ = run(capsys, "family", "nu:k=2,beta=1/2")
    assert len([l for l in out.splitlines() if '"set"' in l]) == 16
    mu = measure_from_json(out)
    assert mu.weights == nu_family(2, F(1, 2)).weights


def test_family_urn(capsys):
    code, out, _ = run(capsys, "family", "urn:n=2,m=2,p=1/2,1/2")
    doc = json.loads(out)
    assert {d["set"]: d["w"] for d in doc["weights"]}["11"] == "1/2"


def test_check_measure_file(capsys, tmp_path):
    f = tmp_path / "m.json"
    f.write_text('{"n": 2, "weights": [{"set": "00", "w": "1/2"}, {"set": "11", "w": "1/2"}]}')
    code, out, _ = run(capsys, "check", "--measure", str(f), "--props", "nc", "--no-timing")
    rep = json.loads(out)
    assert code == EXIT_OK
    assert rep["properties"]["NC"]["status"] == "Fails"
    assert "timing" not in rep


def test_bad_rational(capsys, tmp_path):
    f = tmp_path / "m.json"
    f.write_text('{"n": 1, "weights": [{"set": "1", "w": "1/0"}]}')
    code, _, err = run(capsys, "check", "--measure", str(f), "--props", "nc")
    assert code == EXIT_INPUT and "ParseError" in err


def test_bad_inputs(capsys):
    assert run(capsys, "check", "--family", "nu:k=2,beta=2", "--props", "nc")[0] == EXIT_INPUT
    assert run(capsys, "check", "--family", "nu:k=2,beta=1/2", "--props", "bogus")[0] == EXIT_INPUT
    assert run(capsys, "reproduce", "nothing")[0] == EXIT_INPUT
    assert run(capsys, "search", "nothing")[0] == EXIT_INPUT
    assert run(capsys, "check", "--props", "nc")[0] == EXIT_INPUT


def test_property_names():
    assert resolve_property("lc[3]") == "LCm(3)"
    assert resolve_property("na+") == "NAplus"
    assert resolve_property("ULC") == "ULC"
    with pytest.raises(ParseError):
        resolve_property("lc[9]")


def test_check_nu6(capsys):
    code, out, _ = run(capsys, "check", "--family", "nu:k=6,beta=71/100", "--props", "ulc,naplus",
                       "--budget-samples", "200", "--no-timing")
    rep = json.loads(out)
    assert code == EXIT_OK
    assert rep["properties"]["ULC"]["status"] == "Fails"
    na = rep["properties"]["NAplus"]
    assert na["status"] in ("Holds", "Unknown")
    if na["status"] == "Holds":
        assert na["provenance"]["source"] == "rule R5"


def test_require_definite(capsys):
    code, out, _ = run(capsys, "check", "--family", "gadget:k=3", "--props", "fmplus", "--budget-samples", "5",
                       "--require-definite", "--no-timing")
    status = json.loads(out)["properties"]["FMplus"]["status"]
    assert code == (EXIT_BUDGET if status == "Unknown" else EXIT_OK)


def test_reproduce_codes(capsys):
    code, out, _ = run(capsys, "reproduce", "urn-lc")
    rep = json.loads(out)
    assert code == EXIT_OK and rep["match"] is True
    assert run(capsys, "reproduce", "gadget-nmp", "--k", "5")[0] == EXIT_OK


def test_reproduce_detects_mismatch(capsys, monkeypatch):
    import negdep.cli as cli

    real = cli.golden()
    fake = json.loads(json.dumps(real))
    fake["urn-lc"]["lc_fails"] = False
    monkeypatch.setattr(cli, "golden", lambda: fake)
    assert run(capsys, "reproduce", "urn-lc")[0] == EXIT_MISMATCH


def test_deterministic_modulo_timing(capsys):
    a = run(capsys, "search", "cnc-vs-cna", "--count", "30", "--seed", "11", "--no-timing")[1]
    b = run(capsys, "search", "cnc-vs-cna", "--count", "30", "--seed", "11", "--no-timing")[1]
    assert a == b


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("NEGDEP_SEED", "11")
    a = run(capsys, "search", "cnc-vs-cna", "--count", "30", "--no-timing")[1]
    monkeypatch.delenv("NEGDEP_SEED")
    b = run(capsys, "search", "cnc-vs-cna", "--count", "30", "--seed", "11", "--no-timing")[1]
    assert a == b and json.loads(a)["seed"] == 11


def test_entry_point(tmp_path):
    out = tmp_path / "f.json"
    r = subprocess.run([sys.executable, "-m", "negdep.cli", "family", "product:p=1/3", "--out", str(out)],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert load_measure(out).weights == (F(2, 3), F(1, 3))
