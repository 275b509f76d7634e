from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest

from multilattice.cli import EXIT_CONSTRUCTION, EXIT_INVARIANT, EXIT_OK, main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def built(tmp_path, capsys):
    fs, lat = tmp_path / "A.txt", tmp_path / "lat.json"
    assert run(capsys, "freqset", "--alpha", 2, "--gamma", "1,1", "--N", 4, "--out", fs)[0] == EXIT_OK
    assert run(capsys, "lattice", "build", "--freqset", fs, "--seed", 0, "--out", lat)[0] == EXIT_OK
    return fs, lat


def test_freqset_command(tmp_path, capsys):
    out_path = tmp_path / "A.txt"
    code, out, _ = run(capsys, "freqset", "--alpha", 2, "--gamma", "1,1", "--N", 4, "--out", out_path)
    assert code == EXIT_OK
    assert json.loads(out)["count"] == 21
    assert out_path.read_text().splitlines()[0] == "d=2 count=21"


def test_freqset_gamma_rule_and_n(capsys):
    code, out, _ = run(capsys, "freqset", "--alpha", 2, "--gamma", "power:2", "--d", 3, "--n", 10)
    assert code == EXIT_OK and json.loads(out)["count"] == 9


def test_freqset_requires_one_size(capsys):
    with pytest.raises(SystemExit):
        main(["freqset", "--alpha", "2", "--gamma", "1", "--N", "4", "--n", "4"])


def test_lattice_build_and_verify(built, capsys):
    fs, lat = built
    data = json.loads(lat.read_text())
    assert data["L"] == 9 and {l["M"] for l in data["lattices"]} == {43}
    code, out, _ = run(capsys, "lattice", "verify", "--freqset", fs, "--lattice", lat)
    assert code == EXIT_OK and json.loads(out)["ok"]


def test_verify_fails_on_bad_lattice(built, tmp_path, capsys):
    fs, _ = built
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"d": 2, "L": 1, "lattices": [{"z": [1, 1], "M": 5}]}))
    code, out, _ = run(capsys, "lattice", "verify", "--freqset", fs, "--lattice", bad)
    assert code == EXIT_INVARIANT and not json.loads(out)["ok"]
    code, _, err = run(capsys, "approx", "run", "--freqset", fs, "--lattice", bad, "--function", "exp",
                       "--alpha", 2, "--gamma", "1,1", "--out", tmp_path / "o.json")
    assert code == EXIT_INVARIANT and "uncovered" in err


def test_build_failure_exit_code(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr("multilattice.lattice.lattice_count", lambda n, dmax=0.99: (1, 0.5))
    fs = tmp_path / "A.txt"
    run(capsys, "freqset", "--alpha", 2, "--gamma", "1", "1", "1", "1", "--N", 16, "--out", fs)
    code, _, err = run(capsys, "lattice", "build", "--freqset", fs, "--max-retries", 0, "--out", tmp_path / "l.json")
    assert code == EXIT_CONSTRUCTION
    assert json.loads(err)["attempts"][0]["attempt"] == 0


def test_approx_from_function_and_samples_agree(built, tmp_path, capsys):
    fs, lat = built
    a, b, s = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "s.json"
    code, _, _ = run(capsys, "approx", "run", "--freqset", fs, "--lattice", lat, "--function", "exp",
                     "--h0", 1, -1, "--alpha", 2, "--gamma", "1,1", "--samples-out", s, "--out", a)
    assert code == EXIT_OK
    code, _, _ = run(capsys, "approx", "run", "--freqset", fs, "--lattice", lat, "--samples", s, "--out", b)
    assert code == EXIT_OK
    da, db = json.loads(a.read_text()), json.loads(b.read_text())
    assert da == db
    coeffs = {tuple(c["h"]): complex(c["re"], c["im"]) for c in da["coeffs"]}
    assert abs(coeffs[(1, -1)] - 1) < 1e-12
    assert max(abs(v) for h, v in coeffs.items() if h != (1, -1)) < 1e-12


def test_approx_from_coefficient_file(built, tmp_path, capsys):
    fs, lat = built
    poly = tmp_path / "p.json"
    poly.write_text(json.dumps({"d": 2, "coeffs": [{"h": [2, 1], "re": 0.5, "im": -1.0}]}))
    out = tmp_path / "o.json"
    assert run(capsys, "approx", "run", "--freqset", fs, "--lattice", lat, "--function", poly, "--out", out)[0] == 0
    coeffs = {tuple(c["h"]): complex(c["re"], c["im"]) for c in json.loads(out.read_text())["coeffs"]}
    assert abs(coeffs[(2, 1)] - (0.5 - 1j)) < 1e-12


def test_approx_rejects_tampered_samples(built, tmp_path, capsys):
    fs, lat = built
    s = tmp_path / "s.json"
    run(capsys, "approx", "run", "--freqset", fs, "--lattice", lat, "--function", "kernel-slice", "--N2", 16,
        "--alpha", 2, "--gamma", "1,1", "--samples-out", s, "--out", tmp_path / "a.json")
    data = json.loads(s.read_text())
    data["samples"][2][0][0] += 1.0
    s.write_text(json.dumps(data))
    code, _, err = run(capsys, "approx", "run", "--freqset", fs, "--lattice", lat, "--samples", s,
                       "--out", tmp_path / "b.json")
    assert code == EXIT_INVARIANT and "origin" in err


def test_rates_command(capsys):
    code, out, _ = run(capsys, "rates", "--alpha", 2, "--alpha-tilde", 2, "--t", 0.25)
    data = json.loads(out)
    assert code == EXIT_OK
    assert data["delta"] == pytest.approx(2 - np.sqrt(3.5))
    assert data["rate_exponent"] == pytest.approx(-0.25, abs=1e-12)
    with pytest.raises(SystemExit):
        main(["rates", "--alpha", "2", "--alpha-tilde", "2", "--t", "0.6"])


def test_bounds_command(built, capsys):
    fs, lat = built
    code, out, _ = run(capsys, "bounds", "--freqset", fs, "--lattice", lat, "--alpha", 2, "--gamma", "1,1")
    data = json.loads(out)
    assert code == EXIT_OK and data["L"] == 9
    assert data["bound"] == pytest.approx(10 * np.sqrt(data["wc_truncation"]))


def test_convergence_command(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"N_schedule": [4, 16], "grid": 16, "n_random": 100, "count": 2}))
    csv_path, json_path = tmp_path / "r.csv", tmp_path / "r.json"
    code, out, _ = run(capsys, "convergence", "--config", cfg, "--csv", csv_path, "--json", json_path)
    assert code == EXIT_OK
    assert out == csv_path.read_text()
    assert len(json.loads(json_path.read_text())["rows"]) == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "multilattice.cli", "rates", "--alpha", "3",
                           "--alpha-tilde", "3", "--t", "0.5"], capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["t"] == 0.5
