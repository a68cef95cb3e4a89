import json
import math
import subprocess
import sys

import pytest

from drabi import cli
from drabi.spectra import CrossingEvent


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def data_rows(text):
    return [line.split(",") for line in text.splitlines()[2:]]


def test_verify_symbolic(capsys):
    code, out, _ = run(["verify-symbolic"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert sum(line.startswith("PASS") for line in lines) >= 20
    assert not any(line.startswith("FAIL") for line in lines)


def test_verify_symbolic_negative_control(capsys):
    code, out, _ = run(["verify-symbolic", "--corrupt"], capsys)
    assert code == 1
    assert "FAIL  FG coefficient: C s2" in out


def test_rm_spectrum(capsys):
    code, out, _ = run(["spectrum", "--model", "rm", "--gamma", "1", "--delta", "0.5", "--kappa", "0.7", "--count", "20"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# drabi spectrum")
    assert lines[1] == "index,parity,index_within_parity,energy,converged,n_max_used"
    rows = data_rows(out)
    assert len(rows) == 20
    assert all(r[4] == "1" for r in rows)
    energies = [float(r[3]) for r in rows]
    assert energies == sorted(energies)


def test_floats_round_trip(capsys):
    _, out, _ = run(["spectrum", "--model", "rm", "--delta", "0.5", "--kappa", "0.7", "--count", "5", "--format", "json"], capsys)
    doc = json.loads(out)
    _, csv_out, _ = run(["spectrum", "--model", "rm", "--delta", "0.5", "--kappa", "0.7", "--count", "5"], capsys)
    for row, csv_row in zip(doc["rows"], data_rows(csv_out)):
        assert float(csv_row[3]) == row[3]


def test_two_photon_collapse_exit_code(capsys):
    code, out, err = run(
        ["spectrum", "--model", "two_photon", "--gamma", "1.5", "--delta", "0.4", "--q", "1/4", "--count", "3", "--nmax-cap", "1024"],
        capsys,
    )
    assert code == 2
    assert "spectral collapse" in err
    rows = data_rows(out)
    assert rows and all(r[4] == "0" for r in rows)


def test_jcm_routing(capsys):
    code, out, _ = run(["spectrum", "--model", "grm", "--gamma", "1", "--mu", "0.5", "--k1", "0.1", "--k2", "0", "--count", "3"], capsys)
    assert code == 0
    assert "full-model" in out.splitlines()[0]
    assert [float(r[3]) for r in data_rows(out)] == pytest.approx([-0.5, 0.4, 0.6], abs=1e-10)


def test_grm_units_of_gamma(capsys):
    base = ["spectrum", "--model", "grm", "--mu", "0.7", "--k1", "0.8", "--k2", "0.3", "--count", "4"]
    _, a, _ = run(base + ["--gamma", "1"], capsys)
    _, b, _ = run(["spectrum", "--model", "grm", "--gamma", "2", "--mu", "1.4", "--k1", "1.6", "--k2", "0.6", "--count", "4"], capsys)
    assert [float(r[3]) for r in data_rows(a)] == pytest.approx([float(r[3]) for r in data_rows(b)], abs=1e-10)


def test_parity_filter(capsys):
    _, out, _ = run(["spectrum", "--model", "rm", "--delta", "0.5", "--kappa", "0.7", "--count", "6", "--parity", "-1"], capsys)
    assert {r[1] for r in data_rows(out)} == {"-1"}


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"model": "rm", "delta": 0.5, "kappa": 0.7, "count": 4}))
    _, out, _ = run(["spectrum", "--config", str(cfg), "--count", "6"], capsys)
    assert len(data_rows(out)) == 6


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum", "--model", "rm", "--delta", "0.5"],
        ["spectrum", "--model", "nope"],
        ["spectrum", "--model", "two_photon", "--gamma", "3", "--delta", "0.1", "--q", "1/2"],
        ["crossings", "--model", "rm", "--delta", "0.5", "--kappa", "0.1"],
        ["invariants", "--gamma", "1", "--mu", "0.5"],
        ["bogus"],
    ],
)
def test_usage_errors(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 64
    assert "usage error" in err


def test_malformed_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"model": "rm", "kapa": 0.7}')
    code, _, err = run(["spectrum", "--config", str(bad)], capsys)
    assert code == 64 and "kapa" in err
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert run(["spectrum", "--config", str(broken)], capsys)[0] == 64


def test_rm_crossings(tmp_path, capsys):
    out = tmp_path / "ev.csv"
    code, _, _ = run(
        ["crossings", "--model", "rm", "--delta", "0.5", "--sweep", "kappa:0:1.5:31", "--count", "3", "--out", str(out)],
        capsys,
    )
    assert code == 0
    text = out.read_text()
    assert text.splitlines()[1] == "parameter_value,parityA,indexA,parityB,indexB,min_gap,kind"
    rows = data_rows(text)
    assert any(r[6] == "true_crossing" and r[1] != r[3] for r in rows)
    assert not any(r[6] == "true_crossing" and r[1] == r[3] for r in rows)


def test_empty_sweep(capsys):
    code, out, _ = run(["crossings", "--model", "rm", "--delta", "0.5", "--sweep", "kappa:0:1:0"], capsys)
    assert code == 0
    assert data_rows(out) == []


def test_equal_parity_crossing_exits_one(monkeypatch, capsys):
    fake = [CrossingEvent(0.4, (1, 0), (1, 1), 0.0, "true_crossing")]
    monkeypatch.setattr(cli, "crossing_scan", lambda *a, **k: fake)
    code, out, err = run(["crossings", "--model", "rm", "--delta", "0.5", "--sweep", "kappa:0:1:3"], capsys)
    assert code == 1
    assert "invariant breach" in err
    assert data_rows(out) == [["0.40000000000000002", "1", "0", "1", "1", "0", "true_crossing"]]


def test_invariants_single_point(capsys):
    code, out, _ = run(["invariants", "--gamma", "1", "--mu", "0.5", "--Lambda", "0.6", "--alpha", "0", "--count", "8"], capsys)
    assert code == 0
    assert out.splitlines()[1] == "Lambda,alpha,n,parity,energy,t1,t2,imag_residual"
    assert len(data_rows(out)) == 8


def test_invariants_zero_coupling(capsys):
    _, out, _ = run(["invariants", "--gamma", "1", "--mu", "0.5", "--Lambda", "0", "--alpha", "0.3", "--count", "6"], capsys)
    assert all(float(r[5]) == 0 and float(r[6]) == 0 for r in data_rows(out))


def test_invariants_from_couplings(capsys):
    _, out, _ = run(["invariants", "--gamma", "1", "--mu", "0.5", "--k1", "0.3", "--k2", "0.4", "--count", "2"], capsys)
    row = data_rows(out)[0]
    assert float(row[0]) == pytest.approx(0.5)
    assert float(row[1]) == pytest.approx(math.atan2(0.4, 0.3))


def test_scan(capsys):
    code, out, _ = run(
        ["scan", "--model", "grm", "--gamma", "1", "--mu", "0.7", "--k1", "0.5", "--k2", "0.3", "--sweep", "k1:0.2:0.6:3", "--count", "4"],
        capsys,
    )
    assert code == 0
    rows = data_rows(out)
    assert len(rows) == 12
    assert sorted({float(r[0]) for r in rows}) == pytest.approx([0.2, 0.4, 0.6])


def test_console_entry_point_is_deterministic(tmp_path):
    args = [sys.executable, "-m", "drabi.cli", "invariants", "--gamma", "1", "--mu", "0.4",
            "--sweep", "Lambda:0.2:0.8:2", "--sweep", "alpha:0:0.7853981633974483:2", "--count", "5"]
    outs = []
    for i in range(2):
        path = tmp_path / f"p{i}.csv"
        subprocess.run(args + ["--out", str(path)], check=True, env={"DRABI_THREADS": str(i + 1), "PATH": ""})
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0].count(b"\n") == 2 + 4 * 5


def test_anti_jcm_routing(capsys):
    code, out, _ = run(["spectrum", "--model", "grm", "--gamma", "1", "--mu", "0.3", "--k1", "0", "--k2", "0.4", "--count", "6"], capsys)
    assert code == 0
    header = out.splitlines()[0]
    dev = float(header.split("jcm_analytic max deviation=")[1])
    assert dev < 1e-10
