import json
import math
import subprocess
import sys

import pytest

from bureshall import closed_form as cf
from bureshall.cli import main
from bureshall.records import RunRecord

FAST_SAMPLE = ["--count", "400", "--burn-in", "200", "--chains", "20"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def record(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    return code, RunRecord.from_json(out)


def value(rec, name):
    return next(r for r in rec.results if r.name.startswith(name)).value


# -- exact ----------------------------------------------------------------------

def test_exact_json(capsys):
    code, rec = record(capsys, "exact", "--m", "2", "--n", "3")
    assert code == 0 and rec.command == "exact"
    assert rec.params == {"m": 2, "alpha": 0.5, "n": 3}
    assert value(rec, "S_P mean (m,n form)") == pytest.approx(0.75, rel=1e-15)
    assert value(rec, "S_vN mean (m,n form)") == pytest.approx(2 * math.log(2) - 59 / 60, rel=1e-14)
    assert rec.tool_version


def test_exact_alpha_form(capsys):
    code, rec = record(capsys, "exact", "--m", "3", "--alpha", "0")
    assert code == 0
    assert "n" not in rec.params
    assert value(rec, "S_P mean (alpha form)") == pytest.approx(cf.avg_purity_general(cf.EnsembleParams(3, 0.0)))


def test_json_round_trip(capsys):
    code, out, _ = run(capsys, "exact", "--m", "2", "--n", "2", "--format", "json")
    rec = RunRecord.from_json(out)
    assert rec.to_json() == out
    d = json.loads(out)
    assert set(d) == {"command", "params", "results", "seed", "tool_version", "elapsed_ms"}
    entry = d["results"][1]
    assert entry["reference"] is None and entry["abs_diff"] is None


def test_table_and_csv(capsys):
    code, out, _ = run(capsys, "exact", "--m", "2", "--n", "2")
    assert code == 0 and out.startswith("# exact")
    code, out, _ = run(capsys, "exact", "--m", "2", "--n", "2", "--format", "csv")
    assert out.splitlines()[0].startswith("name,value,std_err,reference,abs_diff")


@pytest.mark.parametrize("argv", [
    ["exact", "--m", "2", "--n", "3", "--alpha", "0.5"],
    ["exact", "--m", "3", "--n", "2"],
    ["exact", "--m", "2"],
    ["exact", "--n", "2"],
    ["exact", "--m", "2", "--alpha", "-1"],
    ["quadrature", "--m", "4", "--n", "4"],
    ["sample", "--m", "2", "--alpha", "0.5", "--method", "matrix-model"],
    ["density", "--m", "2", "--n", "2", "--x-min", "5", "--x-max", "1"],
    ["frobnicate"],
    ["exact", "--m", "two", "--n", "2"],
])
def test_usage_errors_exit_2(capsys, argv):
    assert main(argv) == 2


def test_help_exits_0(capsys):
    assert main(["--help"]) == 0


# -- sample ---------------------------------------------------------------------

def test_sample_deterministic(capsys):
    argv = ["sample", "--m", "2", "--n", "2", "--seed", "5", *FAST_SAMPLE]
    _, a = record(capsys, *argv)
    _, b = record(capsys, *argv)
    assert a.deterministic_json() == b.deterministic_json()
    assert a.seed == 5 and a.params["method"] == "mcmc"


def test_seed_precedence(capsys, monkeypatch, tmp_path):
    argv = ["sample", "--m", "2", "--n", "2", *FAST_SAMPLE]
    monkeypatch.delenv("BURES_SEED", raising=False)
    assert record(capsys, *argv)[1].seed == 0
    monkeypatch.setenv("BURES_SEED", "17")
    assert record(capsys, *argv)[1].seed == 17
    conf = tmp_path / "run.conf"
    conf.write_text("seed = 23\ncount = 300\n")
    rec = record(capsys, *argv, "--config", str(conf))[1]
    assert rec.seed == 23
    assert record(capsys, *argv, "--config", str(conf), "--seed", "31")[1].seed == 31
    monkeypatch.setenv("BURES_SEED", "x")
    assert main(argv) == 2


def test_config_flag_precedence(capsys, tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("--m = 2\nn = 2\ncount = 300\nburn-in = 100\nchains = 10\n")
    rec = record(capsys, "sample", "--config", str(conf))[1]
    assert rec.params["count"] == 300
    rec = record(capsys, "sample", "--config", str(conf), "--count", "200")[1]
    assert rec.params["count"] == 200
    bad = tmp_path / "bad.conf"
    bad.write_text("colour = blue\n")
    assert main(["exact", "--m", "2", "--n", "2", "--config", str(bad)]) == 2
    assert main(["exact", "--m", "2", "--n", "2", "--config", str(tmp_path / "missing.conf")]) == 2


def test_sample_matrix_model_and_out(capsys, tmp_path):
    out = tmp_path / "mm.csv"
    code, rec = record(capsys, "sample", "--m", "2", "--n", "3", "--method", "matrix-model",
                       "--count", "500", "--out", str(out))
    assert code == 0
    assert rec.params["experimental"] is True
    assert len(out.read_text().splitlines()) == 501
    assert (tmp_path / "mm.csv.meta.json").exists()


def test_sample_warning_goes_to_stderr(capsys):
    code, out, err = run(capsys, "sample", "--m", "2", "--n", "2", "--step-scale", "60", *FAST_SAMPLE)
    assert code == 0
    assert "warning:" in err and "acceptance" in err


# -- quadrature and density -------------------------------------------------------

def test_quadrature(capsys):
    code, rec = record(capsys, "quadrature", "--m", "2", "--alpha", "0.5")
    assert code == 0
    assert all(r.passed for r in rec.results)
    assert value(rec, "S_P mean") == pytest.approx(cf.avg_purity_general(cf.EnsembleParams(2, 0.5)), abs=1e-8)


def test_density(capsys, tmp_path):
    out = tmp_path / "h.csv"
    code, rec = record(capsys, "density", "--m", "2", "--n", "2", "--points", "12", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "x,h1" and len(lines) == 13
    assert all(r.passed for r in rec.results)


def test_density_default_name(capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["density", "--m", "1", "--alpha", "0", "--points", "5"]) == 0
    assert (tmp_path / "h1_m1_alpha0.csv").exists()


# -- verify ------------------------------------------------------------------------

def test_verify_fast(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0
    last = out.strip().splitlines()[-1]
    n_ok, n_all = last.split()[0].split("/")
    assert n_ok == n_all


def test_verify_detects_mutation(capsys, monkeypatch):
    real = cf.H_q_closed
    monkeypatch.setattr(cf, "H_q_closed", lambda q, p: -real(q, p))
    code, rec = record(capsys, "verify")
    assert code == 1
    failed = [r.name for r in rec.results if r.passed is False]
    assert any(name.startswith("H_q: digamma sum vs closed form") for name in failed)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bureshall", "exact", "--m", "2", "--n", "2", "--format", "json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert RunRecord.from_json(proc.stdout).command == "exact"
