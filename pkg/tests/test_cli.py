"""End-to-end exercises of the trimsim command line."""
import json
import subprocess
import sys

import numpy as np
import pytest

from trimsim.cli import EXIT_ERROR, EXIT_OK, EXIT_REJECT, main
from trimsim.distmodel import DistSpec, normal, sample, uniform
from trimsim.rng import SeedSpec

N01 = DistSpec((normal(0, 1),))


@pytest.fixture
def spec_files(tmp_path):
    p = tmp_path / "p.json"
    q = tmp_path / "q.json"
    p.write_text(json.dumps(N01.to_dict()))
    q.write_text(
        json.dumps(DistSpec((normal(0, 1, 0.9), normal(10, 3, 0.1))).to_dict())
    )
    return str(p), str(q)


def _write_sample(path, spec, n, seed):
    s = sample(spec, n, SeedSpec(seed))
    path.write_text("\n".join(format(v, ".12g") for v in s.values) + "\n")
    return str(path)


@pytest.fixture
def sample_files(tmp_path):
    a = _write_sample(tmp_path / "x.txt", N01, 120, 1)
    b = _write_sample(
        tmp_path / "y.txt", DistSpec((normal(0, 1, 0.8), normal(10, 1, 0.2))), 120, 2
    )
    return a, b


def test_tv_prints_distance(spec_files, capsys):
    p, q = spec_files
    assert main(["tv", "--dist1", p, "--dist2", q]) == EXIT_OK
    out = capsys.readouterr().out.strip()
    assert abs(float(out) - 0.0989) < 5e-4


def test_tv_decomposition_csv(spec_files, tmp_path, capsys):
    p, q = spec_files
    dec = tmp_path / "dec.csv"
    assert main(["tv", "--dist1", p, "--dist2", q, "--decomposition", str(dec)]) == EXIT_OK
    lines = dec.read_text().splitlines()
    assert lines[0] == "# trimsim-csv v1 decomposition"
    assert lines[1] == "x,f0,f1p,f2p"
    assert len(lines) > 100


def test_trim_writes_solution_json(sample_files, tmp_path, capsys):
    a, b = sample_files
    out = tmp_path / "sol.json"
    code = main(
        ["trim", "--alpha", "0.2", "--in1", a, "--in2", b, "--out", str(out)]
    )
    assert code == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["alpha"] == 0.2
    assert payload["distance"] >= 0.0
    assert abs(sum(payload["weights_p"]) - 1.0) < 1e-9


def test_test_retains_similar_samples(tmp_path, capsys):
    a = _write_sample(tmp_path / "x.txt", N01, 100, 5)
    b = _write_sample(tmp_path / "y.txt", N01, 100, 6)
    code = main(
        ["test", "--alpha", "0.1", "--boot", "100", "--in1", a, "--in2", b]
    )
    assert code == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["decision"] == "retain"


def test_test_rejects_dissimilar_samples(tmp_path, capsys):
    a = _write_sample(tmp_path / "x.txt", N01, 200, 7)
    b = _write_sample(tmp_path / "y.txt", DistSpec((normal(6, 1),)), 200, 8)
    code = main(
        ["test", "--alpha", "0.05", "--boot", "100", "--in1", a, "--in2", b]
    )
    assert code == EXIT_REJECT
    payload = json.loads(capsys.readouterr().out)
    assert payload["decision"] == "reject"
    assert payload["p_value"] <= 0.05


def test_test_with_ks_baseline(tmp_path, capsys):
    a = _write_sample(tmp_path / "x.txt", N01, 100, 9)
    b = _write_sample(tmp_path / "y.txt", N01, 100, 10)
    main(
        [
            "test", "--alpha", "0.1", "--boot", "50",
            "--in1", a, "--in2", b, "--baseline", "ks",
        ]
    )
    payload = json.loads(capsys.readouterr().out)
    assert "ks" in payload
    assert payload["ks"]["decision"] in ("retain", "reject")


def test_missing_input_file_exits_error(tmp_path, capsys):
    code = main(
        ["test", "--alpha", "0.1", "--in1", str(tmp_path / "nope.txt"),
         "--in2", str(tmp_path / "nope2.txt")]
    )
    assert code == EXIT_ERROR
    assert "error:" in capsys.readouterr().err


def test_malformed_sample_file_exits_error(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("1.0\nfish\n")
    good = _write_sample(tmp_path / "y.txt", N01, 20, 1)
    code = main(["test", "--alpha", "0.1", "--in1", str(bad), "--in2", good])
    assert code == EXIT_ERROR
    err = capsys.readouterr().err
    assert "fish" in err and ":2" in err


def test_malformed_spec_json_exits_error(tmp_path, sample_files, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code = main(["tv", "--dist1", str(bad), "--dist2", str(bad)])
    assert code == EXIT_ERROR


def test_simulate_runs_config(tmp_path):
    cfg = {
        "scenario": "smoke",
        "p": N01.to_dict(),
        "contam": DistSpec((normal(10, 1),)).to_dict(),
        "q": None,
        "alpha": 0.1,
        "nu_grid": [0.2],
        "n_grid": [40],
        "rho_grid": [1.0],
        "gamma_grid": [0.05],
        "replications": 2,
        "bootstrap": 20,
        "master_seed": 0,
    }
    cpath = tmp_path / "cfg.json"
    cpath.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(cpath), "--out", str(out)]) == EXIT_OK
    lines = (out / "smoke.csv").read_text().splitlines()
    assert lines[0] == "# trimsim-csv v1 table"
    assert len(lines) == 3
    assert (out / "smoke.json").exists()


def test_reproduce_table_single_cell(tmp_path):
    out = tmp_path / "t1"
    code = main(
        [
            "reproduce-table", "--table", "1", "--scale", "500",
            "--nu", "0.25", "--n", "100", "--rho", "1", "--gamma", "0.05",
            "--out", str(out),
        ]
    )
    assert code == EXIT_OK
    lines = (out / "table1.csv").read_text().splitlines()
    assert len(lines) == 3  # header comment, columns, one cell


def test_pvalue_curve_csv(sample_files, tmp_path):
    a, b = sample_files
    out = tmp_path / "curve.csv"
    code = main(
        [
            "pvalue-curve", "--in1", a, "--in2", b,
            "--alphas", "0.05,0.2,0.35", "--boot", "50", "--out", str(out),
        ]
    )
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "# trimsim-csv v1 pvalue_curve"
    assert lines[1] == "alpha,p_value,statistic,alpha_n"
    assert len(lines) == 5


def test_pvalue_hist_csv(spec_files, tmp_path):
    p, q = spec_files
    out = tmp_path / "hist.csv"
    code = main(
        [
            "pvalue-hist", "--dist1", p, "--dist2", q, "--alpha", "0.15",
            "--n", "60", "--reps", "4", "--boot", "30",
            "--contam-label", "1", "--out", str(out),
        ]
    )
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[1] == "rep,p_value,contam_frac"
    assert len(lines) == 6


def test_rates_csv_and_slope(tmp_path, capsys):
    out = tmp_path / "rates.csv"
    code = main(
        [
            "rates", "--case", "separated", "--n-grid", "50,100,200,400",
            "--seeds", "2", "--out", str(out),
        ]
    )
    assert code == EXIT_OK
    slope = float(capsys.readouterr().out.strip())
    assert slope < 0.0
    lines = out.read_text().splitlines()
    assert lines[1] == "case,n,mean_distance,se,seeds"
    assert len(lines) == 6


def test_trim_densities_csv(spec_files, tmp_path):
    p, q = spec_files
    out = tmp_path / "dens.csv"
    code = main(
        [
            "trim-densities", "--dist1", p, "--dist2", q,
            "--alphas", "0,0.1", "--gridsize", "64", "--fit-n", "2000",
            "--out", str(out),
        ]
    )
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[1] == "alpha,x,fP_joint,fQ_joint,fP_common,fQ_common"
    assert len(lines) == 2 + 2 * 64


def test_trimmed_process_csv(tmp_path):
    a = _write_sample(tmp_path / "x.txt", DistSpec((uniform(0, 1),)), 200, 3)
    out = tmp_path / "proc.csv"
    code = main(
        [
            "trimmed-process", "--in1", a, "--alphas", "0,0.1,0.3",
            "--gridsize", "32", "--out", str(out),
        ]
    )
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[1] == "alpha,t,D"
    assert len(lines) == 2 + 3 * 32


def test_cli_rerun_is_byte_identical(sample_files, tmp_path):
    """Same command, same seed: identical bytes out, via subprocess."""
    a, b = sample_files
    outs = []
    for name in ("r1.csv", "r2.csv"):
        out = tmp_path / name
        subprocess.run(
            [
                sys.executable, "-m", "trimsim.cli", "pvalue-curve",
                "--in1", a, "--in2", b, "--alphas", "0.1,0.25",
                "--boot", "40", "--seed", "11", "--out", str(out),
            ],
            check=True,
            capture_output=True,
        )
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
