import json
import os

import numpy as np
import pytest

from platoon.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def last_json(out):
    return json.loads(out.strip().split("\n")[-1])


def test_eigs_symmetric_summary(capsys):
    code, out, _ = run_cli(capsys, "eigs", "--n", "20", "--k0", "1", "--b0", "0.5",
                           "--scenario", "I")
    assert code == 0
    summary = last_json(out)
    assert summary["n"] == 20
    assert summary["stability_margin"] == pytest.approx(0.0496, abs=5e-4)
    lines = out.strip().split("\n")
    assert lines[0] == "l,re,im"
    assert len(lines) == 42  # header + 40 eigenvalues + summary


def test_eigs_mistuned_optimal(capsys):
    code, out, _ = run_cli(capsys, "eigs", "--n", "20", "--scenario", "I",
                           "--epsilon", "0.1", "--profile", "optimal")
    assert code == 0
    assert last_json(out)["stability_margin"] == pytest.approx(0.1281, abs=5e-3)


def test_eigs_validation_exit_code(capsys):
    code, _, err = run_cli(capsys, "eigs", "--n", "1")
    assert code == 2
    assert "n_vehicles" in err


def test_determinism_byte_identical(capsys):
    _, out1, _ = run_cli(capsys, "eigs", "--n", "12", "--epsilon", "0.1",
                         "--profile", "optimal")
    _, out2, _ = run_cli(capsys, "eigs", "--n", "12", "--epsilon", "0.1",
                         "--profile", "optimal")
    assert out1 == out2


def test_config_file_equivalent_to_flags(capsys, tmp_path):
    cfg = {
        "n_vehicles": 10, "k0": 1.0, "b0": 0.5, "scenario": "II",
        "epsilon": 0.1, "profile": {"kind": "optimal_constant_ii"},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    _, out_file, _ = run_cli(capsys, "eigs", "--config", str(path))
    _, out_flags, _ = run_cli(capsys, "eigs", "--n", "10", "--scenario", "II",
                              "--epsilon", "0.1", "--profile", "constant")
    assert out_file == out_flags


def test_out_directory_files(capsys, tmp_path):
    out_dir = tmp_path / "results"
    code, out, _ = run_cli(capsys, "--out", str(out_dir), "eigs", "--n", "8")
    assert code == 0
    assert (out_dir / "eigs_I_8.csv").exists()
    # CSV went to the file; stdout has only the summary
    assert out.strip().startswith("{")


def test_dump_matrix(capsys, tmp_path):
    path = tmp_path / "a.txt"
    code, _, _ = run_cli(capsys, "eigs", "--n", "4", "--dump-matrix", str(path))
    assert code == 0
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "8 8"


def test_pde_subcommand(capsys):
    code, out, _ = run_cli(capsys, "pde", "--n", "25", "--basis-size", "64")
    assert code == 0
    summary = last_json(out)
    assert summary["basis_size"] == 64
    assert summary["stability_margin"] == pytest.approx(0.0311, abs=5e-4)


def test_sweep_files_and_slopes(capsys, tmp_path):
    out_dir = tmp_path / "sweep"
    code, out, _ = run_cli(
        capsys, "--out", str(out_dir), "sweep", "--n-values", "10,20,40",
        "--outputs", "spectrum,asymptote", "--scenario", "I",
    )
    assert code == 0
    spec_file = out_dir / "sweep_spectrum_I_10-40.csv"
    asym_file = out_dir / "sweep_asymptote_I_10-40.csv"
    assert spec_file.exists() and asym_file.exists()
    lines = spec_file.read_text().strip().split("\n")
    assert lines[0] == "N,source,value"
    assert [ln.split(",")[1] for ln in lines[1:]] == ["platoon"] * 3
    summary = last_json(out)
    assert "slope_spectrum" in summary and "slope_asymptote" in summary
    # symmetric margins fall off like 1/N^2
    assert summary["slope_asymptote"] == pytest.approx(-2.0, abs=1e-6)


def test_sweep_parallel_matches_serial(capsys, tmp_path):
    argv = ["sweep", "--n-values", "5,10", "--outputs", "spectrum"]
    old = os.environ.get("PLATOON_THREADS")
    try:
        os.environ["PLATOON_THREADS"] = "1"
        _, out_serial, _ = run_cli(capsys, *argv)
        os.environ["PLATOON_THREADS"] = "3"
        _, out_parallel, _ = run_cli(capsys, *argv)
    finally:
        if old is None:
            os.environ.pop("PLATOON_THREADS", None)
        else:
            os.environ["PLATOON_THREADS"] = old
    assert out_serial == out_parallel


def test_sweep_validation(capsys):
    code, _, err = run_cli(capsys, "sweep", "--n-values", "10,5")
    assert code == 2
    code, _, _ = run_cli(capsys, "sweep", "--n-values", "1,5")
    assert code == 2
    code, _, _ = run_cli(capsys, "sweep", "--n-values", "5,10", "--outputs", "bogus")
    assert code == 2


def test_mistune_schedule(capsys):
    code, out, _ = run_cli(capsys, "mistune", "--n", "20", "--epsilon", "0.1",
                           "--scenario", "II")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "i,x,k_front,k_back,damping"
    first = lines[1].split(",")
    assert float(first[2]) == pytest.approx(1.1)
    assert float(first[3]) == pytest.approx(0.9)
    last = lines[20].split(",")
    assert float(last[3]) == 0.0
    summary = last_json(out)
    assert summary["first_order_shift"] == pytest.approx(-2 * 0.1 / (0.5 * 20), rel=1e-9)


def test_simulate_short_run(capsys):
    code, out, _ = run_cli(capsys, "simulate", "--n", "5", "--t-final", "20",
                           "--dt", "0.02")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "t,vehicle,abs_error,rel_error,velocity"
    assert last_json(out)["n"] == 5


def test_simulate_dt_validation(capsys):
    code, _, _ = run_cli(capsys, "simulate", "--n", "5", "--dt", "0")
    assert code == 2


def test_hinf_agreement(capsys):
    code, out, _ = run_cli(capsys, "hinf", "--n", "5")
    assert code == 0
    summary = last_json(out)
    assert summary["agree"] is True
    assert summary["gamma_bisect"] == pytest.approx(summary["gamma_sweep"], rel=2e-3)


def test_asymptote_csv(capsys):
    code, out, _ = run_cli(capsys, "asymptote", "--n", "100", "--modes", "2")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "N,l,s_plus_pred,s_plus_numeric,rel_err"
    n, l, pred, numeric, rel = lines[1].split(",")
    assert (n, l) == ("100", "1")
    assert float(rel) < 0.05


def test_threads_validation(capsys):
    old = os.environ.get("PLATOON_THREADS")
    try:
        os.environ["PLATOON_THREADS"] = "zero"
        code, _, err = run_cli(capsys, "sweep", "--n-values", "5,10")
        assert code == 2
        assert "PLATOON_THREADS" in err
    finally:
        if old is None:
            os.environ.pop("PLATOON_THREADS", None)
        else:
            os.environ["PLATOON_THREADS"] = old
