import json

import numpy as np
import pytest

from kickedtop.cli import main, parse_values
from kickedtop.io import read_csv


def run(*args):
    return main([str(a) for a in args])


def test_parse_values_forms():
    assert np.allclose(parse_values("0.4"), [0.4])
    assert np.allclose(parse_values("0.4,1.7,3"), [0.4, 1.7, 3.0])
    assert np.allclose(parse_values("0:1:0.25"), [0.0, 0.25, 0.5, 0.75, 1.0])
    with pytest.raises(ValueError):
        parse_values("0:1")
    with pytest.raises(ValueError):
        parse_values("abc")


def test_portrait_runs_and_is_deterministic(tmp_path):
    out = tmp_path / "run"
    args = ("portrait", "--kappa", "0.4", "--orbits", "5", "--kicks", "10",
            "--out", out, "--seed", "3")
    assert run(*args) == 0
    csv_path = out / "portrait_kappa0p4.csv"
    first = csv_path.read_bytes()
    meta, cols = read_csv(csv_path)
    assert meta["command"] == "portrait"
    assert meta["seed"] == "3"
    assert "tool" in meta
    assert cols["phi"].size == 5 * 11
    assert set(cols) == {"phi", "theta", "orbit_id"}
    manifest = json.loads((out / "portrait_manifest.json").read_text())
    assert str(csv_path) in manifest["files"]
    assert "wall_time_s" in manifest
    assert run(*args) == 0
    assert csv_path.read_bytes() == first  # byte-identical rerun


def test_lyapunov_field_mode(tmp_path):
    out = tmp_path / "lf"
    assert run("lyapunov", "--kappa", "7", "--grid", "8", "--kicks", "60",
               "--out", out) == 0
    _, cols = read_csv(out / "lyapunov_field_kappa7.csv")
    assert cols["lambda"].size == 64
    assert cols["lambda"].mean() > 0.5


def test_lyapunov_scan_mode(tmp_path):
    out = tmp_path / "ls"
    assert run("lyapunov", "--mode", "scan", "--kappa", "1:7:3",
               "--alpha-grid", "1.0:2.2:0.6", "--samples", "30", "--kicks", "80",
               "--out", out, "--threads", "2") == 0
    _, cols = read_csv(out / "lyapunov_scan.csv")
    assert cols["kappa"].size == 3 * 3
    assert np.all(cols["stderr"] >= 0)


def test_spectrum_small(tmp_path):
    out = tmp_path / "sp"
    assert run("spectrum", "--j", "40", "--kappa", "0.4,7", "--out", out) == 0
    meta, scan = read_csv(out / "spectrum_scan.csv")
    assert meta["sector"] == "even"
    assert list(scan["kappa"]) == [0.4, 7.0]
    assert np.all(scan["n_levels"] == 41)
    _, hist = read_csv(out / "pspacing_kappa0p4.csv")
    assert hist["bin_center"].size == 50
    assert (out / "cache").exists()  # eigensystem cache on by default


def test_spectrum_cache_disabled(tmp_path):
    out = tmp_path / "sp2"
    assert run("spectrum", "--j", "12", "--kappa", "3", "--no-cache", "--out", out) == 0
    assert not (out / "cache").exists()


def test_multifractal_field_mode(tmp_path):
    out = tmp_path / "mf"
    assert run("multifractal", "--j", "20", "--kappa", "7", "--grid", "10",
               "--out", out) == 0
    _, cols = read_csv(out / "dq_field_kappa7.csv")
    assert set(cols) == {"phi", "theta", "D1", "D2", "Dinf"}
    assert cols["D2"].size == 100
    assert np.all(cols["D2"] <= cols["D1"] + 1e-12)


def test_multifractal_scan_mode(tmp_path):
    out = tmp_path / "ms"
    assert run("multifractal", "--mode", "scan", "--j-list", "10,15",
               "--kappa", "1,5", "--samples", "40", "--q", "2", "--out", out) == 0
    _, cols = read_csv(out / "multifractal_scan.csv")
    assert cols["kappa"].size == 4
    assert np.all((cols["Dq_mean"] >= 0) & (cols["Dq_mean"] <= 1))


def test_multifractal_scaling_mode(tmp_path):
    out = tmp_path / "msc"
    assert run("multifractal", "--mode", "scaling", "--kappa", "7",
               "--j-list", "10,20,30,40", "--samples", "60", "--out", out) == 0
    _, fits = read_csv(out / "scaling_fits.csv")
    assert "intercept" in fits and "slope" in fits
    # linear fits for q=1,2,inf plus the loglog variant for q=inf
    assert fits["q"].size == 4
    _, pts = read_csv(out / "scaling_points.csv")
    assert pts["N"].size == 3 * 4


def test_coeffdist_small(tmp_path):
    out = tmp_path / "cd"
    assert run("coeffdist", "--j-list", "15", "--kappa", "1,6", "--samples", "400",
               "--out", out) == 0
    _, scan = read_csv(out / "coeffdist_scan.csv")
    assert scan["skld"].size == 2
    assert np.all(scan["skld"] >= 0)
    _, hist = read_csv(out / "lnx_hist_j15_kappa6.csv")
    assert {"lnx_bin", "density", "reference_density"} <= set(hist)
    _, cdf = read_csv(out / "cdf_j15_kappa1.csv")
    assert np.all(np.diff(cdf["F_emp"]) >= 0)


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\norbits = 4\nkicks = 6\nseed = 9\n")
    out = tmp_path / "cfgout"
    assert run("portrait", "--kappa", "1", "--config", cfg, "--kicks", "3",
               "--out", out) == 0
    meta, cols = read_csv(out / "portrait_kappa1.csv")
    assert cols["phi"].size == 4 * 4  # orbits from config, kicks from CLI flag
    assert meta["seed"] == "9"


def test_usage_error_exit_code_bad_kappa():
    assert run("portrait", "--kappa", "nonsense") == 1


def test_usage_error_exit_code_bad_range():
    assert run("lyapunov", "--kappa", "5:1:1") == 1


def test_usage_error_unknown_subcommand():
    assert run("explode") == 1


def test_usage_error_missing_subcommand():
    assert run() == 1


def test_usage_error_bad_config(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("this line has no equals sign\n")
    assert run("portrait", "--kappa", "1", "--config", cfg) == 1


def test_usage_error_bad_domain(tmp_path):
    # physical-domain violations in resolved options are usage errors
    assert run("spectrum", "--j", "0", "--kappa", "1", "--out", tmp_path) == 1


def test_numerical_failure_exit_code(monkeypatch, tmp_path):
    from kickedtop import cli
    from kickedtop.floquet import DiagonalizationError

    def boom(params, cache_dir=None):
        raise DiagonalizationError("synthetic eigensolver failure")

    monkeypatch.setattr(cli, "cached_eigensystem", boom)
    assert run("spectrum", "--j", "10", "--kappa", "1", "--out", tmp_path) == 2


def test_version_flag(capsys):
    assert run("--version") == 0
    assert "kickedtop" in capsys.readouterr().out
