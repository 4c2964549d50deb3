import json
import math
from pathlib import Path

import numpy as np
import pytest
from conftest import parse_csv, run_cli

from mslevy.cli import EXIT_BLOWUP, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, main
from mslevy.multiscale import catalog_kernel
from mslevy.oracle import MultiscaleSpec, invert_fourier
from mslevy.stable import StableComponent

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


# ---------------------------------------------------------------- density


def test_density_gauss_origin():
    code, text = run_cli("density", "--alpha", 2, "--beta", 0, "--t", 1, "--x0", 0, "--x1", 0, "--n", 1, "--method", "closed")
    assert code == EXIT_OK
    meta, names, data = parse_csv(text)
    assert names == ["x", "value", "err_est"]
    assert data.shape == (1, 3)
    assert data[0, 0] == 0 and abs(data[0, 1] - 0.2820948) < 1e-7
    assert meta["command"] == "density" and meta["param.method"] == "closed"
    assert "formula_id.value" in meta


def test_density_series_vs_oracle():
    args = ["density", "--alpha", 1.5, "--beta", -0.5, "--x0", -5, "--x1", 5, "--n", 21]
    _, _, a = parse_csv(run_cli(*args, "--method", "series")[1])
    _, _, b = parse_csv(run_cli(*args, "--method", "oracle")[1])
    assert np.array_equal(a[:, 0], b[:, 0])
    assert np.max(np.abs(a[:, 1] - b[:, 1])) < 1e-6


def test_density_empty_grid():
    assert main(["density", "--alpha", "2", "--x0", "0", "--x1", "1", "--n", "0"]) == EXIT_USAGE


def test_density_bad_parameters():
    assert main(["density", "--alpha", "1", "--x0", "0", "--x1", "1", "--n", "3"]) == EXIT_USAGE
    assert main(["density", "--alpha", "0.7", "--x0", "0", "--x1", "1", "--n", "3", "--method", "closed"]) == EXIT_USAGE
    assert main(["density", "--alpha", "2", "--t", "-1", "--x0", "0", "--x1", "1", "--n", "3"]) == EXIT_USAGE
    assert main(["density"]) == EXIT_USAGE
    assert main([]) == EXIT_USAGE


def test_determinism(tmp_path):
    args = ["density", "--alpha", "0.5", "--beta", "-0.5", "--x0", "0.1", "--x1", "5", "--n", "9"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_manifest_regenerates_file(tmp_path):
    out = tmp_path / "k.csv"
    assert main(["kernel", "--alpha1", "2", "--alpha2", "0.5", "--beta2", "-0.5", "--x0", "-2", "--x1", "3", "--n", "6",
                 "--out", str(out)]) == 0
    meta, _, _ = parse_csv(out.read_text())
    argv = [meta["command"]]
    for k, v in meta.items():
        if k.startswith("param."):
            argv += [f"--{k[6:]}", v]
    again = tmp_path / "k2.csv"
    assert main(argv + ["--out", str(again)]) == 0
    assert again.read_bytes() == out.read_bytes()


# ----------------------------------------------------------------- kernel


def test_kernel_catalog_vs_oracle():
    base = ["kernel", "--alpha1", 2, "--alpha2", 0.5, "--beta2", -0.5, "--x0", -3, "--x1", 3, "--n", 13]
    _, _, a = parse_csv(run_cli(*base, "--method", "catalog")[1])
    _, _, b = parse_csv(run_cli(*base, "--method", "oracle")[1])
    _, _, c = parse_csv(run_cli(*base, "--method", "series")[1])
    assert np.max(np.abs(a[:, 1] - b[:, 1])) < 1e-6
    assert np.max(np.abs(c[:, 1] - b[:, 1])) < 1e-6


def test_kernel_usage_errors():
    assert main(["kernel", "--x0", "0", "--x1", "1", "--n", "2"]) == EXIT_USAGE
    assert main(["kernel", "--alpha1", "1.2", "--alpha2", "1.7", "--method", "catalog", "--x0", "0", "--x1", "1", "--n", "2"]) == EXIT_USAGE
    assert main(["kernel", "--figure", "fig9"]) == EXIT_USAGE


def test_fig1(figure_csv):
    meta, names, data = parse_csv(figure_csv("fig1"))
    assert names == ["x", "curve_I", "curve_II", "curve_III"]
    assert meta["param.figure"] == "fig1"
    for j, name in enumerate(["halfHalf", "halfThird", "thirdTwoThirds"], 1):
        for i in (0, 20, 79):
            assert abs(data[i, j] - catalog_kernel(name, 1.0, data[i, 0])) < 1e-6
    assert np.all(data[:, 1:] > 0)


def test_fig2(figure_csv):
    meta, names, data = parse_csv(figure_csv("fig2"))
    assert names == ["x", "curve_I", "curve_II", "curve_III"]
    x = data[:, 0]
    assert abs(data[x == 0, 1][0] - 0.1994711) < 1e-7
    # curve I is the symmetric Gaussian pair, curve II is supported mass-shifted to the right
    assert np.max(np.abs(data[:, 1] - data[::-1, 1])) < 1e-12
    spec = MultiscaleSpec([StableComponent(0.5, -0.5), StableComponent(2, 0)])
    for i in (30, 60, 90):
        assert abs(data[i, 2] - invert_fourier(spec, 1.0, x[i])) < 1e-6


def test_fig3(figure_csv):
    meta, names, data = parse_csv(figure_csv("fig3"))
    assert names == ["y", "curve_I", "curve_II", "curve_III"]
    assert data[0, 0] == -2 and data[-1, 0] == 6
    assert np.all(data[:, 1:] > 0)


# ---------------------------------------------------------------- moments


def test_moments_half_half():
    code, text = run_cli("moments", "--alpha1", 0.5, "--alpha2", 0.5, "--t", 1, "--orders", "0:5")
    assert code == 0
    meta, names, data = parse_csv(text)
    assert names == ["n", "rho", "carleman_term", "partial_sum"]
    assert list(data[:, 0]) == [0, 1, 2, 3, 4, 5]
    assert data[0, 1] == 1 and abs(data[1, 1] - 0.5) < 1e-14
    assert meta["verdict"] == "unique"


def test_moments_two_thirds_third():
    code, text = run_cli("moments", "--alpha1", 2 / 3, "--alpha2", 1 / 3, "--orders", "0:3")
    assert code == 0
    meta, _, _ = parse_csv(text)
    assert meta["verdict"] == "non_unique_candidate"


@pytest.mark.parametrize("orders", ["5:2", "x", "-1:3"])
def test_moments_bad_range(orders):
    assert main(["moments", "--alpha1", "0.5", "--alpha2", "0.5", "--orders", orders]) == EXIT_USAGE


def test_moments_bad_spec():
    assert main(["moments", "--alpha1", "1.5", "--alpha2", "0.5"]) == EXIT_USAGE


# ------------------------------------------------------------------ solve


def _asymptotics(out):
    meta, names, data = parse_csv((out / "asymptotics.csv").read_text())
    return names, data


def test_solve_supercritical(tmp_path):
    assert main(["solve", str(CONFIGS / "supercritical.cfg"), "--out", str(tmp_path)]) == EXIT_OK
    names, data = _asymptotics(tmp_path)
    assert names == ["t", "scaled_gap_p1", "scaled_gap_p2", "scaled_gap_pinf"]
    late = data[data[:, 0] >= 1]
    assert np.all(np.diff(late[:, 1:], axis=0) < 0)
    metrics = json.loads((tmp_path / "metrics.json").read_text())
    assert metrics["invariants"]["mass_drift"] < 1e-10
    assert abs(metrics["decay_fit_Linf"] - metrics["decay_predicted_Linf"]) < 0.1
    snaps = sorted(tmp_path.glob("snapshot_*.csv"))
    assert len(snaps) == len(metrics["diagnostics"])
    head = snaps[-1].read_text().splitlines()
    assert "# t=50" in head and "x,u" in head


def test_solve_linear(tmp_path):
    assert main(["solve", str(CONFIGS / "linear.cfg"), "--out", str(tmp_path)]) == EXIT_OK
    _, data = _asymptotics(tmp_path)
    assert np.all(data[:, 1:] <= 1e-12)


def test_solve_burgers(tmp_path):
    assert main(["solve", str(CONFIGS / "burgers.cfg"), "--out", str(tmp_path)]) == EXIT_OK
    names, data = _asymptotics(tmp_path)
    assert names[1].startswith("source_gap_p")
    assert np.all(data[:, 1:] < 1e-6)


def test_solve_malformed(tmp_path, capsys):
    assert main(["solve", str(CONFIGS / "malformed.cfg"), "--out", str(tmp_path)]) == EXIT_USAGE
    assert "line 3" in capsys.readouterr().err


def test_solve_missing_file(tmp_path):
    assert main(["solve", str(tmp_path / "nope.cfg"), "--out", str(tmp_path)]) == EXIT_USAGE


def test_solve_blowup(tmp_path):
    cfg = tmp_path / "blow.cfg"
    cfg.write_text("L = 20\nN = 256\ndt = 0.05\nt_end = 2\nspec = 2,0,1\nr = 2\nc = -200\n"
                   "dealias = false\nblowup_factor = 1.5\nu0_mass = 5\n")
    assert main(["solve", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_BLOWUP


def test_solve_fractal_source_rejected(tmp_path):
    cfg = tmp_path / "frac.cfg"
    cfg.write_text("L = 40\nN = 256\ndt = 0.1\nt_end = 1\nspec = 1.5,0,1; 2,0,1\ntail_mass_budget = 1\n"
                   "source_reference = true\n")
    assert main(["solve", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_USAGE


# --------------------------------------------------------------- validate


def test_validate_specfun():
    code, text = run_cli("validate", "--suite", "specfun")
    assert code == EXIT_OK
    rows = [l.split(",") for l in text.splitlines() if not l.startswith("#")]
    assert rows and all(r[0] == "PASS" and r[1] == "specfun" for r in rows)
    assert any("reflection" in r[2] for r in rows) and any("multiplication" in r[2] for r in rows)
    assert all(float(r[3]) < 1e-12 for r in rows if "reflection" in r[2] or "multiplication" in r[2])


def test_validate_all():
    code, text = run_cli("validate", "--suite", "all")
    assert code == EXIT_OK
    suites = {l.split(",")[1] for l in text.splitlines() if not l.startswith("#")}
    assert suites == {"specfun", "stable", "multiscale", "moments", "claw"}


def test_validate_unknown_suite():
    assert main(["validate", "--suite", "nope"]) == EXIT_USAGE


def test_validate_failure_exit(monkeypatch):
    from mslevy import validate

    monkeypatch.setitem(validate.SUITES, "specfun", lambda: [validate.Check("specfun", "forced", 1.0, 0.5)])
    assert main(["validate", "--suite", "specfun"]) == EXIT_VALIDATION


def test_numeric_exit_code(monkeypatch):
    from mslevy import specfun, stable

    def boom(*a, **k):
        raise specfun.ConvergenceError("forced")

    monkeypatch.setattr(stable, "density", boom)
    assert main(["density", "--alpha", "2", "--x0", "0", "--x1", "0", "--n", "1"]) == EXIT_NUMERIC
