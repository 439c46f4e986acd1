import csv
import io
import math
from pathlib import Path

import numpy as np
import pytest

from curetail.cli import ESTIMATE_COLUMNS, SIMULATE_COLUMNS, fmt, main
from curetail.simulation import Scenario, generate
from curetail.survdata import write_csv as write_sample

GOLDEN = Path(__file__).parent / "golden"
SMOKE = ["--family", "frechet", "--n", "200", "--reps", "5", "--s", "0.5", "--x", "0.5", "--seed", "1"]


def run(argv, capsys):
    """Run the CLI in-process; returns (exit code, stdout, stderr)."""
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture(scope="module")
def sample_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "sample.csv"
    write_sample(generate(Scenario("gpd", 0.5, 300, seed=3), 0), path)
    return path


def test_fmt():
    assert fmt(0.1 + 0.2) == "0.3"
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(7) == "7"
    assert fmt(math.nan) == "" and fmt(None) == ""


class TestSimulate:
    def test_smoke(self, capsys):
        code, out, _ = run(["simulate", *SMOKE], capsys)
        assert code == 0
        table = rows(out)
        assert len(table) == 1
        assert tuple(table[0]) == SIMULATE_COLUMNS
        assert table[0]["family"] == "frechet"

    def test_grid_product(self, capsys):
        code, out, _ = run(["simulate", "--family", "gpd", "--s", "0,0.5,1", "--x", "0.3,0.5,0.7",
                            "--n", "150", "--reps", "2", "--y1", "0.5", "--y2", "0.5"], capsys)
        assert code == 0
        table = rows(out)
        assert len(table) == 9
        assert {(r["x"], r["s"]) for r in table} == {
            (x, s) for x in ("0.3", "0.5", "0.7") for s in ("0", "0.5", "1")}

    def test_repeat_and_workers_byte_identical(self, tmp_path, capsys):
        outs = []
        for i, workers in enumerate(("1", "1", "3")):
            path = tmp_path / f"run{i}.csv"
            assert run(["simulate", *SMOKE, "--workers", workers, "--out", str(path)], capsys)[0] == 0
            outs.append(path.read_bytes())
        assert outs[0] == outs[1] == outs[2]

    def test_golden(self, capsys):
        _, out, _ = run(["simulate", *SMOKE], capsys)
        assert out == (GOLDEN / "simulate.csv").read_text(encoding="utf-8")


class TestEstimate:
    def test_invariant_and_columns(self, sample_csv, capsys):
        code, out, _ = run(["estimate", "--input", str(sample_csv), "--x", "0.5"], capsys)
        assert code == 0
        (row,) = rows(out)
        assert tuple(row) == ESTIMATE_COLUMNS and ESTIMATE_COLUMNS[-1] == "status"
        assert float(row["p_hat"]) >= float(row["p_beran"])
        assert float(row["p_hat_clipped"]) == min(float(row["p_hat"]), 1.0)
        assert float(row["cure_hat"]) == pytest.approx(1 - float(row["p_hat"]), abs=1e-11)

    def test_no_censoring(self, write_csv, capsys):
        path = write_csv("time,status,covariate\n" + "".join(f"{t},1,0.5\n" for t in (1, 2, 3, 4, 5)))
        code, out, _ = run(["estimate", "--input", str(path), "--x", "0.5", "--bandwidth", "1e6"], capsys)
        assert code == 0
        assert float(rows(out)[0]["p_beran"]) == 1.0

    def test_fixed_tuning_echoed(self, sample_csv, capsys):
        _, out, _ = run(["estimate", "--input", str(sample_csv), "--x", "0.3,0.6",
                         "--y1", "0.5", "--y2", "0.5"], capsys)
        for row in rows(out):
            assert row["y1"] == "0.5" and row["y2"] == "0.5"

    def test_no_mass_row(self, sample_csv, capsys):
        code, out, _ = run(["estimate", "--input", str(sample_csv), "--x", "0.5,5",
                            "--bandwidth", "0.1"], capsys)
        assert code == 0
        ok, empty = rows(out)
        assert ok["status"] in ("ok", "gamma-floored")
        assert empty["status"] == "no-mass" and empty["p_hat"] == "" and empty["x"] == "5"

    def test_default_grid(self, sample_csv, capsys):
        _, out, _ = run(["estimate", "--input", str(sample_csv)], capsys)
        assert len(rows(out)) == 19

    def test_golden(self, capsys):
        _, out, _ = run(["estimate", "--input", str(GOLDEN / "sample.csv"), "--x", "0.3,0.5,0.7"], capsys)
        assert out == (GOLDEN / "estimate.csv").read_text(encoding="utf-8")


class TestAsymptotics:
    ARGS = ["asymptotics", "--family", "frechet", "--x", "0.5", "--s", "0.5"]

    def test_finite_nonnegative(self, capsys):
        code, out, _ = run(self.ARGS, capsys)
        assert code == 0
        table = rows(out)
        assert [r["quantity"] for r in table[:5]] == [
            "tau_c", "gamma_limit", "p_limit", "sigma2_gamma", "sigma2_p"]
        assert sum(r["quantity"] == "delta" for r in table) == 5
        values = [float(r["value"]) for r in table]
        assert all(math.isfinite(v) and v >= 0 for v in values)

    def test_t_grid(self, capsys):
        _, out, _ = run(self.ARGS + ["--t-grid", "1:1:4"], capsys)
        assert [r["t"] for r in rows(out) if r["quantity"] == "delta"] == ["1", "2", "3", "4"]

    def test_degenerate(self, capsys):
        code, _, err = run(self.ARGS + ["--y1", "0.5", "--y2", "0.001"], capsys)
        assert code == 3
        assert "b(y2|x) != 0" in err

    def test_golden(self, capsys):
        _, out, _ = run(self.ARGS, capsys)
        assert out == (GOLDEN / "asymptotics.csv").read_text(encoding="utf-8")


class TestCurve:
    def test_columns_and_properties(self, sample_csv, capsys):
        code, out, _ = run(["curve", "--input", str(sample_csv), "--x", "0.5"], capsys)
        assert code == 0
        table = rows(out)
        assert list(table[0]) == ["t", "F_beran", "F_hat"]
        assert len(table) == 301
        t = np.array([float(r["t"]) for r in table])
        fb = np.array([float(r["F_beran"]) for r in table])
        fh = np.array([float(r["F_hat"]) for r in table])
        tau_n = float(np.max(np.loadtxt(sample_csv, delimiter=",", skiprows=1)[:, 0]))
        assert t[-1] == pytest.approx(3 * tau_n, rel=1e-11)
        np.testing.assert_array_equal(fh[t <= tau_n], fb[t <= tau_n])
        assert np.all(np.diff(fh) >= 0)
        _, est_out, _ = run(["estimate", "--input", str(sample_csv), "--x", "0.5"], capsys)
        est = rows(est_out)[0]
        p, g, f_tau = float(est["p_hat"]), float(est["gamma_hat"]), float(est["p_beran"])
        assert abs(fh[-1] - p) <= (t[-1] / tau_n) ** (-1 / g) * (p - f_tau) + 1e-9

    def test_family_mode(self, capsys):
        code, out, _ = run(["curve", "--family", "gpd", "--n", "500", "--s", "0.5",
                            "--y1", "0.5", "--y2", "0.5", "--t-grid", "0:0.5:20"], capsys)
        assert code == 0
        table = rows(out)
        assert list(table[0]) == ["t", "F_beran", "F_hat", "F_true", "F_limit"]
        assert len(table) == 41

    def test_golden(self, capsys):
        _, out, _ = run(["curve", "--input", str(GOLDEN / "sample.csv"), "--x", "0.5",
                         "--t-grid", "0:0.25:12"], capsys)
        assert out == (GOLDEN / "curve.csv").read_text(encoding="utf-8")


class TestExitCodes:
    def test_io_failure(self, tmp_path, capsys):
        code, _, err = run(["estimate", "--input", str(tmp_path / "missing.csv")], capsys)
        assert code == 1 and "missing.csv" in err
        code, _, _ = run(["simulate", *SMOKE, "--out", str(tmp_path / "no" / "dir.csv")], capsys)
        assert code == 1

    @pytest.mark.parametrize("argv", [
        ["simulate", "--family", "weibull"],
        ["simulate", "--s", "abc"],
        ["simulate", "--s", "1.5", "--n", "50", "--reps", "1"],
        ["simulate", "--y1", "0.5"],
        ["simulate", "--y1", "0.5", "--y2", "1.5"],
        ["simulate", "--bandwidth", "-1"],
        ["estimate"],
        ["curve"],
        ["asymptotics", "--family", "gpd,gev"],
        ["asymptotics", "--family", "gpd", "--t-grid", "3:1:1"],
        ["frobnicate"],
    ])
    def test_usage(self, argv, capsys):
        assert run(argv, capsys)[0] == 2

    def test_schema_violation(self, write_csv, capsys):
        path = write_csv("time,status\n1,1\n")
        code, _, err = run(["estimate", "--input", str(path)], capsys)
        assert code == 2 and "covariate" in err
        path = write_csv("time,status,covariate\n1,2,0.5\n", "bad.csv")
        assert run(["estimate", "--input", str(path)], capsys)[0] == 2
