"""Command-line surface: file formats, grids, exit codes, reproducibility."""

import filecmp
import json
import math

import pytest

from agehawkes import cli
from agehawkes.cli import parse_grid
from agehawkes.output import read_table


def run(args):
    return cli.main([str(a) for a in args])


class TestGridSyntax:
    def test_scalar(self):
        assert parse_grid("2.5") == [2.5]

    def test_linear(self):
        assert parse_grid("0:2:5") == pytest.approx([0.0, 0.5, 1.0, 1.5, 2.0])

    def test_log(self):
        grid = parse_grid("0.01:100:5:log")
        assert grid == pytest.approx([0.01, 0.1, 1.0, 10.0, 100.0])

    def test_single_point(self):
        assert parse_grid("3:9:1") == [3.0]

    @pytest.mark.parametrize("bad", ["1:2", "1:2:3:exp", "1:2:0", "0:1:3:log"])
    def test_rejects_malformed(self, bad):
        with pytest.raises(Exception):
            parse_grid(bad)


class TestSteadyCommand:
    def test_reference_row(self, tmp_path):
        out = tmp_path / "steady"
        assert run(["steady", "--mu", "1", "--alpha", "0.5", "--delta", "0", "--out", out]) == 0
        _, cols = read_table(f"{out}.csv")
        assert cols["mu"] == ["1"]
        assert cols["alpha"] == ["0.5"]
        assert cols["delta"] == ["0"]
        assert cols["a_inf"] == ["2"]

    def test_divergent_exit_code(self, tmp_path, capsys):
        code = run(["steady", "--mu", "1", "--alpha", "1", "--delta", "0",
                    "--out", tmp_path / "x"])
        assert code == cli.ENGINE_ERROR
        assert "Divergent" in capsys.readouterr().err

    def test_sweep_shape(self, tmp_path):
        out = tmp_path / "sweep"
        run(["steady", "--mu", "1:10:4:log", "--alpha", "0:1:3", "--delta", "0.005",
             "--out", out])
        _, cols = read_table(f"{out}.csv")
        assert len(cols["a_inf"]) == 12

    def test_usage_error_exit_code(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run(["steady", "--mu", "1:2", "--out", tmp_path / "x"])
        assert exc.value.code == cli.USAGE_ERROR


class TestAlphaMCommand:
    def test_reference_file(self, tmp_path):
        out = tmp_path / "am"
        assert run(["alpha-m", "--beta", "0.01", "--out", out]) == 0
        _, cols = read_table(f"{out}.csv")
        assert float(cols["alpha_m"][0]) == pytest.approx(0.973, abs=1e-3)
        assert abs(float(cols["g_residual"][0])) < 1e-10

    def test_boundary_rows(self, tmp_path):
        out = tmp_path / "am"
        run(["alpha-m", "--beta", "0.5:0.7:3", "--out", out])
        _, cols = read_table(f"{out}.csv")
        assert cols["alpha_m"] == ["0", "0", "0"]


class TestSensitivityCommand:
    def test_beta_sweep(self, tmp_path):
        out = tmp_path / "sens"
        run(["sensitivity", "--alpha", "0:2:5", "--beta", "0.01", "--out", out])
        _, cols = read_table(f"{out}.csv")
        assert len(cols["sigma"]) == 5
        assert all(float(v) > 0 for v in cols["sigma"])

    def test_mu_delta_fallback(self, tmp_path):
        out = tmp_path / "sens"
        run(["sensitivity", "--alpha", "0.5", "--mu", "2", "--delta", "0.005",
             "--out", out])
        _, cols = read_table(f"{out}.csv")
        assert float(cols["beta"][0]) == pytest.approx(0.01)


class TestFig2Command:
    def test_preset_contents(self, tmp_path):
        out = tmp_path / "fig2"
        assert run(["fig2", "--out", out]) == 0
        comments, cols = read_table(f"{out}.csv")
        betas = sorted(set(cols["beta"]))
        assert len(betas) == 5
        assert len(cols["alpha"]) == 5 * 201
        # Pole sentinel on the zero-load curve at the critical connectivity.
        rows = [
            (a, b, s) for a, b, s in zip(cols["alpha"], cols["beta"], cols["sigma"])
            if b == "0" and a == "1"
        ]
        assert rows == [("1", "0", "inf")]
        assert float(comments["alpha_m[0.01]"]) == pytest.approx(0.973, abs=1e-3)
        assert comments["alpha_m[0.5]"] == "0"
        assert comments["alpha_m[0]"] == "nan"
        meta = json.loads((tmp_path / "fig2.meta.json").read_text())
        assert math.isnan(meta["alpha_m"]["0"])

    def test_rerun_is_byte_identical(self, tmp_path):
        run(["fig2", "--out", tmp_path / "a"])
        run(["fig2", "--out", tmp_path / "b"])
        assert filecmp.cmp(tmp_path / "a.csv", tmp_path / "b.csv", shallow=False)


class TestSimulateCommand:
    def test_outputs_and_sidecar(self, tmp_path):
        out = tmp_path / "spk"
        assert run(["simulate", "--n", "100", "--mu", "2", "--alpha", "0.5",
                    "--spikes", "300", "--seed", "3", "--out", out]) == 0
        with open(f"{out}.csv") as fh:
            header = fh.readline().strip()
            first = fh.readline().strip().split(",")
        assert header == "time,neuron"
        assert len(first) == 2
        meta = json.loads((tmp_path / "spk.meta.json").read_text())
        assert meta["record"]["config"]["seed"] == 3
        assert meta["estimates"]["n_spikes"] == 300
        assert "written_at" in meta

    def test_rerun_identical_data(self, tmp_path):
        args = ["simulate", "--n", "100", "--mu", "2", "--alpha", "0.3",
                "--spikes", "200", "--seed", "9"]
        run(args + ["--out", tmp_path / "a"])
        run(args + ["--out", tmp_path / "b"])
        assert filecmp.cmp(tmp_path / "a.csv", tmp_path / "b.csv", shallow=False)


class TestPdeCommand:
    def test_outputs(self, tmp_path):
        out = tmp_path / "pde"
        assert run(["pde", "--mu", "2", "--alpha", "0", "--delta", "0.005",
                    "--ds", "1e-3", "--out", out]) == 0
        comments, cols = read_table(f"{out}.trajectory.csv")
        assert set(cols) == {"t", "a", "x", "mass"}
        assert comments["converged"] == "True"
        _, density = read_table(f"{out}.density.csv")
        assert set(density) == {"s", "u"}
        meta = json.loads((tmp_path / "pde.meta.json").read_text())
        assert meta["converged"] is True
        assert abs(meta["a_end"] - 1.980198) / 1.980198 < 0.01

    def test_not_converged_exit(self, tmp_path, capsys):
        code = run(["pde", "--mu", "2", "--alpha", "0.5", "--delta", "0.005",
                    "--ds", "1e-3", "--max-time", "0.2", "--out", tmp_path / "p"])
        assert code == cli.ENGINE_ERROR
        assert "NotConverged" in capsys.readouterr().err
        # Partial history still written for inspection.
        assert (tmp_path / "p.trajectory.csv").exists()


class TestFig1Command:
    def test_reduced_grid(self, tmp_path):
        out = tmp_path / "fig1"
        assert run(["fig1", "--alpha", "0:1:2", "--mu", "1:10:2:log",
                    "--n", "200", "--spikes", "800", "--seed", "1",
                    "--out", out]) == 0
        _, cols = read_table(f"{out}.csv")
        assert list(cols) == ["mu", "alpha", "a_inf_analytic", "a_inf_sim", "sim_se"]
        assert len(cols["mu"]) == 4
        for sim, ana in zip(cols["a_inf_sim"], cols["a_inf_analytic"]):
            assert abs(float(sim) - float(ana)) / float(ana) < 0.25
