import json

import numpy as np
import pytest

from l1tik.cli import main


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


SOLVE_CONFIG = {
    "problem": {"n": 64, "sigma": 1e-3, "alpha": 1e-4, "method": "l1_admm"},
    "solver": {"max_iter": 200},
    "seed": 7,
}

RATES_CONFIG = {
    "experiment": {
        "n": 17,
        "methods": ["l1_admm", "l1_adlpmm", "l2"],
        "sigmas": [1e-3, 3e-3, 1e-2],
        "alpha_grid": {"lo": 1e-6, "hi": 1e-2, "count": 5},
        "runs": 2,
    },
    "solver": {"rho_pen": 1.0, "max_iter": 150},
    "seed": 3,
}


class TestSolveCommand:
    def test_writes_csv_with_diagnostics(self, tmp_path, capsys):
        config = write_config(tmp_path, SOLVE_CONFIG)
        out = tmp_path / "solution.csv"
        assert main(["solve", "--config", str(config), "--output", str(out)]) == 0
        lines = out.read_text().splitlines()
        comments = [l for l in lines if l.startswith("#")]
        assert any("objective" in c for c in comments)
        assert any("primal_residual" in c for c in comments)
        assert any("iterations_run" in c for c in comments)
        header_index = lines.index("x,u")
        data = lines[header_index + 1 :]
        assert len(data) == 64
        x0, u0 = data[0].split(",")
        assert float(x0) == pytest.approx(1.0 / 128.0)
        assert np.isfinite(float(u0))

    def test_rerun_byte_identical(self, tmp_path):
        config = write_config(tmp_path, SOLVE_CONFIG)
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["solve", "--config", str(config), "--output", str(out1)])
        main(["solve", "--config", str(config), "--output", str(out2)])
        assert out1.read_bytes() == out2.read_bytes()

    def test_manifest_written_and_replayable(self, tmp_path):
        config = write_config(tmp_path, SOLVE_CONFIG)
        out = tmp_path / "solution.csv"
        main(["solve", "--config", str(config), "--output", str(out)])
        manifest_path = tmp_path / "solution.csv.manifest.json"
        manifest = json.loads(manifest_path.read_text())
        assert manifest["seed"] == 7
        assert "version" in manifest and "duration_seconds" in manifest
        assert manifest["problem"]["n"] == 64
        # replaying the manifest as config reproduces the output exactly
        replay = tmp_path / "replay.csv"
        assert main(["solve", "--config", str(manifest_path), "--output", str(replay)]) == 0
        assert replay.read_bytes() == out.read_bytes()

    def test_invalid_alpha_names_key(self, tmp_path, capsys):
        bad = {"problem": dict(SOLVE_CONFIG["problem"], alpha=-1.0), "seed": 1}
        config = write_config(tmp_path, bad)
        code = main(["solve", "--config", str(config), "--output", str(tmp_path / "x.csv")])
        assert code == 2
        assert "alpha" in capsys.readouterr().err

    def test_unknown_key_rejected(self, tmp_path, capsys):
        bad = dict(SOLVE_CONFIG)
        bad["problem"] = dict(SOLVE_CONFIG["problem"], alfa=1e-4)
        config = write_config(tmp_path, bad)
        code = main(["solve", "--config", str(config), "--output", str(tmp_path / "x.csv")])
        assert code == 2
        assert "alfa" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        code = main(["solve", "--config", str(tmp_path / "missing.json"), "--output", str(tmp_path / "x.csv")])
        assert code == 2

    def test_seed_flag_overrides(self, tmp_path):
        config = write_config(tmp_path, SOLVE_CONFIG)
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["solve", "--config", str(config), "--output", str(out1), "--seed", "7"])
        main(["solve", "--config", str(config), "--output", str(out2), "--seed", "8"])
        assert out1.read_bytes() != out2.read_bytes()


class TestRatesCommand:
    def test_outputs(self, tmp_path, capsys):
        config = write_config(tmp_path, RATES_CONFIG)
        out_dir = tmp_path / "rates"
        assert main(["rates", "--config", str(config), "--output", str(out_dir)]) == 0
        for name in ("admm.dat", "adlpmm.dat", "L2.dat"):
            lines = (out_dir / name).read_text().splitlines()
            assert len(lines) == 3
            for line in lines:
                sigma, rmse = line.split(" ")
                assert "e" in sigma and "e" in rmse  # %.6e formatting
            sigmas = [float(l.split()[0]) for l in lines]
            assert sigmas == sorted(sigmas)
        summary = (out_dir / "summary.csv").read_text().splitlines()
        assert summary[0] == "method,sigma,alpha_opt,rmse,slope,intercept"
        assert len(summary) == 1 + 9
        slopes = {row.split(",")[0] for row in summary[1:] if row.split(",")[4] != "nan"}
        assert slopes == {"l1_admm", "l1_adlpmm", "l2"}
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["experiment"]["runs"] == 2
        assert manifest["seed"] == 3

    def test_rerun_byte_identical(self, tmp_path):
        config = write_config(tmp_path, RATES_CONFIG)
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        main(["rates", "--config", str(config), "--output", str(out1)])
        main(["rates", "--config", str(config), "--output", str(out2)])
        for name in ("admm.dat", "adlpmm.dat", "L2.dat", "summary.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_manifest_replay(self, tmp_path):
        config = write_config(tmp_path, RATES_CONFIG)
        out1 = tmp_path / "r1"
        main(["rates", "--config", str(config), "--output", str(out1)])
        replay = tmp_path / "r2"
        assert main(["rates", "--config", str(out1 / "manifest.json"), "--output", str(replay)]) == 0
        assert (out1 / "summary.csv").read_bytes() == (replay / "summary.csv").read_bytes()

    def test_bad_experiment_key(self, tmp_path, capsys):
        bad = dict(RATES_CONFIG)
        bad["experiment"] = dict(RATES_CONFIG["experiment"], sigma=[1e-3])
        config = write_config(tmp_path, bad)
        assert main(["rates", "--config", str(config), "--output", str(tmp_path / "o")]) == 2
        assert "sigma" in capsys.readouterr().err


class TestMomentsCommand:
    def test_reference_case_passes(self, capsys):
        code = main([
            "moments", "--sigma", "1", "--lambda", "1", "--r", "1",
            "--n", "100", "--trials", "10000", "--seed", "1",
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert out.count("pass") == 2
        assert "FAIL" not in out

    def test_zero_threshold_bounds(self, capsys):
        code = main([
            "moments", "--sigma", "1", "--lambda", "0", "--r", "2",
            "--n", "50", "--trials", "200", "--seed", "2",
        ])
        assert code == 0
        out = capsys.readouterr().out.splitlines()
        eps_row = next(l for l in out if l.startswith("mean_eps"))
        eta_row = next(l for l in out if l.startswith("mean_eta_r"))
        assert float(eps_row.split()[2]) == 0.0  # bound column
        assert float(eta_row.split()[2]) == pytest.approx(1.0)

    def test_missing_flag_exits_2(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["moments", "--sigma", "1"])
        assert excinfo.value.code == 2

    def test_invalid_sigma(self, capsys):
        code = main([
            "moments", "--sigma", "-1", "--lambda", "1", "--r", "1",
            "--n", "10", "--trials", "10",
        ])
        assert code == 2


class TestExponentsCommand:
    def test_test_problem_values(self, capsys):
        code = main(["exponents", "--a", "2", "--s", "1.5", "--d", "1", "--k", "2", "--p", "2"])
        assert code == 0
        out = capsys.readouterr().out
        assert "norm_rate = 0.375" in out
        assert "a_smoothing_consistent = true" in out

    def test_s_equal_one(self, capsys):
        code = main(["exponents", "--a", "2", "--s", "1", "--d", "1", "--k", "2", "--p", "2"])
        assert code == 0
        out = capsys.readouterr().out
        assert "theta = 1.33333333333" in out
        assert "norm_rate = 0.285714285714" in out

    def test_invalid_smoothness_exits_2(self, capsys):
        code = main(["exponents", "--a", "1", "--s", "2", "--d", "1", "--k", "2", "--p", "2"])
        assert code == 2
