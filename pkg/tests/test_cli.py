import json
import warnings

import pytest

from trisim.cli import main


@pytest.fixture()
def sim_config(tmp_path):
    config = {
        "initial_wealth": 1.0,
        "horizon": 10,
        "stock_share_start": 0.6,
        "stock_share_end": 0.6,
        "domestic_share": 0.5,
        "cashflow": {"amount": 0.04, "sign": "withdraw", "growth_rate": 0.04, "frequency": 1},
        "n_paths": 400,
        "master_seed": 5,
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    return path


def run_cli(args):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        return main([str(a) for a in args])


class TestDerive:
    def test_writes_series(self, data_dir, tmp_path, capsys):
        code = run_cli(["derive", "--manifest", data_dir / "manifest.json", "--outdir", tmp_path / "out"])
        assert code == 0
        written = {p.name for p in (tmp_path / "out").glob("*.csv")}
        assert {"domestic.csv", "intl.csv", "bond.csv", "volatility.csv", "spread.csv"} <= written

    def test_missing_manifest_is_io_error(self, tmp_path):
        code = run_cli(["derive", "--manifest", tmp_path / "nope.json", "--outdir", tmp_path])
        assert code == 2


class TestFit:
    def test_fit_writes_model(self, data_dir, tmp_path, capsys):
        out = tmp_path / "model.json"
        code = run_cli(["fit", "--manifest", data_dir / "manifest.json", "--out", out])
        assert code == 0
        assert "gate passed" in capsys.readouterr().out
        data = json.loads(out.read_text())
        assert data["version"] == "1"

    def test_fit_matches_committed_model(self, data_dir, tmp_path, model_path):
        out = tmp_path / "model.json"
        assert run_cli(["fit", "--manifest", data_dir / "manifest.json", "--out", out]) == 0
        assert out.read_bytes() == model_path.read_bytes()


class TestCriticalValues:
    def test_prints_table(self, capsys):
        code = run_cli(["critical-values", "--n", 20, "--level", 0.95, "--reps", 10000, "--seed", 3])
        assert code == 0
        out = capsys.readouterr().out
        assert "skew" in out and "20" in out

    def test_bad_reps_is_validation_error(self, capsys):
        code = run_cli(["critical-values", "--n", 20, "--level", 0.95, "--reps", 100, "--seed", 3])
        assert code == 1
        assert "error" in capsys.readouterr().err


class TestSimulate:
    def test_round_trip_and_determinism(self, model_path, sim_config, tmp_path, capsys):
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        assert run_cli(["simulate", "--model", model_path, "--config", sim_config, "--out", out1]) == 0
        assert run_cli(["simulate", "--model", model_path, "--config", sim_config, "--out", out2]) == 0
        assert out1.read_bytes() == out2.read_bytes()
        result = json.loads(out1.read_text())
        assert set(result["percentile_paths"]) == {"10", "30", "50", "70", "90"}
        assert len(result["percentile_paths"]["50"]["wealth"]) == 11
        assert result["config"]["master_seed"] == 5

    def test_seed_override_changes_output(self, model_path, sim_config, tmp_path):
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        run_cli(["simulate", "--model", model_path, "--config", sim_config, "--out", out1])
        run_cli(["simulate", "--model", model_path, "--config", sim_config, "--seed", 6, "--out", out2])
        assert out1.read_bytes() != out2.read_bytes()

    def test_invalid_horizon_names_field(self, model_path, sim_config, tmp_path, capsys):
        config = json.loads(sim_config.read_text())
        config["horizon"] = 51
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(config))
        code = run_cli(["simulate", "--model", model_path, "--config", bad, "--out", tmp_path / "x.json"])
        assert code == 1
        assert "horizon" in capsys.readouterr().err

    def test_worker_count_does_not_change_bytes(self, model_path, sim_config, tmp_path):
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        run_cli(["simulate", "--model", model_path, "--config", sim_config, "--out", out1, "--workers", 1])
        run_cli(["simulate", "--model", model_path, "--config", sim_config, "--out", out2, "--workers", 4])
        assert out1.read_bytes() == out2.read_bytes()


class TestDiagnose:
    def test_report_lists_all_series(self, model_path, tmp_path, capsys):
        csv_out = tmp_path / "report.csv"
        code = run_cli(["diagnose", "--model", model_path, "--csv", csv_out])
        assert code == 0
        out = capsys.readouterr().out
        for name in ("vol", "spread", "rate", "growth", "domestic", "intl", "bond"):
            assert name in out
        assert "valuation_ar" in out  # correlation block includes the reporting-only series
        header = csv_out.read_text().splitlines()[0]
        assert header.startswith("series,n,stdev,skew,kurt")


class TestResidualExports:
    def test_matrix_csvs_written(self, model_path, tmp_path):
        raw = tmp_path / "residuals.csv"
        filled = tmp_path / "filled.csv"
        code = run_cli(
            ["diagnose", "--model", model_path, "--residuals-csv", raw, "--filled-csv", filled]
        )
        assert code == 0
        import numpy as np

        from trisim.noise import read_matrix_csv

        raw_matrix = read_matrix_csv(raw)
        filled_matrix = read_matrix_csv(filled)
        assert raw_matrix.start_year == 1928
        assert np.isnan(raw_matrix.column("intl")[:42]).all()
        assert filled_matrix.is_complete
        # lines with missing entries carry empty cells, not NaN text
        first_row = raw.read_text().splitlines()[1]
        assert first_row.split(",")[1] == ""  # vol residual starts one year late

    def test_matrix_csv_round_trip(self, model_path, tmp_path):
        from trisim.econometrics import ModelSpec
        from trisim.noise import read_matrix_csv, write_matrix_csv
        import numpy as np

        model = ModelSpec.load(model_path)
        path = tmp_path / "m.csv"
        write_matrix_csv(model.filled_residuals, path)
        back = read_matrix_csv(path)
        assert np.array_equal(back.values, model.filled_residuals.values)
