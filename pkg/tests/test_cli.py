import csv
import json
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from proxycast.cli import main
from proxycast.reports import fan_edges, read_forecast_rows

FAST_FORECAST = [
    "--proxy", "Volume_Brent",
    "--lags", "1-3",
    "--windows", "2",
    "--grid-rounds", "20",
    "--grid-depth", "2",
    "--folds", "2",
]


def run_cli(*argv):
    return main(list(argv))


class TestRank:
    def test_fixture_recovers_planted_proxy(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert run_cli("rank", "--out", str(out)) == 0
        doc = json.loads((out / "ranking.json").read_text())
        assert doc["winner"] == "Volume_Brent"
        with open(out / "ranking.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 6  # header + k rows
        assert len(rows[0]) == 5  # one column per method
        assert rows[1][0] == "Volume_Brent"

    def test_missing_target_file_names_path(self, tmp_path, capsys):
        code = run_cli(
            "rank",
            "--candidates", str(tmp_path / "c.csv"),
            "--target", str(tmp_path / "missing_target.csv"),
            "--out", str(tmp_path / "out"),
        )
        assert code == 2
        assert "missing_target.csv" in capsys.readouterr().err

    def test_offline_with_cold_cache_is_a_data_error(self, tmp_path, capsys):
        target = tmp_path / "t.csv"
        target.write_text("year,value\n2011,1\n2012,2\n")
        code = run_cli(
            "rank",
            "--candidates", "remote",
            "--endpoint", "http://127.0.0.1:9/{instrument}/{start}/{end}",
            "--instruments", "Brent",
            "--target", str(target),
            "--cache-dir", str(tmp_path / "cache"),
            "--offline",
            "--out", str(tmp_path / "out"),
        )
        assert code == 2
        assert "offline" in capsys.readouterr().err


class TestConfigHandling:
    def test_bad_fraction_is_config_error(self, tmp_path, capsys):
        code = run_cli("rank", "--split-fraction", "1.5", "--out", str(tmp_path / "out"))
        assert code == 1
        assert "split_fraction" in capsys.readouterr().err

    def test_no_partial_outputs_on_config_error(self, tmp_path):
        out = tmp_path / "out"
        assert run_cli("rank", "--k", "0", "--out", str(out)) == 1
        assert not out.exists()

    def test_unknown_flag_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run_cli("rank", "--no-such-flag", "1")
        assert exc.value.code == 1

    def test_config_file_round_trip(self, tmp_path):
        cfg = tmp_path / "run.ini"
        cfg.write_text("[selection]\nk = 3\n[run]\nseed = 7\n")
        out = tmp_path / "out"
        assert run_cli("rank", "--config", str(cfg), "--out", str(out)) == 0
        with open(out / "ranking.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 4  # header + 3

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "run.ini"
        cfg.write_text("[selection]\nbogus = 3\n")
        assert run_cli("rank", "--config", str(cfg)) == 1
        assert "bogus" in capsys.readouterr().err


@pytest.fixture(scope="module")
def forecast_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("fc")
    assert main(["forecast", "--out", str(out)] + FAST_FORECAST) == 0
    return out


class TestForecast:
    def test_fifteen_rows_with_verbatim_headers(self, forecast_dir):
        header, rows = read_forecast_rows(forecast_dir)
        assert header == [
            "step",
            "Predicted_Volume_Brent",
            "Adjusted_CI_Lower_95%",
            "Adjusted_CI_Upper_95%",
        ]
        assert len(rows) == 15
        assert [r["step"] for r in rows] == list(range(1, 16))

    def test_metrics_report_is_table_shaped(self, forecast_dir):
        with open(forecast_dir / "metrics.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["split", "RMSE", "MAE", "R^2"]
        assert [r[0] for r in rows[1:]] == ["train", "test"]

    def test_model_document_is_loadable(self, forecast_dir):
        from proxycast.boosting import ensemble_from_dict

        doc = json.loads((forecast_dir / "model.json").read_text())
        model = ensemble_from_dict(doc)
        assert model.n_features == len(doc["feature_names"])
        assert model.feature_spec is not None

    def test_horizon_one_emits_single_row(self, tmp_path):
        out = tmp_path / "h1"
        assert main(["forecast", "--out", str(out), "--horizon", "1"] + FAST_FORECAST) == 0
        _, rows = read_forecast_rows(out)
        assert len(rows) == 1

    def test_rerun_is_byte_identical(self, tmp_path, forecast_dir):
        out2 = tmp_path / "again"
        assert main(["forecast", "--out", str(out2)] + FAST_FORECAST) == 0
        for name in ("forecast.csv", "forecast.json", "metrics.csv", "metrics.json",
                     "model.json", "test_predictions.csv"):
            assert (out2 / name).read_bytes() == (forecast_dir / name).read_bytes(), name

    def test_forecast_without_rank_or_proxy_fails(self, tmp_path, capsys):
        code = run_cli("forecast", "--out", str(tmp_path / "none"))
        assert code == 2
        assert "ranking.json" in capsys.readouterr().err


class TestReport:
    def test_chart_is_wellformed_svg(self, tmp_path):
        out = tmp_path / "out"
        assert main(["forecast", "--out", str(out)] + FAST_FORECAST) == 0
        assert run_cli("report", "--out", str(out)) == 0
        chart = out / "forecast_chart.svg"
        assert chart.exists() and chart.stat().st_size > 0
        root = ET.parse(chart).getroot()
        assert root.tag.endswith("svg")

    def test_fan_has_one_vertex_pair_per_step(self, tmp_path):
        out = tmp_path / "out"
        assert main(["forecast", "--out", str(out)] + FAST_FORECAST) == 0
        _, rows = read_forecast_rows(out)
        steps, lowers, uppers = fan_edges(rows)
        assert len(steps) == len(lowers) == len(uppers) == 15

    def test_missing_prior_outputs_named(self, tmp_path, capsys):
        code = run_cli("report", "--out", str(tmp_path / "empty"))
        assert code == 2
        assert "forecast.csv" in capsys.readouterr().err

    def test_empty_test_window_warns_and_exits_zero(self, tmp_path, capsys):
        out = tmp_path / "out"
        out.mkdir()
        (out / "forecast.csv").write_text(
            "step,Predicted_X,Adjusted_CI_Lower_95%,Adjusted_CI_Upper_95%\n"
            "1,10.0,9.0,11.0\n"
        )
        (out / "test_predictions.csv").write_text("date,actual,predicted\n")
        with pytest.warns(UserWarning, match="empty"):
            code = run_cli("report", "--out", str(out))
        assert code == 0
        assert not (out / "forecast_chart.svg").exists()
        assert "omitted" in capsys.readouterr().out


class TestCsvDataPath:
    def test_constant_target_is_a_numeric_failure(self, tmp_path, capsys):
        from proxycast.fixtures import make_synthetic_dataset, write_synthetic_csvs

        dataset = make_synthetic_dataset(seed=1)
        candidates_csv, _ = write_synthetic_csvs(dataset, tmp_path / "data")
        flat = tmp_path / "flat.csv"
        flat.write_text(
            "year,value\n" + "".join(f"{y},50.0\n" for y in range(2011, 2024))
        )
        code = run_cli(
            "rank",
            "--candidates", str(candidates_csv),
            "--target", str(flat),
            "--out", str(tmp_path / "out"),
        )
        assert code == 3
        assert "numeric" in capsys.readouterr().err

    def test_rank_from_written_csvs_matches_fixture(self, tmp_path):
        from proxycast.fixtures import make_synthetic_dataset, write_synthetic_csvs

        dataset = make_synthetic_dataset(seed=42)
        candidates_csv, target_csv = write_synthetic_csvs(dataset, tmp_path / "data")
        out = tmp_path / "out"
        code = run_cli(
            "rank",
            "--candidates", str(candidates_csv),
            "--target", str(target_csv),
            "--out", str(out),
        )
        assert code == 0
        doc = json.loads((out / "ranking.json").read_text())
        assert doc["winner"] == "Volume_Brent"


class TestRun:
    def test_run_chains_all_three(self, tmp_path):
        out = tmp_path / "out"
        code = main(
            ["run", "--out", str(out), "--lags", "1-3", "--windows", "2",
             "--grid-rounds", "20", "--grid-depth", "2", "--folds", "2"]
        )
        assert code == 0
        for name in ("ranking.csv", "ranking.json", "metrics.csv", "model.json",
                     "forecast.csv", "forecast_chart.svg"):
            assert (out / name).exists(), name
