import json

import pytest

from hawkesflow.cli import main
from hawkesflow.simulate import ExponentialKernel, HawkesModel, save_model


@pytest.fixture()
def model_file(tmp_path):
    model = HawkesModel.linear([1.0], [[ExponentialKernel(0.4, 10.0)]])
    path = tmp_path / "model.json"
    save_model(model, path)
    return path


def run_simulate(tmp_path, model_file, seed=5, horizon=2000.0, name="sim"):
    out = tmp_path / name
    code = main(["simulate", "--model", str(model_file),
                 "--horizon", str(horizon), "--seed", str(seed),
                 "--out", str(out)])
    assert code == 0
    return out


class TestSimulateCommand:
    def test_writes_events_and_metadata(self, tmp_path, model_file, capsys):
        out = run_simulate(tmp_path, model_file)
        assert (out / "events.csv").exists()
        meta = json.loads((out / "metadata.json").read_text())
        assert meta["seed"] == 5
        assert meta["dimension"] == 1
        assert meta["model_dimension"] == 1
        assert meta["events"] > 1000
        assert "defaults" not in capsys.readouterr().err

    def test_same_seed_reproduces_files(self, tmp_path, model_file):
        a = run_simulate(tmp_path, model_file, name="a")
        b = run_simulate(tmp_path, model_file, name="b")
        assert (a / "events.csv").read_bytes() == (b / "events.csv").read_bytes()

    def test_different_seed_changes_files(self, tmp_path, model_file):
        a = run_simulate(tmp_path, model_file, seed=5, name="a")
        b = run_simulate(tmp_path, model_file, seed=6, name="b")
        assert (a / "events.csv").read_bytes() != (b / "events.csv").read_bytes()

    def test_missing_model_file_exits_2(self, tmp_path, capsys):
        code = main(["simulate", "--model", str(tmp_path / "nope.json"),
                     "--horizon", "10", "--out", str(tmp_path / "o")])
        assert code == 2
        assert "error" in capsys.readouterr().err


class TestEstimateCommand:
    def test_end_to_end_on_simulated_data(self, tmp_path, model_file):
        sim = run_simulate(tmp_path, model_file, horizon=5000.0)
        out = tmp_path / "est"
        code = main(["estimate", "--input", str(sim / "events.csv"),
                     "--dimension", "1", "--out", str(out),
                     "--h-max", "2.0", "--n-log", "100"])
        assert code == 0
        baseline = (out / "kernel" / "baseline.csv").read_text().splitlines()
        assert len(baseline) == 1 + 1
        assert (out / "claw" / "claw_manifest.json").exists()
        config = json.loads((out / "config.json").read_text())
        assert config["h_max"] == 2.0
        # paper defaults survive where flags were omitted
        assert config["x_max"] == 0.5
        assert config["n_lin"] == 50

    def test_dimension_mismatch_is_input_error(self, tmp_path, model_file):
        sim = run_simulate(tmp_path, model_file)
        bad_scheme = tmp_path / "scheme.json"
        bad_scheme.write_text('{"mode": "unsigned_trades", "edges": [1, 2]}\n')
        # volume-1 events fit scheme, but config asks for a window beyond
        # the session: input error -> exit 2
        code = main(["estimate", "--input", str(sim / "events.csv"),
                     "--scheme", str(bad_scheme), "--out", str(tmp_path / "x"),
                     "--window-start", "0", "--window-end", "99999999",
                     "--h-max", "2.0", "--n-log", "50"])
        assert code == 2

    def test_config_file_roundtrip(self, tmp_path, model_file):
        sim = run_simulate(tmp_path, model_file, horizon=3000.0)
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"h_max": 2.0, "n_log": 80, "seed": 3}))
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        for out in (out1, out2):
            code = main(["estimate", "--input", str(sim / "events.csv"),
                         "--dimension", "1", "--config", str(cfg),
                         "--out", str(out)])
            assert code == 0
        for rel in (("kernel", "norms.csv"), ("claw", "claw_0_0.csv")):
            assert (out1 / rel[0] / rel[1]).read_bytes() \
                == (out2 / rel[0] / rel[1]).read_bytes()

    def test_unknown_config_key_rejected(self, tmp_path, model_file):
        sim = run_simulate(tmp_path, model_file)
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"h_mx": 2.0}))
        code = main(["estimate", "--input", str(sim / "events.csv"),
                     "--dimension", "1", "--config", str(cfg),
                     "--out", str(tmp_path / "x")])
        assert code == 2


class TestReportCommand:
    def test_emits_bundle_with_manifest(self, tmp_path, model_file):
        sim = run_simulate(tmp_path, model_file, horizon=3000.0)
        out = tmp_path / "rep"
        code = main(["report", "--input", str(sim / "events.csv"),
                     "--dimension", "1", "--out", str(out),
                     "--h-max", "2.0", "--n-log", "80"])
        assert code == 0
        manifest = json.loads((out / "report_manifest.json").read_text())
        names = {e["file"] for e in manifest["files"]}
        assert "norms.csv" in names
        assert "component_summary.csv" in names
        assert "duration_histogram.csv" in names


class TestRobustnessCommand:
    def test_zero_jitter_identity(self, tmp_path, model_file, capsys):
        sim = run_simulate(tmp_path, model_file, horizon=5000.0)
        out = tmp_path / "rob"
        code = main(["robustness", "--input", str(sim / "events.csv"),
                     "--dimension", "1", "--out", str(out),
                     "--round-us", "1", "--jitter-us", "0",
                     "--h-max", "2.0", "--n-log", "100"])
        assert code == 0
        text = (out / "rescaled_norm_reldiff_randomized.csv").read_text()
        # 1 us rounding of integer-microsecond data is the identity
        row = text.splitlines()[1].split(",")
        assert abs(float(row[1])) < 1e-9

    def test_window_comparison_emitted(self, tmp_path, model_file):
        sim = run_simulate(tmp_path, model_file, horizon=5000.0)
        out = tmp_path / "rob2"
        code = main(["robustness", "--input", str(sim / "events.csv"),
                     "--dimension", "1", "--out", str(out),
                     "--compare-window", "500", "4500",
                     "--h-max", "2.0", "--n-log", "100"])
        assert code == 0
        assert (out / "rescaled_norm_reldiff_windowed.csv").exists()

    def test_full_window_gives_exact_zeros(self, tmp_path, model_file):
        sim = run_simulate(tmp_path, model_file, horizon=5000.0)
        out = tmp_path / "rob3"
        code = main(["robustness", "--input", str(sim / "events.csv"),
                     "--dimension", "1", "--out", str(out),
                     "--round-us", "1", "--jitter-us", "0",
                     "--compare-window", "0", "5000",
                     "--h-max", "2.0", "--n-log", "100"])
        assert code == 0
        text = (out / "rescaled_norm_reldiff_windowed.csv").read_text()
        row = text.splitlines()[1].split(",")
        assert float(row[1]) == 0.0


class TestUsageErrors:
    def test_no_command_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_estimate_requires_scheme_or_dimension(self, tmp_path, model_file):
        sim = run_simulate(tmp_path, model_file)
        code = main(["estimate", "--input", str(sim / "events.csv"),
                     "--out", str(tmp_path / "x")])
        assert code == 2


class TestRoundtripCommand:
    def test_single_criterion_passes(self, capsys):
        code = main(["roundtrip", "--criteria", "1"])
        assert code == 0
        out = capsys.readouterr().out
        assert "criterion 1 [PASS]" in out

    def test_tightened_tolerance_fails_with_exit_1(self, capsys):
        code = main(["roundtrip", "--criteria", "1",
                     "--tolerance-scale", "1e-9"])
        assert code == 1
        assert "criterion 1 [FAIL]" in capsys.readouterr().out


class TestDimensionGuard:
    def test_sidecar_dimension_mismatch_is_error(self, tmp_path, model_file):
        sim = run_simulate(tmp_path, model_file)
        code = main(["estimate", "--input", str(sim / "events.csv"),
                     "--dimension", "3", "--out", str(tmp_path / "x"),
                     "--h-max", "2.0", "--n-log", "50"])
        assert code == 2

    def test_multi_session_parallel_ingest(self, tmp_path, model_file):
        a = run_simulate(tmp_path, model_file, seed=5, name="a")
        b = run_simulate(tmp_path, model_file, seed=6, name="b")
        out = tmp_path / "est"
        code = main(["estimate",
                     "--input", str(a / "events.csv"), str(b / "events.csv"),
                     "--dimension", "1", "--threads", "4",
                     "--out", str(out), "--h-max", "2.0", "--n-log", "80"])
        assert code == 0
