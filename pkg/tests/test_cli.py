from __future__ import annotations

import numpy as np
import pytest
import yaml
from typer.testing import CliRunner

from actbench.cli import app, error_line
from actbench.data import load_canonical
from actbench.errors import DataFormatError
from actbench.models import load_model

runner = CliRunner()


@pytest.fixture
def corpus(tmp_path):
    out = tmp_path / "corpus"
    result = runner.invoke(
        app,
        [
            "synth",
            "--out",
            str(out),
            "--sizes",
            "2,2",
            "--symbols",
            "4",
            "--steps",
            "60",
            "--days",
            "5",
            "--seed",
            "1",
        ],
    )
    assert result.exit_code == 0, result.output
    return out


class TestCli:
    def test_version(self):
        result = runner.invoke(app, ["--version"])
        assert result.exit_code == 0
        assert result.output.startswith("actbench")

    def test_error_line_is_single_line(self):
        line = error_line(DataFormatError('bad "token"\nhere', "a.txt", 3))
        assert line == 'error kind=DataFormatError message="a.txt:3: bad \\"token\\" here"'

    def test_ingest_aras(self, tmp_path):
        house = tmp_path / "HouseA"
        house.mkdir()
        for day in (1, 2, 10):
            row = " ".join(["0"] * 19 + ["1", "2", str(day % 27 + 1)])
            (house / f"DAY_{day}.txt").write_text("\n".join([row] * 4) + "\n")
        out = tmp_path / "canonical"
        result = runner.invoke(
            app, ["ingest", "--format", "aras", "--in", str(house), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        data = load_canonical(out)
        assert [inst.day_id for inst in data] == ["DAY_1", "DAY_2", "DAY_10"]
        assert data.label_space.sizes == (27, 27)
        np.testing.assert_array_equal(data.instances[2].labels[0], [1, 10])

    def test_ingest_reports_bad_line(self, tmp_path):
        house = tmp_path / "HouseB"
        house.mkdir()
        (house / "DAY_1.txt").write_text("0 1 2\n")
        result = runner.invoke(
            app, ["ingest", "--format", "aras", "--in", str(house), "--out", str(tmp_path / "o")]
        )
        assert result.exit_code == 2
        assert "error kind=DataFormatError" in result.output and "DAY_1.txt:1:" in result.output

    def test_synth_writes_canonical_days(self, corpus):
        assert len(list(corpus.glob("*.txt"))) == 5
        assert (corpus / "generator.npz").exists()

    def test_train_then_evaluate(self, corpus, tmp_path):
        model_file = tmp_path / "hmm.npz"
        trained = runner.invoke(
            app, ["train", "--data", str(corpus), "--model", "hmm", "--out", str(model_file)]
        )
        assert trained.exit_code == 0, trained.output
        saved = load_model(model_file)
        assert saved.header["metadata"]["model"] == "HMM"
        assert saved.codec is not None

        evaluated = runner.invoke(
            app, ["evaluate", "--data", str(corpus), "--model-file", str(model_file)]
        )
        assert evaluated.exit_code == 0, evaluated.output
        assert "R1" in evaluated.output and "All" in evaluated.output

    def test_train_rnn(self, corpus, tmp_path):
        model_file = tmp_path / "rnn.npz"
        result = runner.invoke(
            app,
            [
                "train",
                "--data",
                str(corpus),
                "--model",
                "mrnn",
                "--cell",
                "lstm",
                "--hidden",
                "3",
                "--max-epochs",
                "2",
                "--out",
                str(model_file),
            ],
        )
        assert result.exit_code == 0, result.output
        params = load_model(model_file).params
        assert (params.cell, params.head, params.hidden) == ("lstm", "separate", 3)

    def test_evaluate_rejects_other_label_space(self, corpus, tmp_path):
        other = tmp_path / "other"
        runner.invoke(app, ["synth", "--out", str(other), "--sizes", "3,2", "--days", "4"])
        model_file = tmp_path / "hmm.npz"
        runner.invoke(
            app, ["train", "--data", str(corpus), "--model", "hmm", "--out", str(model_file)]
        )
        result = runner.invoke(
            app, ["evaluate", "--data", str(other), "--model-file", str(model_file)]
        )
        assert result.exit_code == 2
        assert "error kind=ConfigurationError" in result.output

    def test_unknown_model_name(self, corpus, tmp_path):
        result = runner.invoke(
            app,
            ["train", "--data", str(corpus), "--model", "svm", "--out", str(tmp_path / "m.npz")],
        )
        assert result.exit_code == 2
        assert "error kind=ConfigurationError" in result.output


class TestBenchmarkCommand:
    def test_invalid_config(self, tmp_path):
        path = tmp_path / "bench.yaml"
        path.write_text(yaml.safe_dump({"run": {"repeats": 0}}))
        result = runner.invoke(app, ["benchmark", "--config", str(path)])
        assert result.exit_code == 2
        assert "error kind=ConfigurationError" in result.output

    def test_missing_data_path(self, tmp_path):
        result = runner.invoke(app, ["benchmark", "--data", str(tmp_path / "absent")])
        assert result.exit_code == 2
        assert "error kind=ConfigurationError" in result.output

    def test_generator_file_with_any_suffix(self, tmp_path, monkeypatch):
        synth = {"sizes": [3], "symbols": 4, "steps": 40, "days": 6, "seed": 5}
        path = tmp_path / "synth.cfg"
        path.write_text(yaml.safe_dump({"synth": synth}))
        monkeypatch.chdir(tmp_path)
        result = runner.invoke(
            app, ["benchmark", "--data", str(path), "--models", "hmm,fhmm", "--workers", "1"]
        )
        assert result.exit_code == 0, result.output
        out = tmp_path / "runs" / "latest"
        rows = [line.split(",") for line in (out / "report.csv").read_text().splitlines()[1:]]
        assert [row[:2] for row in rows] == [["HMM", "synth"], ["fHMM", "synth"]]
        assert rows[0][2:] == rows[1][2:]

    def test_rerun_is_byte_identical(self, tmp_path, toy_benchmark):
        config = toy_benchmark(["HMM", "fHMM"])
        for out in ("first", "second"):
            result = runner.invoke(
                app, ["benchmark", "--config", str(config), "--out", str(tmp_path / out)]
            )
            assert result.exit_code == 0, result.output
        first = (tmp_path / "first" / "report.csv").read_bytes()
        assert first == (tmp_path / "second" / "report.csv").read_bytes()
        assert first.decode().splitlines()[0] == "model,dataset,R1,R2,All,status"

    def test_failed_row_exits_one(self, tmp_path, toy_benchmark):
        config = toy_benchmark(["HMM", "RNN_tanh"], split=(4, 0, 1))
        result = runner.invoke(app, ["benchmark", "--config", str(config)])
        assert result.exit_code == 1
        assert (tmp_path / "out" / "report.csv").exists()

    def test_models_override(self, tmp_path, toy_benchmark):
        config = toy_benchmark(["HMM", "fHMM"])
        result = runner.invoke(app, ["benchmark", "--config", str(config), "--models", "CRF"])
        assert result.exit_code == 0, result.output
        lines = (tmp_path / "out" / "report.csv").read_text().splitlines()
        assert [line.split(",")[0] for line in lines[1:]] == ["CRF"]
