from __future__ import annotations

import io
import numpy as np
import pytest
from rich.console import Console

from actbench.bench import (
    MANIFEST_FILE,
    MODEL_ROWS,
    RunManifest,
    fit_model,
    predict_instance,
    resolve_models,
    run_benchmark,
    score,
    search_grid,
)
from actbench.config import SelectionConfig, load_run_config
from actbench.errors import ConfigurationError
from actbench.evaluate import GridPoint


def _quiet() -> Console:
    return Console(file=io.StringIO(), width=120)


class TestModelMatrix:
    def test_all_rows_by_default(self):
        assert resolve_models([]) == MODEL_ROWS
        assert len(MODEL_ROWS) == 10

    def test_rnn_group(self):
        names = [spec.name for spec in resolve_models(["rnn"])]
        assert names == ["RNN_tanh", "RNN_gru", "RNN_lstm"]

    def test_case_insensitive_in_matrix_order(self):
        names = [spec.name for spec in resolve_models(["fcrf", "hmm", "MRNN_GRU"])]
        assert names == ["mRNN_gru", "HMM", "fCRF"]

    def test_unknown_model(self):
        with pytest.raises(ConfigurationError):
            resolve_models(["svm"])

    def test_search_grids(self):
        selection = SelectionConfig()
        by_name = {spec.name: spec for spec in MODEL_ROWS}
        assert len(search_grid(by_name["HMM"], selection).points()) == 5
        assert len(search_grid(by_name["mRNN_lstm"], selection).points()) == 45
        assert search_grid(by_name["CRF"], selection).points() == [GridPoint()]

    def test_only_rnns_repeat(self):
        assert [spec.name for spec in MODEL_ROWS if spec.repeated] == [
            "RNN_tanh",
            "mRNN_tanh",
            "RNN_gru",
            "mRNN_gru",
            "RNN_lstm",
            "mRNN_lstm",
        ]


class TestFitModel:
    @pytest.mark.parametrize("name", ["HMM", "fHMM"])
    def test_signature_corpus_decodes_exactly(self, signature_dataset, name):
        data = signature_dataset()
        (spec,) = resolve_models([name])
        fitted = fit_model(spec, data, data.subset([]), GridPoint(alpha=1e-6), SelectionConfig())
        assert fitted.trace is None
        scores = score(fitted.params, data)
        assert scores.all == 1.0 and scores.residents == (1.0, 1.0)

    def test_rnn_returns_trace(self, signature_dataset):
        data = signature_dataset()
        (spec,) = resolve_models(["mRNN_gru"])
        selection = SelectionConfig(rnn_max_epochs=3)
        fitted = fit_model(spec, data, data, GridPoint(hidden=4, learning_rate=0.1), selection)
        assert fitted.trace is not None and len(fitted.trace.epochs) <= 3
        labels = predict_instance(fitted.params, data.instances[0])
        assert labels.shape == data.instances[0].labels.shape

    def test_missing_grid_value(self, signature_dataset):
        data = signature_dataset()
        (spec,) = resolve_models(["HMM"])
        with pytest.raises(ConfigurationError):
            fit_model(spec, data, data, GridPoint(), SelectionConfig())

    def test_unknown_params_type(self, signature_dataset):
        with pytest.raises(TypeError):
            predict_instance(np.zeros(3), signature_dataset().instances[0])


class TestRunBenchmark:
    def test_every_row_completes(self, tmp_path, toy_benchmark):
        models = ["HMM", "fHMM", "CRF", "fCRF", "RNN_tanh", "mRNN_tanh"]
        config = load_run_config(toy_benchmark(models))
        run = run_benchmark(config, _quiet())

        assert run.complete
        assert [r.model for r in run.report.rows] == [
            "RNN_tanh",
            "mRNN_tanh",
            "HMM",
            "fHMM",
            "CRF",
            "fCRF",
        ]
        for row in run.report.rows:
            assert row.status == "ok" and len(row.accuracy_residents) == 2
            assert all(0.0 <= v <= 1.0 for v in row.cells())
            assert row.seconds is not None and row.parameters > 0

        rnn = run.report.row("RNN_tanh", "toy")
        assert rnn.repeats.runs == 2 and rnn.selected == {"hidden": 4, "learning_rate": 0.1}
        assert run.report.row("CRF", "toy").grid == []
        assert len(run.report.row("HMM", "toy").grid) == 2

        (comparison,) = run.report.comparisons
        assert comparison.combined_models == ["RNN_tanh", "HMM", "CRF"]
        assert comparison.separate_models == ["mRNN_tanh", "fHMM", "fCRF"]

        out = config.out
        names = {p.relative_to(out).as_posix() for p in run.files}
        assert {"report.txt", "report.csv", "timing.csv", "summary.json", MANIFEST_FILE} <= names
        assert {"traces/RNN_tanh__toy.csv", "traces/mRNN_tanh__toy.csv"} <= names
        assert all(p.exists() for p in run.files)

        manifest = RunManifest.load(out / MANIFEST_FILE)
        assert manifest.seeds == [0, 1]
        assert manifest.config_digest == config.digest()
        assert manifest.failed_rows == []
        assert any(path.endswith("toy.yaml") for path in manifest.data_files)

    def test_rerun_reproduces_accuracy(self, tmp_path, toy_benchmark):
        first = load_run_config(toy_benchmark(["HMM", "fHMM", "CRF"]))
        second = first.with_overrides(out=tmp_path / "again")
        run_benchmark(first, _quiet())
        run_benchmark(second, _quiet())
        assert (first.out / "report.csv").read_text() == (second.out / "report.csv").read_text()

    def test_row_failure_does_not_stop_the_run(self, tmp_path, toy_benchmark):
        config = load_run_config(toy_benchmark(["HMM", "RNN_tanh"], split=(4, 0, 1)))
        run = run_benchmark(config, _quiet())

        assert not run.complete
        rnn, hmm = run.report.rows
        assert hmm.status == "ok" and hmm.selected == {"alpha": 1e-2}
        assert rnn.status == "failed" and "validation" in rnn.error
        assert RunManifest.load(config.out / MANIFEST_FILE).failed_rows == ["RNN_tanh/toy"]
        assert "RNN_tanh on toy" in (config.out / "report.txt").read_text()

    def test_single_resident_factorial_row_matches_hmm(self, toy_benchmark):
        config = load_run_config(toy_benchmark(["HMM", "fHMM"], sizes=(3,)))
        run = run_benchmark(config, _quiet())
        hmm, fhmm = run.report.rows
        assert run.report.residents == {"toy": 1}
        assert fhmm.cells() == pytest.approx(hmm.cells(), abs=1e-12)
        assert fhmm.selected == hmm.selected

    def test_missing_dataset_aborts(self, tmp_path, toy_benchmark):
        config = load_run_config(toy_benchmark(["HMM"]))
        (tmp_path / "toy.yaml").unlink()
        with pytest.raises(ConfigurationError):
            run_benchmark(config, _quiet())


class TestManifest:
    def test_round_trip(self, tmp_path):
        manifest = RunManifest(
            config_digest="abc",
            config={"seed": 1},
            seeds=[1, 2],
            versions={"python": "3.12"},
            data_files={"a.txt": "00"},
            created="2024-01-01T00:00:00+00:00",
            failed_rows=["HMM/x"],
        )
        assert RunManifest.load(manifest.save(tmp_path)) == manifest

    def test_digest_ignores_output_directory(self, tmp_path, toy_benchmark):
        config = load_run_config(toy_benchmark(["HMM"]))
        assert config.digest() == config.with_overrides(out=tmp_path / "elsewhere").digest()
        assert config.digest() != config.with_overrides(seed=9).digest()
