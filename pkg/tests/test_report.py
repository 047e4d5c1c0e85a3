from __future__ import annotations

import csv
import io
import json

import pytest

from actbench.evaluate import (
    BenchmarkReport,
    RowResult,
    format_seconds,
    measure_time,
    write_reports,
)
from actbench.evaluate.report import accuracy_csv, render_text_report, timing_csv, trace_csv


def _row(model, dataset, encoding, residents, joint, seconds=1.5, status="ok"):
    return RowResult(
        model=model,
        dataset=dataset,
        encoding=encoding,
        status=status,
        accuracy_residents=residents,
        accuracy_all=joint,
        seconds=seconds,
        parameters=42,
    )


@pytest.fixture
def report() -> BenchmarkReport:
    rows = [
        _row("HMM", "casas", "combined", [0.8, 0.6], 0.5),
        _row("HMM", "aras", "combined", [0.7, 0.9], 0.6),
        _row("fHMM", "casas", "separate", [0.9, 0.7], 0.4),
        RowResult(
            model="fHMM", dataset="aras", encoding="separate", status="failed", error="diverged"
        ),
    ]
    out = BenchmarkReport(
        version="0.1.0",
        models=["HMM", "fHMM"],
        datasets=["casas", "aras"],
        residents={"casas": 2, "aras": 2},
        rows=rows,
    )
    out.comparisons = out.compare_encodings()
    return out


class TestTiming:
    def test_seconds_below_an_hour(self):
        assert format_seconds(3599) == "3599.00 sec"
        assert format_seconds(0.17) == "0.17 sec"

    def test_hours_above_an_hour(self):
        assert format_seconds(3601) == "1.00 hrs"
        assert format_seconds(7200) == "2.00 hrs"

    def test_exactly_one_hour_stays_in_seconds(self):
        assert format_seconds(3600) == "3600.00 sec"

    def test_noop_task(self):
        seconds, result = measure_time(lambda: 7)
        assert result == 7
        assert 0.0 <= seconds < 0.01


class TestBenchmarkReport:
    def test_average_covers_every_cell(self, report):
        assert report.average("HMM") == pytest.approx((0.8 + 0.6 + 0.5 + 0.7 + 0.9 + 0.6) / 6)

    def test_failed_rows_do_not_count(self, report):
        assert report.average("fHMM") == pytest.approx((0.9 + 0.7 + 0.4) / 3)
        assert [r.model for r in report.failed] == ["fHMM"]

    def test_compare_encodings(self, report):
        casas, aras = report.comparisons
        assert casas.columns == ["R1", "R2", "All"]
        assert casas.combined == pytest.approx([0.8, 0.6, 0.5])
        assert casas.separate == pytest.approx([0.9, 0.7, 0.4])
        assert casas.direction == "combined"
        assert aras.separate == [None, None, None]
        assert aras.direction == "-"

    def test_accuracy_csv(self, report):
        rows = list(csv.reader(io.StringIO(accuracy_csv(report))))
        assert rows[0] == ["model", "dataset", "R1", "R2", "All", "status"]
        assert rows[1] == ["HMM", "casas", "0.800000", "0.600000", "0.500000", "ok"]
        assert rows[-1] == ["fHMM", "aras", "", "", "", "failed"]
        assert len(rows) == 5

    def test_timing_csv(self, report):
        rows = list(csv.reader(io.StringIO(timing_csv(report))))
        assert rows[0] == ["model", "dataset", "seconds", "formatted", "parameters"]
        assert rows[1] == ["HMM", "casas", "1.500000", "1.50 sec", "42"]
        assert rows[-1][2:] == ["", "", ""]

    def test_trace_csv(self):
        text = trace_csv([(1, 1.25, 0.5), (2, 0.75, 0.625)])
        assert text.splitlines() == [
            "epoch,train_loss,val_accuracy_all",
            "1,1.25000000,0.500000",
            "2,0.75000000,0.625000",
        ]

    def test_text_report(self, report):
        text = render_text_report(report)
        assert "Prediction accuracy (%)" in text
        assert "80.00" in text and "failed" in text
        assert "Train + predict time" in text and "1.50 sec" in text
        assert "fHMM on aras: diverged" in text

    def test_write_reports(self, report, tmp_path):
        paths = write_reports(report, tmp_path / "out")
        assert sorted(p.name for p in paths) == [
            "report.csv",
            "report.txt",
            "summary.json",
            "timing.csv",
        ]
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["datasets"] == ["casas", "aras"]
        assert summary["comparisons"][0]["direction"] == "combined"
        assert BenchmarkReport.model_validate_json(
            (tmp_path / "out" / "summary.json").read_text()
        ).average("HMM") == pytest.approx(report.average("HMM"))
