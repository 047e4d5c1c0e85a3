"""Benchmark report model and its text, CSV and JSON renderings."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field, computed_field
from rich import box
from rich.console import Console
from rich.table import Table

from .timing import format_seconds

Encoding = Literal["combined", "separate"]


def _higher(combined: float | None, separate: float | None) -> str:
    if combined is None or separate is None:
        return "-"
    if combined > separate:
        return "combined"
    if separate > combined:
        return "separate"
    return "tie"


class GridEntry(BaseModel):
    params: dict[str, float]
    score: float | None
    error: str | None = None


class RepeatStats(BaseModel):
    runs: int
    excluded: int = 0
    std_residents: list[float] = Field(default_factory=list)
    std_all: float = 0.0
    errors: list[str] = Field(default_factory=list)


class RowResult(BaseModel):
    """One (model, dataset) cell group of the accuracy table."""

    model: str
    dataset: str
    encoding: Encoding
    status: Literal["ok", "failed"] = "ok"
    accuracy_residents: list[float] = Field(default_factory=list)
    accuracy_all: float | None = None
    selected: dict[str, float] = Field(default_factory=dict)
    grid: list[GridEntry] = Field(default_factory=list)
    repeats: RepeatStats | None = None
    seconds: float | None = None
    parameters: int | None = None
    error: str | None = None

    def cells(self) -> list[float]:
        if self.status != "ok" or self.accuracy_all is None:
            return []
        return [*self.accuracy_residents, self.accuracy_all]


class GroupComparison(BaseModel):
    """Mean accuracy of the combined-label rows against the separate-label rows."""

    dataset: str
    columns: list[str]
    combined: list[float | None]
    separate: list[float | None]
    combined_models: list[str]
    separate_models: list[str]

    @computed_field
    @property
    def direction(self) -> str:
        """Group with the higher All accuracy."""
        return _higher(self.combined[-1], self.separate[-1])


class BenchmarkReport(BaseModel):
    """Accuracy, timing and selection results of one benchmark run."""

    version: str
    models: list[str]
    datasets: list[str]
    residents: dict[str, int]
    rows: list[RowResult] = Field(default_factory=list)
    comparisons: list[GroupComparison] = Field(default_factory=list)

    @property
    def failed(self) -> list[RowResult]:
        return [r for r in self.rows if r.status == "failed"]

    def row(self, model: str, dataset: str) -> RowResult | None:
        return next((r for r in self.rows if r.model == model and r.dataset == dataset), None)

    def average(self, model: str) -> float | None:
        """Mean of every per-resident and All cell of ``model`` across datasets."""
        cells = [v for r in self.rows if r.model == model for v in r.cells()]
        return float(np.mean(cells)) if cells else None

    def compare_encodings(self) -> list[GroupComparison]:
        out = []
        for dataset in self.datasets:
            M = self.residents[dataset]
            columns = [f"R{m + 1}" for m in range(M)] + ["All"]
            groups: dict[str, list[RowResult]] = {"combined": [], "separate": []}
            for r in self.rows:
                if r.dataset == dataset and r.cells():
                    groups[r.encoding].append(r)

            def means(rows: list[RowResult]) -> list[float | None]:
                if not rows:
                    return [None] * len(columns)
                return [float(v) for v in np.mean([r.cells() for r in rows], axis=0)]

            out.append(
                GroupComparison(
                    dataset=dataset,
                    columns=columns,
                    combined=means(groups["combined"]),
                    separate=means(groups["separate"]),
                    combined_models=[r.model for r in groups["combined"]],
                    separate_models=[r.model for r in groups["separate"]],
                )
            )
        return out


# ---------------------------------------------------------------------------
# Renderers
# ---------------------------------------------------------------------------


def _pct(value: float | None) -> str:
    return "-" if value is None else f"{100.0 * value:.2f}"


def _render(*tables: Table) -> str:
    console = Console(file=io.StringIO(), width=240, color_system=None, force_terminal=False)
    for table in tables:
        console.print(table)
        console.print()
    return console.file.getvalue()


def accuracy_table(report: BenchmarkReport) -> Table:
    table = Table(title="Prediction accuracy (%)", box=box.ASCII, title_justify="left")
    table.add_column("Model")
    for dataset in report.datasets:
        for m in range(report.residents[dataset]):
            table.add_column(f"{dataset} R{m + 1}", justify="right")
        table.add_column(f"{dataset} All", justify="right")
    table.add_column("Average", justify="right")
    for model in report.models:
        cells = [model]
        for dataset in report.datasets:
            row = report.row(model, dataset)
            width = report.residents[dataset] + 1
            if row is None:
                cells += ["-"] * width
            elif row.status == "failed":
                cells += ["failed"] * width
            else:
                cells += [_pct(v) for v in row.cells()]
        cells.append(_pct(report.average(model)))
        table.add_row(*cells)
    return table


def timing_table(report: BenchmarkReport) -> Table:
    table = Table(title="Train + predict time", box=box.ASCII, title_justify="left")
    table.add_column("Model")
    for dataset in report.datasets:
        table.add_column(dataset, justify="right")
    for model in report.models:
        cells = [model]
        for dataset in report.datasets:
            row = report.row(model, dataset)
            cells.append(format_seconds(row.seconds) if row and row.seconds is not None else "-")
        table.add_row(*cells)
    return table


def comparison_table(report: BenchmarkReport) -> Table:
    table = Table(
        title="Combined labels vs separate labels (mean accuracy %)",
        box=box.ASCII,
        title_justify="left",
    )
    for name in ("Dataset", "Column", "Combined", "Separate", "Higher"):
        table.add_column(name, justify="left" if name in ("Dataset", "Column") else "right")
    for comp in report.comparisons:
        for i, column in enumerate(comp.columns):
            c, s = comp.combined[i], comp.separate[i]
            table.add_row(comp.dataset if i == 0 else "", column, _pct(c), _pct(s), _higher(c, s))
    return table


def render_text_report(report: BenchmarkReport) -> str:
    text = _render(accuracy_table(report), timing_table(report), comparison_table(report))
    failed = report.failed
    if failed:
        text += "Failed rows:\n"
        text += "".join(f"  {r.model} on {r.dataset}: {r.error}\n" for r in failed)
    return text


def _csv(rows: list[list[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(rows)
    return buffer.getvalue()


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.6f}"


def accuracy_csv(report: BenchmarkReport) -> str:
    """model, dataset, R1..RM, All, status; one line per (model, dataset)."""
    M = max(report.residents.values(), default=0)
    rows = [["model", "dataset", *(f"R{m + 1}" for m in range(M)), "All", "status"]]
    for model in report.models:
        for dataset in report.datasets:
            row = report.row(model, dataset)
            if row is None:
                continue
            residents = list(row.accuracy_residents) if row.status == "ok" else []
            residents += [None] * (M - len(residents))
            accuracy = row.accuracy_all if row.status == "ok" else None
            rows.append([model, dataset, *map(_fmt, residents), _fmt(accuracy), row.status])
    return _csv(rows)


def timing_csv(report: BenchmarkReport) -> str:
    rows = [["model", "dataset", "seconds", "formatted", "parameters"]]
    for model in report.models:
        for dataset in report.datasets:
            row = report.row(model, dataset)
            if row is None:
                continue
            seconds = row.seconds
            rows.append(
                [
                    model,
                    dataset,
                    _fmt(seconds),
                    format_seconds(seconds) if seconds is not None else "",
                    "" if row.parameters is None else str(row.parameters),
                ]
            )
    return _csv(rows)


def trace_csv(rows: list[tuple[int, float, float]]) -> str:
    return _csv(
        [["epoch", "train_loss", "val_accuracy_all"]]
        + [[str(e), f"{loss:.8f}", f"{acc:.6f}"] for e, loss, acc in rows]
    )


def write_reports(report: BenchmarkReport, out_dir: Path) -> list[Path]:
    """Write report.txt, report.csv, timing.csv and summary.json into ``out_dir``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {
        "report.txt": render_text_report(report),
        "report.csv": accuracy_csv(report),
        "timing.csv": timing_csv(report),
        "summary.json": report.model_dump_json(indent=2) + "\n",
    }
    written = []
    for name, text in files.items():
        path = out_dir / name
        path.write_text(text, encoding="utf-8", newline="\n")
        written.append(path)
    return written
