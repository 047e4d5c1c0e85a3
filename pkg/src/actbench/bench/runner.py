"""Benchmark orchestration: the model matrix over every configured dataset."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from rich.console import Console
from rich.panel import Panel
from rich.rule import Rule
from rich.table import Table
from rich.text import Text

from actbench import __version__
from actbench.config import DatasetSource, RunConfig, SplitSpec
from actbench.data import Dataset, load_canonical
from actbench.errors import ActbenchError, ConfigurationError
from actbench.evaluate import (
    BenchmarkReport,
    GridPoint,
    RowResult,
    Scores,
    format_seconds,
    grid_search,
    measure_time,
    repeated_runs,
    write_reports,
)
from actbench.evaluate.report import GridEntry, RepeatStats, trace_csv
from actbench.ingest import generate_synthetic, load_aras, load_casas, load_synth_config, split_by_days
from actbench.models import RnnTrace, count_parameters

from .families import ModelSpec, fit_model, predict, resolve_models, score, search_grid
from .manifest import RunManifest

logger = logging.getLogger("actbench")


def load_source(source: DatasetSource, workers: int | None = None) -> Dataset:
    """Read one configured corpus."""
    if source.format == "canonical":
        return load_canonical(source.path)
    if source.format == "casas":
        return load_casas(source.path, workers=workers)
    if source.format == "aras":
        return load_aras(source.path, house=source.house, workers=workers)
    if source.format == "synth":
        return generate_synthetic(load_synth_config(source.path), name=source.name)
    raise ConfigurationError(f"unknown dataset format {source.format!r}")


@dataclass
class Splits:
    name: str
    train: Dataset
    val: Dataset
    test: Dataset


@dataclass
class BenchmarkRun:
    """A finished benchmark and the files it wrote."""

    report: BenchmarkReport
    files: list[Path] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.report.failed


# -----------------------------------------------------------------------------
# One row
# -----------------------------------------------------------------------------


def _select(
    spec: ModelSpec, splits: Splits, config: RunConfig, console: Console, label: str
) -> tuple[GridPoint, list[GridEntry]]:
    """Hyper-parameters of a row, chosen by validation accuracy_all."""
    if spec.family in ("crf", "fcrf"):
        return GridPoint(), []
    grid = search_grid(spec, config.selection)
    if len(splits.val) == 0:
        if spec.family == "rnn":
            raise ConfigurationError(f"{spec.name} needs validation days for early stopping")
        point = GridPoint(alpha=max(grid.alphas))
        logger.info("%s: no validation days, using alpha=%g", label, point.alpha)
        return point, []

    def evaluate(point: GridPoint) -> float:
        fitted = fit_model(
            spec, splits.train, splits.val, point, config.selection, seed=config.seed
        )
        return score(fitted.params, splits.val).all

    result = grid_search(
        evaluate,
        grid,
        workers=config.workers,
        max_expansions=config.selection.max_expansions,
        label=label,
    )
    entries = [GridEntry(params=r.point.as_dict(), score=r.score, error=r.error) for r in result.results]
    console.print(
        f"[dim]  selected {result.best.as_dict()} from {len(entries)} grid points "
        f"(val accuracy {100.0 * result.best_score:.2f}%)[/dim]"
    )
    return result.best, entries


def run_row(
    spec: ModelSpec, splits: Splits, config: RunConfig, console: Console
) -> tuple[RowResult, RnnTrace | None]:
    """Select, train, time and score one (model, dataset) cell group."""
    dataset = splits.name
    label = f"{spec.name}/{dataset}"
    point, entries = _select(spec, splits, config, console, label)

    repeats: RepeatStats | None = None
    scores: Scores | None = None
    if spec.repeated:

        def one_run(seed: int) -> Scores:
            fitted = fit_model(spec, splits.train, splits.val, point, config.selection, seed=seed)
            return score(fitted.params, splits.test)

        summary = repeated_runs(
            one_run, config.repeats, seed=config.seed, workers=config.workers, label=label
        )
        scores = summary.mean
        repeats = RepeatStats(
            runs=summary.runs,
            excluded=summary.excluded,
            std_residents=list(summary.std.residents),
            std_all=summary.std.all,
            errors=summary.errors,
        )

    def timed_run():
        fitted = fit_model(
            spec,
            splits.train,
            splits.val,
            point,
            config.selection,
            seed=config.seed,
            workers=config.workers,
        )
        return fitted, predict(fitted.params, splits.test)

    seconds, (fitted, predictions) = measure_time(timed_run)
    if scores is None:
        scores = predictions.scores()

    row = RowResult(
        model=spec.name,
        dataset=dataset,
        encoding=spec.encoding,
        accuracy_residents=list(scores.residents),
        accuracy_all=scores.all,
        selected=point.as_dict(),
        grid=entries,
        repeats=repeats,
        seconds=seconds,
        parameters=count_parameters(fitted.params),
    )
    return row, fitted.trace


def _row_line(row: RowResult) -> str:
    line = f"{row.model:<10} {100.0 * (row.accuracy_all or 0.0):6.2f}%  {format_seconds(row.seconds or 0.0)}"
    if row.repeats is not None:
        line += f"  ({row.repeats.runs} runs, std {100.0 * row.repeats.std_all:.2f})"
        if row.repeats.excluded:
            line += f" [yellow]{row.repeats.excluded} excluded[/yellow]"
    return line


# -----------------------------------------------------------------------------
# Whole benchmark
# -----------------------------------------------------------------------------


def _display_dataset(console: Console, source: DatasetSource, splits: Splits) -> None:
    console.print(Rule(Text(f"Dataset {source.name}", style="bold cyan")))
    info = Table(show_header=False, box=None)
    info.add_row("Format", Text(source.format, style="bold"))
    info.add_row("Residents", Text(str(splits.train.label_space.residents), style="bold"))
    info.add_row("Activities", Text(str(list(splits.train.label_space.sizes)), style="bold"))
    info.add_row("Sensor states", Text(str(splits.train.codec.size), style="bold"))
    info.add_row(
        "Days",
        Text(f"{len(splits.train)} train / {len(splits.val)} val / {len(splits.test)} test"),
    )
    console.print(Panel(info, title="Context", expand=False))


def _write_outputs(
    run: BenchmarkRun, traces: dict[tuple[str, str], RnnTrace], config: RunConfig
) -> None:
    out = config.out
    run.files += write_reports(run.report, out)
    for (model, dataset), trace in traces.items():
        path = out / "traces" / f"{model}__{dataset}.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(trace_csv(trace.rows()), encoding="utf-8", newline="\n")
        run.files.append(path)
    manifest = RunManifest.for_run(config)
    manifest.failed_rows = [f"{r.model}/{r.dataset}" for r in run.report.failed]
    run.files.append(manifest.save(out))


def run_benchmark(config: RunConfig, console: Console | None = None) -> BenchmarkRun:
    """Run every selected model row on every dataset and write the reports.

    A row that raises an :class:`ActbenchError` is marked ``failed``; the other rows
    still complete. Configuration and data errors abort the run.
    """
    console = console or Console()
    config.validate()
    specs = resolve_models(config.models)
    report = BenchmarkReport(
        version=__version__,
        models=[spec.name for spec in specs],
        datasets=[d.name for d in config.datasets],
        residents={},
    )
    traces: dict[tuple[str, str], RnnTrace] = {}

    for source in config.datasets:
        data = load_source(source, workers=config.workers)
        train, val, test = split_by_days(data, source.split or SplitSpec.trailing(len(data)))
        splits = Splits(source.name, train, val, test)
        report.residents[source.name] = data.label_space.residents
        _display_dataset(console, source, splits)

        for spec in specs:
            console.print(f"[bold]{spec.name}[/bold] [dim]({spec.family}, {spec.encoding})[/dim]")
            try:
                row, trace = run_row(spec, splits, config, console)
            except ActbenchError as e:
                logger.warning("%s on %s failed: %s", spec.name, source.name, e)
                console.print(f"[red]✗ {spec.name} failed: {e}[/red]")
                report.rows.append(
                    RowResult(
                        model=spec.name,
                        dataset=source.name,
                        encoding=spec.encoding,
                        status="failed",
                        error=str(e),
                    )
                )
                continue
            console.print(f"[green]✓ {_row_line(row)}[/green]")
            report.rows.append(row)
            if trace is not None:
                traces[(spec.name, source.name)] = trace

    report.comparisons = report.compare_encodings()
    run = BenchmarkRun(report)
    _write_outputs(run, traces, config)
    return run
