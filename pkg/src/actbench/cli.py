from __future__ import annotations

import logging
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import replace
from importlib.metadata import PackageNotFoundError as _PkgNotFound
from importlib.metadata import version as _pkg_version
from pathlib import Path

import typer
from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table
from rich.text import Text
from rich.traceback import install as rich_traceback_install

from actbench.bench import (
    fit_model,
    load_source,
    predict,
    resolve_models,
    run_benchmark,
)
from actbench.config import (
    DEFAULT_SPLITS,
    DatasetSource,
    RunConfig,
    SelectionConfig,
    SplitSpec,
    load_run_config,
)
from actbench.data import Dataset, write_canonical
from actbench.errors import ActbenchError, ConfigurationError
from actbench.evaluate import GridPoint, format_seconds, measure_time
from actbench.ingest import generate_synthetic, load_synth_config, random_synth_config, split_by_days
from actbench.models import count_parameters, load_model, save_model
from actbench.parallel import default_workers

load_dotenv()

app = typer.Typer(
    no_args_is_help=True,
    add_completion=False,
    help="Multi-resident activity recognition: ingest, train, evaluate and benchmark",
)
console = Console()
logger = logging.getLogger("actbench")

FORMATS = ("canonical", "casas", "aras", "synth")
PARTS = ("train", "val", "test")


def error_line(err: BaseException) -> str:
    """Single machine-parsable line describing ``err``."""
    message = " ".join(str(err).split()).replace("\\", "\\\\").replace('"', '\\"')
    return f'error kind={type(err).__name__} message="{message}"'


@contextmanager
def _reported_errors() -> Iterator[None]:
    try:
        yield
    except ActbenchError as e:
        logger.debug("command failed", exc_info=True)
        typer.echo(error_line(e), err=True)
        raise typer.Exit(2) from e


def _configure_logging(verbose: bool, debug: bool) -> None:
    level = logging.DEBUG if debug else logging.INFO if verbose else logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )
    rich_traceback_install(show_locals=False)


@app.callback(invoke_without_command=True)
def _root(
    version: bool = typer.Option(
        False,
        "--version",
        "-V",
        help="Show actbench version and exit",
        is_eager=True,
    ),
    verbose: bool = typer.Option(False, "-v", "--verbose", help="Log phase boundaries"),
    debug: bool = typer.Option(False, "--debug", help="Log per-iteration detail"),
) -> None:
    if version:
        try:
            typer.echo(f"actbench {_pkg_version('actbench')}")
        except _PkgNotFound:
            typer.echo("actbench (version unknown)")
        raise typer.Exit()
    _configure_logging(verbose, debug)


# -----------------------------------------------------------------------------
# Shared option handling
# -----------------------------------------------------------------------------


def _choice(value: str, allowed: tuple[str, ...], name: str) -> str:
    if value not in allowed:
        raise ConfigurationError(f"{name} must be one of {', '.join(allowed)}, got {value!r}")
    return value


def _infer_format(path: Path, fmt: str | None) -> str:
    if fmt is not None:
        return _choice(fmt, FORMATS, "format")
    # canonical corpora are directories; a single file can only be a generator config
    return "synth" if path.is_file() else "canonical"


def _source(path: Path, fmt: str | None, split: str | None, house: str) -> DatasetSource:
    if not path.exists():
        raise ConfigurationError(f"dataset path does not exist: {path}")
    data_format = _infer_format(path, fmt)
    spec = SplitSpec.parse(split) if split else DEFAULT_SPLITS.get(data_format)
    return DatasetSource(
        name=path.stem,
        format=data_format,
        path=path,
        split=spec,
        house=_choice(house, ("A", "B"), "house"),
    )


def _parts(source: DatasetSource) -> dict[str, Dataset]:
    data = load_source(source, workers=default_workers())
    train, val, test = split_by_days(data, source.split or SplitSpec.trailing(len(data)))
    return {"train": train, "val": val, "test": test}


def _dataset_panel(data: Dataset, title: str) -> Panel:
    info = Table(show_header=False, box=None)
    info.add_row("Name", Text(data.name, style="bold"))
    info.add_row("Days", Text(str(len(data)), style="bold"))
    info.add_row("Steps", Text(str(data.total_steps), style="bold"))
    info.add_row("Residents", Text(str(data.label_space.residents), style="bold"))
    info.add_row("Activities", Text(str(list(data.label_space.sizes)), style="bold"))
    info.add_row("Sensors", Text(str(data.n_features), style="bold"))
    info.add_row("Sensor states", Text(str(data.codec.size), style="bold"))
    return Panel(info, title=title, expand=False)


# -----------------------------------------------------------------------------
# Commands
# -----------------------------------------------------------------------------


@app.command(help="Convert a CASAS or ARAS corpus into canonical day files")
def ingest(
    fmt: str = typer.Option(..., "--format", help="casas|aras|canonical"),
    input_dir: Path = typer.Option(..., "--in", help="Corpus file or directory"),
    out: Path = typer.Option(..., "--out", help="Output directory for canonical files"),
    house: str = typer.Option("A", help="ARAS house (A|B)", show_default=True),
) -> None:
    with _reported_errors():
        _choice(fmt, ("casas", "aras", "canonical"), "format")
        source = _source(input_dir, fmt, None, house)
        data = load_source(source, workers=default_workers())
        written = write_canonical(data, out)
    console.print(_dataset_panel(data, "Ingested"))
    for note in data.notes:
        console.print(f"[dim]{note}[/dim]")
    console.print(f"[green]✓ Wrote {len(written)} files to {out}[/green]")


@app.command(help="Generate a synthetic multi-resident corpus from a random generator")
def synth(
    out: Path = typer.Option(..., "--out", help="Output directory for canonical files"),
    config: Path | None = typer.Option(None, "--config", help="YAML file with a synth section"),
    sizes: str = typer.Option("3,3", help="Activities per resident, comma separated"),
    symbols: int = typer.Option(8, help="Distinct sensor states"),
    features: int | None = typer.Option(None, help="Binary sensor columns (default: minimal)"),
    steps: int = typer.Option(1000, help="Time steps per day"),
    days: int = typer.Option(26, help="Number of days"),
    noise: float = typer.Option(0.0, help="Probability of a uniformly random sensor state"),
    coupling: float = typer.Option(0.0, help="Weight of the other residents on transitions"),
    seed: int = typer.Option(0, help="Generator seed"),
) -> None:
    with _reported_errors():
        if config is not None:
            cfg = load_synth_config(config)
        else:
            try:
                size_tuple = tuple(int(s) for s in sizes.split(","))
            except ValueError as e:
                raise ConfigurationError(f"sizes must be comma separated integers, got {sizes!r}") from e
            cfg = random_synth_config(
                sizes=size_tuple,
                n_symbols=symbols,
                steps=steps,
                days=days,
                n_features=features,
                noise=noise,
                coupling=coupling,
                seed=seed,
            )
        data = generate_synthetic(cfg, name=out.name)
        written = write_canonical(data, out)
        cfg.save(out / "generator.npz")
    console.print(_dataset_panel(data, "Synthetic corpus"))
    console.print(f"[green]✓ Wrote {len(written)} files and generator.npz to {out}[/green]")


@app.command(help="Train one model on the training days and save it")
def train(
    data: Path = typer.Option(..., "--data", help="Canonical directory or corpus path"),
    model: str = typer.Option(..., "--model", help="hmm|fhmm|crf|fcrf|rnn|mrnn"),
    out: Path = typer.Option(..., "--out", help="Model file (.npz)"),
    fmt: str | None = typer.Option(None, "--format", help="canonical|casas|aras|synth"),
    house: str = typer.Option("A", help="ARAS house (A|B)"),
    split: str | None = typer.Option(None, help="train,val,test days (default: last two days held out)"),
    cell: str = typer.Option("tanh", help="RNN cell (tanh|gru|lstm)"),
    alpha: float = typer.Option(1e-2, help="HMM Laplace smoothing"),
    max_iter: int = typer.Option(1000, help="CRF optimizer iterations"),
    hidden: int = typer.Option(10, help="RNN hidden units"),
    learning_rate: float = typer.Option(0.01, help="RNN learning rate"),
    max_epochs: int = typer.Option(200, help="RNN epoch cap"),
    patience: int = typer.Option(10, help="RNN early-stopping patience"),
    seed: int = typer.Option(0, help="RNN initialisation and shuffling seed"),
) -> None:
    with _reported_errors():
        key = model.strip().lower()
        _choice(key, ("hmm", "fhmm", "crf", "fcrf", "rnn", "mrnn"), "model")
        spec = resolve_models([f"{key}_{cell}" if key in ("rnn", "mrnn") else key])[0]
        parts = _parts(_source(data, fmt, split, house))
        point = GridPoint(hidden=hidden, learning_rate=learning_rate, alpha=alpha)
        selection = SelectionConfig(
            crf_max_iter=max_iter, rnn_max_epochs=max_epochs, rnn_patience=patience
        )
        seconds, fitted = measure_time(
            lambda: fit_model(
                spec,
                parts["train"],
                parts["val"],
                point,
                selection,
                seed=seed,
                workers=default_workers(),
            )
        )
        save_model(
            fitted.params,
            out,
            codec=parts["train"].codec,
            metadata={"model": spec.name, "dataset": parts["train"].name, "seed": seed},
        )
    info = Table(show_header=False, box=None)
    info.add_row("Model", Text(spec.name, style="bold"))
    info.add_row("Parameters", Text(str(count_parameters(fitted.params)), style="bold"))
    info.add_row("Train days", Text(str(len(parts["train"])), style="bold"))
    info.add_row("Time", Text(format_seconds(seconds), style="bold"))
    if fitted.trace is not None:
        info.add_row("Best epoch", Text(str(fitted.trace.best_epoch), style="bold"))
    console.print(Panel(info, title="Trained", expand=False))
    console.print(f"[green]✓ Saved {out}[/green]")


@app.command(help="Score a saved model on one part of a dataset")
def evaluate(
    data: Path = typer.Option(..., "--data", help="Canonical directory or corpus path"),
    model_file: Path = typer.Option(..., "--model-file", help="Model file (.npz)"),
    fmt: str | None = typer.Option(None, "--format", help="canonical|casas|aras|synth"),
    house: str = typer.Option("A", help="ARAS house (A|B)"),
    split: str | None = typer.Option(None, help="train,val,test days (default: last two days held out)"),
    part: str = typer.Option("test", help="train|val|test"),
) -> None:
    with _reported_errors():
        _choice(part, PARTS, "part")
        saved = load_model(model_file)
        dataset = _parts(_source(data, fmt, split, house))[part]
        if dataset.label_space.sizes != saved.params.label_space.sizes:
            raise ConfigurationError(
                f"model labels {list(saved.params.label_space.sizes)} do not match "
                f"dataset labels {list(dataset.label_space.sizes)}"
            )
        if saved.codec is not None:
            dataset = dataset.recode(saved.codec)
        if len(dataset) == 0:
            raise ConfigurationError(f"the {part} part has no days")
        scores = predict(saved.params, dataset).scores()

    table = Table(title=f"{saved.header.get('metadata', {}).get('model', saved.params.kind)} on {part}")
    for m in range(len(scores.residents)):
        table.add_column(f"R{m + 1}", justify="right")
    table.add_column("All", justify="right")
    table.add_row(*(f"{100.0 * v:.2f}" for v in scores.as_vector()))
    console.print(table)


@app.command(help="Run the model matrix over one or more datasets and write the reports")
def benchmark(
    config: Path | None = typer.Option(None, "--config", help="Benchmark YAML file"),
    data: list[Path] | None = typer.Option(
        None, "--data", help="Dataset directory or synth YAML (repeatable; replaces the config's)"
    ),
    fmt: str | None = typer.Option(None, "--format", help="Format of every --data path"),
    house: str = typer.Option("A", help="ARAS house (A|B) for --data paths"),
    split: str | None = typer.Option(None, help="train,val,test days for --data paths"),
    models: str | None = typer.Option(None, help="Comma separated rows, e.g. HMM,fHMM,rnn"),
    repeats: int | None = typer.Option(None, help="Repeats of every RNN row"),
    seed: int | None = typer.Option(None, help="Base seed"),
    workers: int | None = typer.Option(None, help="Worker threads (default: ACTBENCH_WORKERS)"),
    out: Path | None = typer.Option(None, "--out", help="Output directory"),
) -> None:
    with _reported_errors():
        base = (
            load_run_config(config, default_workers=default_workers())
            if config is not None
            else RunConfig(datasets=(), workers=default_workers())
        )
        if data:
            base = replace(base, datasets=tuple(_source(p, fmt, split, house) for p in data))
        run_config = base.with_overrides(
            models=tuple(m.strip() for m in models.split(",") if m.strip()) if models else None,
            repeats=repeats,
            seed=seed,
            workers=workers,
            out=out,
        )
        resolve_models(run_config.models)
        run = run_benchmark(run_config, console)

    console.print()
    summary = Table(show_header=False, box=None)
    summary.add_row("Rows", Text(str(len(run.report.rows)), style="bold"))
    summary.add_row("Failed", Text(str(len(run.report.failed)), style="bold"))
    summary.add_row("Output", Text(str(run_config.out), style="bold"))
    border = "green" if run.complete else "yellow"
    console.print(Panel(summary, title="Summary", border_style=border, expand=False))
    for path in run.files:
        console.print(f"[dim]  {path}[/dim]")
    if not run.complete:
        raise typer.Exit(1)


def main() -> None:
    app()


if __name__ == "__main__":
    main()
