from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Literal

import numpy as np
import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator

from actbench.errors import ConfigurationError

DataFormat = Literal["canonical", "casas", "aras", "synth"]
Encoding = Literal["combined", "separate"]
Family = Literal["hmm", "fhmm", "crf", "fcrf", "rnn"]

# Encodings each family supports.
FAMILY_ENCODINGS: dict[str, tuple[str, ...]] = {
    "hmm": ("combined",),
    "fhmm": ("separate",),
    "crf": ("combined",),
    "fcrf": ("separate",),
    "rnn": ("combined", "separate"),
}

HMM_ALPHAS: tuple[float, ...] = (1e-6, 1e-5, 1e-4, 1e-3, 1e-2)
RNN_HIDDEN: tuple[int, ...] = (10, 50, 100, 500, 1000)
RNN_LEARNING_RATES: tuple[float, ...] = tuple(float(v) for v in np.logspace(-4, 0, 9))


def check_family_encoding(family: str, encoding: str) -> None:
    allowed = FAMILY_ENCODINGS.get(family)
    if allowed is None:
        raise ConfigurationError(f"unknown model family {family!r}")
    if encoding not in allowed:
        raise ConfigurationError(
            f"family {family!r} supports encodings {', '.join(allowed)}, not {encoding!r}"
        )


@dataclass(frozen=True)
class SplitSpec:
    """Chronological day split.

    Attributes:
        train_days: Leading days used for training (>= 1)
        val_days: Following days used for model selection (0 allowed for HMM-only runs)
        test_days: Following days used for testing (>= 1)
    """

    train_days: int
    val_days: int
    test_days: int

    def __post_init__(self) -> None:
        if self.train_days < 1 or self.test_days < 1 or self.val_days < 0:
            raise ConfigurationError(
                f"split needs train >= 1, val >= 0, test >= 1; got {self.as_tuple()}"
            )

    @property
    def total(self) -> int:
        return self.train_days + self.val_days + self.test_days

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.train_days, self.val_days, self.test_days)

    @classmethod
    def parse(cls, text: str) -> SplitSpec:
        """Parse ``"24,1,1"``."""
        try:
            train, val, test = (int(p) for p in text.split(","))
        except ValueError as e:
            raise ConfigurationError(f"split must look like 'train,val,test', got {text!r}") from e
        return cls(train, val, test)

    @classmethod
    def trailing(cls, n_days: int) -> SplitSpec:
        """One validation and one test day at the end, everything before for training."""
        if n_days < 3:
            raise ConfigurationError(f"a default split needs at least 3 days, got {n_days}")
        return cls(n_days - 2, 1, 1)


# Default splits per corpus format.
DEFAULT_SPLITS: dict[str, SplitSpec] = {
    "casas": SplitSpec(24, 1, 1),
    "aras": SplitSpec(7, 2, 2),
}


@dataclass(frozen=True)
class DatasetSource:
    """One corpus of a benchmark run.

    Attributes:
        name: Column label in reports
        format: canonical | casas | aras | synth
        path: Directory (canonical, casas, aras) or synth config file
        split: Chronological day split; None takes the last two days for val and test
        house: ARAS house, A or B
    """

    name: str
    format: DataFormat
    path: Path
    split: SplitSpec | None
    house: Literal["A", "B"] = "A"


@dataclass(frozen=True)
class SelectionConfig:
    """Model-selection settings.

    Attributes:
        hmm_alphas: Laplace smoothing grid for HMM and fHMM
        rnn_hidden: Hidden-size grid for every RNN row
        rnn_learning_rates: Learning-rate grid for every RNN row
        crf_max_iter: Iteration cap of the CRF/fCRF optimizer
        max_expansions: Rounds of boundary expansion of log-spaced grids
        rnn_max_epochs: Epoch cap for RNN training
        rnn_patience: Early-stopping patience in epochs
        rnn_clip_norm: Global gradient-norm clip
    """

    hmm_alphas: tuple[float, ...] = HMM_ALPHAS
    rnn_hidden: tuple[int, ...] = RNN_HIDDEN
    rnn_learning_rates: tuple[float, ...] = RNN_LEARNING_RATES
    crf_max_iter: int = 1000
    max_expansions: int = 2
    rnn_max_epochs: int = 200
    rnn_patience: int = 10
    rnn_clip_norm: float = 5.0


@dataclass(frozen=True)
class RunConfig:
    """Configuration for the benchmark command.

    Attributes:
        datasets: Corpora to benchmark, in report column order
        models: Benchmark row names to run (empty means all ten)
        selection: Grids and training caps
        seed: Base seed; RNN repeat r uses seed + r
        repeats: Repeat count for RNN rows
        workers: Worker threads for grid points and repeats
        out: Output directory for reports and manifest
    """

    datasets: tuple[DatasetSource, ...]
    models: tuple[str, ...] = ()
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    seed: int = 0
    repeats: int = 50
    workers: int = 1
    out: Path = field(default_factory=lambda: Path("runs/latest"))

    def validate(self) -> None:
        """Check invariants that depend on the filesystem or the model registry."""
        if not self.datasets:
            raise ConfigurationError("no datasets configured")
        if self.repeats < 1:
            raise ConfigurationError("repeats must be >= 1")
        names = [d.name for d in self.datasets]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"dataset names must be unique: {names}")
        for source in self.datasets:
            if not source.path.exists():
                raise ConfigurationError(f"dataset path does not exist: {source.path}")

    def to_dict(self) -> dict[str, Any]:
        def convert(value: Any) -> Any:
            if isinstance(value, Path):
                return str(value)
            if isinstance(value, dict):
                return {k: convert(v) for k, v in value.items()}
            if isinstance(value, (list, tuple)):
                return [convert(v) for v in value]
            return value

        return convert(asdict(self))

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form (output directory excluded)."""
        data = self.to_dict()
        data.pop("out", None)
        blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def with_overrides(self, **changes: Any) -> RunConfig:
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


# ---------------------------------------------------------------------------
# Config file schema
# ---------------------------------------------------------------------------


class DatasetSection(BaseModel):
    name: str | None = None
    format: DataFormat = "canonical"
    path: Path
    split: list[int] | None = Field(default=None, description="train,val,test day counts")
    house: Literal["A", "B"] = "A"

    @field_validator("split")
    @classmethod
    def _three_counts(cls, v: list[int] | None) -> list[int] | None:
        if v is not None and len(v) != 3:
            raise ValueError("split needs exactly three counts")
        return v


class SelectionSection(BaseModel):
    hmm_alphas: list[float] = Field(default_factory=lambda: list(HMM_ALPHAS))
    rnn_hidden: list[int] = Field(default_factory=lambda: list(RNN_HIDDEN))
    rnn_learning_rates: list[float] = Field(default_factory=lambda: list(RNN_LEARNING_RATES))
    crf_max_iter: int = Field(default=1000, ge=1)
    max_expansions: int = Field(default=2, ge=0)
    rnn_max_epochs: int = Field(default=200, ge=1)
    rnn_patience: int = Field(default=10, ge=1)
    rnn_clip_norm: float = Field(default=5.0, gt=0)


class RunSection(BaseModel):
    seed: int = 0
    repeats: int = Field(default=50, ge=1)
    workers: int | None = Field(default=None, ge=1)
    out: Path = Path("runs/latest")


class RunConfigFile(BaseModel):
    """Pydantic schema of a benchmark YAML file."""

    datasets: list[DatasetSection] = Field(default_factory=list)
    models: list[str] = Field(default_factory=list)
    selection: SelectionSection = Field(default_factory=SelectionSection)
    run: RunSection = Field(default_factory=RunSection)


def dataset_source(section: DatasetSection, base: Path | None = None) -> DatasetSource:
    path = section.path if base is None or section.path.is_absolute() else base / section.path
    if section.split is not None:
        split = SplitSpec(*section.split)
    elif section.format in DEFAULT_SPLITS:
        split = DEFAULT_SPLITS[section.format]
    else:
        split = None
    name = section.name or (f"{section.format}-{section.house}" if section.format == "aras" else path.stem)
    return DatasetSource(name=name, format=section.format, path=path, split=split, house=section.house)


def load_yaml(path: Path) -> dict[str, Any]:
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ConfigurationError(f"config file not found: {path}") from e
    except yaml.YAMLError as e:
        raise ConfigurationError(f"invalid YAML in {path}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path} must contain a mapping of sections")
    return data


def load_run_config(path: Path, default_workers: int = 1) -> RunConfig:
    """Read and validate a benchmark YAML file; relative paths resolve against it."""
    try:
        parsed = RunConfigFile.model_validate(load_yaml(path))
    except ValidationError as e:
        first = e.errors()[0]
        loc = ".".join(str(p) for p in first["loc"])
        raise ConfigurationError(f"{path}: {loc}: {first['msg']}") from e
    return run_config_from_file(parsed, base=path.parent, default_workers=default_workers)


def run_config_from_file(
    parsed: RunConfigFile, base: Path | None = None, default_workers: int = 1
) -> RunConfig:
    sel = parsed.selection
    return RunConfig(
        datasets=tuple(dataset_source(d, base) for d in parsed.datasets),
        models=tuple(parsed.models),
        selection=SelectionConfig(
            hmm_alphas=tuple(sel.hmm_alphas),
            rnn_hidden=tuple(sel.rnn_hidden),
            rnn_learning_rates=tuple(sel.rnn_learning_rates),
            crf_max_iter=sel.crf_max_iter,
            max_expansions=sel.max_expansions,
            rnn_max_epochs=sel.rnn_max_epochs,
            rnn_patience=sel.rnn_patience,
            rnn_clip_norm=sel.rnn_clip_norm,
        ),
        seed=parsed.run.seed,
        repeats=parsed.run.repeats,
        workers=parsed.run.workers or default_workers,
        out=parsed.run.out,
    )
