"""The benchmark's model matrix and a uniform fit/predict surface over the families."""

from __future__ import annotations

from dataclasses import dataclass
from functools import singledispatch

import numpy as np

from actbench.config import SelectionConfig, check_family_encoding
from actbench.data import Dataset, SequenceInstance, decode_array
from actbench.errors import ConfigurationError
from actbench.evaluate import Grid, GridPoint, PredictionSet, Scores
from actbench.models import (
    CrfParams,
    FcrfParams,
    FhmmParams,
    HmmParams,
    ModelParams,
    RnnConfig,
    RnnParams,
    RnnTrace,
    crf_decode,
    fcrf_decode,
    rnn_decode,
    train_crf,
    train_fcrf,
    train_fhmm,
    train_hmm,
    train_rnn,
    viterbi,
    viterbi_fhmm,
)


@dataclass(frozen=True)
class ModelSpec:
    """One row of the benchmark.

    Attributes:
        name: Report row name; an ``m`` prefix marks separate labels for RNNs
        family: hmm | fhmm | crf | fcrf | rnn
        encoding: combined | separate
        cell: RNN cell (tanh | gru | lstm), None for other families
    """

    name: str
    family: str
    encoding: str
    cell: str | None = None

    def __post_init__(self) -> None:
        check_family_encoding(self.family, self.encoding)

    @property
    def repeated(self) -> bool:
        """Whether results average several seeds."""
        return self.family == "rnn"


MODEL_ROWS: tuple[ModelSpec, ...] = (
    ModelSpec("RNN_tanh", "rnn", "combined", "tanh"),
    ModelSpec("mRNN_tanh", "rnn", "separate", "tanh"),
    ModelSpec("RNN_gru", "rnn", "combined", "gru"),
    ModelSpec("mRNN_gru", "rnn", "separate", "gru"),
    ModelSpec("RNN_lstm", "rnn", "combined", "lstm"),
    ModelSpec("mRNN_lstm", "rnn", "separate", "lstm"),
    ModelSpec("HMM", "hmm", "combined"),
    ModelSpec("fHMM", "fhmm", "separate"),
    ModelSpec("CRF", "crf", "combined"),
    ModelSpec("fCRF", "fcrf", "separate"),
)


def resolve_models(names: list[str] | tuple[str, ...]) -> tuple[ModelSpec, ...]:
    """Rows named (case-insensitively) in ``names``, in matrix order; all rows if empty.

    ``rnn`` and ``mrnn`` select the three combined or separate recurrent rows.
    """
    if not names:
        return MODEL_ROWS
    by_name = {spec.name.lower(): spec for spec in MODEL_ROWS}
    wanted: set[str] = set()
    for raw in names:
        key = raw.strip().lower()
        if not key:
            continue
        if key in ("rnn", "mrnn"):
            wanted |= {n for n in by_name if n.startswith(f"{key}_")}
        elif key in by_name:
            wanted.add(key)
        else:
            known = ", ".join(spec.name for spec in MODEL_ROWS)
            raise ConfigurationError(f"unknown model {raw!r}; choose from {known}")
    return tuple(spec for spec in MODEL_ROWS if spec.name.lower() in wanted)


def search_grid(spec: ModelSpec, selection: SelectionConfig) -> Grid:
    if spec.family in ("hmm", "fhmm"):
        return Grid(alphas=selection.hmm_alphas)
    if spec.family == "rnn":
        return Grid(hidden=selection.rnn_hidden, learning_rates=selection.rnn_learning_rates)
    return Grid()


@dataclass
class Fitted:
    params: ModelParams
    trace: RnnTrace | None = None


def fit_model(
    spec: ModelSpec,
    train: Dataset,
    val: Dataset,
    point: GridPoint,
    selection: SelectionConfig,
    seed: int = 0,
    workers: int = 1,
) -> Fitted:
    """Train one model of ``spec`` at ``point``."""
    if spec.family == "hmm":
        return Fitted(train_hmm(train, _required(point.alpha, "alpha")))
    if spec.family == "fhmm":
        return Fitted(train_fhmm(train, _required(point.alpha, "alpha")))
    if spec.family == "crf":
        return Fitted(train_crf(train, selection.crf_max_iter, workers))
    if spec.family == "fcrf":
        return Fitted(train_fcrf(train, selection.crf_max_iter, workers))
    cfg = RnnConfig(
        cell=spec.cell or "tanh",
        head=spec.encoding,
        hidden=_required(point.hidden, "hidden"),
        learning_rate=_required(point.learning_rate, "learning_rate"),
        max_epochs=selection.rnn_max_epochs,
        patience=selection.rnn_patience,
        seed=seed,
        clip_norm=selection.rnn_clip_norm,
    )
    params, trace = train_rnn(train, val, cfg)
    return Fitted(params, trace)


def _required(value, name: str):
    if value is None:
        raise ConfigurationError(f"grid point lacks {name}")
    return value


@singledispatch
def predict_instance(params, instance: SequenceInstance) -> np.ndarray:
    """Decoded (T, M) labels of one instance."""
    raise TypeError(f"cannot decode with {type(params).__name__}")


@predict_instance.register
def _(params: HmmParams, instance: SequenceInstance) -> np.ndarray:
    return decode_array(viterbi(params, instance), params.label_space)


@predict_instance.register
def _(params: FhmmParams, instance: SequenceInstance) -> np.ndarray:
    return viterbi_fhmm(params, instance)


@predict_instance.register
def _(params: CrfParams, instance: SequenceInstance) -> np.ndarray:
    return decode_array(crf_decode(params, instance), params.label_space)


@predict_instance.register
def _(params: FcrfParams, instance: SequenceInstance) -> np.ndarray:
    return fcrf_decode(params, instance)


@predict_instance.register
def _(params: RnnParams, instance: SequenceInstance) -> np.ndarray:
    return rnn_decode(params, instance)


def predict(params: ModelParams, data: Dataset) -> PredictionSet:
    return PredictionSet.for_dataset([predict_instance(params, inst) for inst in data], data)


def score(params: ModelParams, data: Dataset) -> Scores:
    return predict(params, data).scores()
