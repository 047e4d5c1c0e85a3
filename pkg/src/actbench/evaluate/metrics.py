from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from actbench.data import Dataset
from actbench.errors import DomainError


def _aligned(
    predictions: Sequence[np.ndarray], truth: Sequence[np.ndarray]
) -> list[tuple[np.ndarray, np.ndarray]]:
    if len(predictions) != len(truth):
        raise DomainError(f"{len(predictions)} predicted sequences for {len(truth)} instances")
    if not truth:
        raise DomainError("accuracy of an empty prediction set is undefined")
    pairs = []
    for i, (pred, gold) in enumerate(zip(predictions, truth)):
        pred, gold = np.asarray(pred), np.asarray(gold)
        if pred.shape != gold.shape or gold.ndim != 2 or gold.shape[0] < 1:
            raise DomainError(f"instance {i}: prediction shape {pred.shape} vs truth {gold.shape}")
        pairs.append((pred, gold))
    return pairs


def accuracy_per_resident(
    predictions: Sequence[np.ndarray], truth: Sequence[np.ndarray], m: int
) -> float:
    """Mean over instances of the per-step match rate of resident ``m``.

    Every instance counts once, whatever its length.
    """
    pairs = _aligned(predictions, truth)
    if not 0 <= m < pairs[0][1].shape[1]:
        raise DomainError(f"resident {m} outside [0, {pairs[0][1].shape[1]})")
    return float(np.mean([np.mean(pred[:, m] == gold[:, m]) for pred, gold in pairs]))


def accuracy_all(predictions: Sequence[np.ndarray], truth: Sequence[np.ndarray]) -> float:
    """Mean over instances of the rate of steps where every resident matches."""
    pairs = _aligned(predictions, truth)
    return float(np.mean([np.mean((pred == gold).all(axis=1)) for pred, gold in pairs]))


@dataclass(frozen=True)
class Scores:
    """Accuracies of one prediction set.

    Attributes:
        residents: Per-resident accuracy R1..RM
        all: Joint accuracy over all residents
    """

    residents: tuple[float, ...]
    all: float

    def as_vector(self) -> np.ndarray:
        return np.array([*self.residents, self.all])


@dataclass(frozen=True, eq=False)
class PredictionSet:
    """Predicted (T, M) label arrays aligned with the instances of a dataset."""

    predictions: tuple[np.ndarray, ...]
    truth: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        _aligned(self.predictions, self.truth)

    @classmethod
    def for_dataset(cls, predictions: Sequence[np.ndarray], dataset: Dataset) -> PredictionSet:
        return cls(
            tuple(np.asarray(p, dtype=np.int64) for p in predictions),
            tuple(inst.labels for inst in dataset),
        )

    @property
    def residents(self) -> int:
        return int(self.truth[0].shape[1])

    def accuracy(self, m: int) -> float:
        return accuracy_per_resident(self.predictions, self.truth, m)

    def accuracy_all(self) -> float:
        return accuracy_all(self.predictions, self.truth)

    def scores(self) -> Scores:
        return Scores(tuple(self.accuracy(m) for m in range(self.residents)), self.accuracy_all())
