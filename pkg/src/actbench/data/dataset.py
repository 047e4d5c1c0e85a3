from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np

from actbench.errors import ConfigurationError, DomainError

from .labels import ActivityFrame, LabelSpace, encode_array
from .observations import Observation, ObservationCodec, build_observation_codec


def _frozen(array: np.ndarray, dtype) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class SequenceInstance:
    """One aligned day of observations and activities.

    Attributes:
        day_id: Source-day identifier
        features: Sensor feature matrix, shape (T, D)
        labels: Per-resident activity indices, shape (T, M)
        symbols: Joint sensor-state symbols, shape (T,); filled in by the owning Dataset
    """

    day_id: str
    features: np.ndarray
    labels: np.ndarray
    symbols: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self) -> None:
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if features.ndim != 2 or labels.ndim != 2:
            raise DomainError(f"day {self.day_id}: features and labels must be 2-D arrays")
        if features.shape[0] != labels.shape[0]:
            raise DomainError(
                f"day {self.day_id}: {features.shape[0]} observations but {labels.shape[0]} frames"
            )
        if features.shape[0] < 1:
            raise DomainError(f"day {self.day_id}: empty sequence")
        symbols = np.asarray(self.symbols, dtype=np.int64)
        if symbols.size and symbols.shape != (features.shape[0],):
            raise DomainError(f"day {self.day_id}: symbols must have one entry per step")
        object.__setattr__(self, "features", _frozen(features, np.float64))
        object.__setattr__(self, "labels", _frozen(labels, np.int64))
        object.__setattr__(self, "symbols", _frozen(symbols, np.int64))

    @property
    def length(self) -> int:
        return int(self.features.shape[0])

    @property
    def observations(self) -> list[Observation]:
        return [
            Observation(symbol=int(s), features=tuple(float(v) for v in row))
            for s, row in zip(self.symbols, self.features)
        ]

    @property
    def activities(self) -> list[ActivityFrame]:
        return [ActivityFrame(tuple(row)) for row in self.labels]

    def with_symbols(self, symbols: np.ndarray) -> SequenceInstance:
        return SequenceInstance(self.day_id, self.features, self.labels, symbols)

    def combined_labels(self, space: LabelSpace) -> np.ndarray:
        return encode_array(self.labels, space)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Day instances sharing one label space and one observation codec.

    Attributes:
        instances: Day sequences in chronological order
        label_space: Activity alphabets of all residents
        codec: Joint sensor-state table used to fill every instance's symbols
        name: Free-form corpus name used in reports
        notes: Loader conventions (time base, reserved labels) carried into file headers
    """

    instances: tuple[SequenceInstance, ...]
    label_space: LabelSpace
    codec: ObservationCodec
    name: str = "dataset"
    notes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        instances = tuple(self.instances)
        seen: set[str] = set()
        for inst in instances:
            if inst.day_id in seen:
                raise ConfigurationError(f"duplicate day id {inst.day_id!r}")
            seen.add(inst.day_id)
            if inst.features.shape[1] != self.codec.n_features:
                raise ConfigurationError(
                    f"day {inst.day_id} has {inst.features.shape[1]} features, "
                    f"codec expects {self.codec.n_features}"
                )
            if inst.labels.shape[1] != self.label_space.residents:
                raise ConfigurationError(
                    f"day {inst.day_id} labels {inst.labels.shape[1]} residents, "
                    f"label space has {self.label_space.residents}"
                )
            sizes = np.asarray(self.label_space.sizes)
            if (inst.labels < 0).any() or (inst.labels >= sizes).any():
                raise DomainError(f"day {inst.day_id} has labels outside the activity alphabets")
        recoded = tuple(inst.with_symbols(self.codec.encode(inst.features)) for inst in instances)
        object.__setattr__(self, "instances", recoded)
        object.__setattr__(self, "notes", tuple(self.notes))

    @classmethod
    def from_instances(
        cls,
        instances: Sequence[SequenceInstance],
        label_space: LabelSpace,
        codec: ObservationCodec | None = None,
        sensor_names: Sequence[str] = (),
        name: str = "dataset",
        notes: Sequence[str] = (),
    ) -> Dataset:
        """Build a dataset, deriving the codec from all rows when none is given."""
        if codec is None:
            if not instances:
                raise ConfigurationError("cannot build a dataset from zero instances")
            rows = np.concatenate([inst.features for inst in instances], axis=0)
            codec = build_observation_codec(rows, sensor_names=sensor_names)
        return cls(tuple(instances), label_space, codec, name=name, notes=tuple(notes))

    @property
    def n_features(self) -> int:
        return self.codec.n_features

    @property
    def day_ids(self) -> list[str]:
        return [inst.day_id for inst in self.instances]

    @property
    def total_steps(self) -> int:
        return sum(inst.length for inst in self.instances)

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self) -> Iterator[SequenceInstance]:
        return iter(self.instances)

    def recode(self, codec: ObservationCodec) -> Dataset:
        """Same instances under another codec; unseen states map to its UNK id."""
        return Dataset(self.instances, self.label_space, codec, name=self.name, notes=self.notes)

    def subset(self, instances: Sequence[SequenceInstance]) -> Dataset:
        return Dataset(tuple(instances), self.label_space, self.codec, name=self.name, notes=self.notes)
