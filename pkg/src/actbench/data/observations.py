from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from actbench.errors import ConfigurationError, DataFormatError, DomainError


@dataclass(frozen=True)
class Observation:
    """Dual view of the sensors' state at one time step.

    Attributes:
        symbol: Joint sensor-state id used as the HMM emission
        features: Sensor values in [0, 1] used by CRFs and RNNs
    """

    symbol: int
    features: tuple[float, ...]


def _key(row: Iterable[float]) -> tuple[float, ...]:
    return tuple(float(v) for v in row)


@dataclass(frozen=True)
class ObservationCodec:
    """Insertion-ordered table from joint sensor states to symbol ids.

    Ids are contiguous ``0..S-1``; ``unk_id == S`` is reserved for states absent from
    the table.

    Attributes:
        symbols: Distinct feature vectors in id order
        n_features: Feature count D
        sensor_names: Column names (defaults to ``s00``, ``s01``, ...)
    """

    symbols: tuple[tuple[float, ...], ...]
    n_features: int
    sensor_names: tuple[str, ...] = field(default=())
    _index: dict[tuple[float, ...], int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        symbols = tuple(_key(s) for s in self.symbols)
        if any(len(s) != self.n_features for s in symbols):
            raise DataFormatError(f"codec rows must all have {self.n_features} features")
        index: dict[tuple[float, ...], int] = {}
        for i, s in enumerate(symbols):
            if s in index:
                raise ConfigurationError(f"duplicate symbol {s} in codec table")
            index[s] = i
        names = tuple(self.sensor_names) or tuple(f"s{d:02d}" for d in range(self.n_features))
        if len(names) != self.n_features:
            raise ConfigurationError("sensor_names must have one entry per feature")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "sensor_names", names)
        object.__setattr__(self, "_index", index)

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def unk_id(self) -> int:
        return len(self.symbols)

    def lookup(self, row: Sequence[float]) -> int:
        if len(row) != self.n_features:
            raise DomainError(f"expected {self.n_features} features, got {len(row)}")
        return self._index.get(_key(row), self.unk_id)

    def encode(self, features: np.ndarray) -> np.ndarray:
        """Symbol id of every row of a (T, D) feature array."""
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[1] != self.n_features:
            raise DomainError(f"expected features of shape (T, {self.n_features})")
        if features.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        distinct, inverse = np.unique(features, axis=0, return_inverse=True)
        ids = np.array([self._index.get(_key(row), self.unk_id) for row in distinct], dtype=np.int64)
        return ids[inverse.reshape(-1)]

    def to_dict(self) -> dict:
        return {
            "n_features": self.n_features,
            "unk_id": self.unk_id,
            "sensor_names": list(self.sensor_names),
            "symbols": [list(s) for s in self.symbols],
        }

    @classmethod
    def from_dict(cls, data: dict) -> ObservationCodec:
        codec = cls(
            symbols=tuple(tuple(s) for s in data["symbols"]),
            n_features=int(data["n_features"]),
            sensor_names=tuple(data.get("sensor_names", ())),
        )
        if "unk_id" in data and int(data["unk_id"]) != codec.unk_id:
            raise DataFormatError(
                f"codec metadata declares unk_id={data['unk_id']} for {codec.size} symbols"
            )
        return codec


def build_observation_codec(
    rows: Iterable[Sequence[float]], sensor_names: Sequence[str] = ()
) -> ObservationCodec:
    """Assign ids to distinct feature vectors in order of first appearance."""
    if isinstance(rows, np.ndarray) and rows.ndim == 2:
        if rows.shape[0] == 0:
            raise ConfigurationError("cannot build an observation codec from zero rows")
        distinct, first = np.unique(rows.astype(np.float64), axis=0, return_index=True)
        ordered = distinct[np.argsort(first, kind="stable")]
        return ObservationCodec(
            symbols=tuple(_key(r) for r in ordered),
            n_features=rows.shape[1],
            sensor_names=tuple(sensor_names),
        )
    seen: dict[tuple[float, ...], None] = {}
    width: int | None = None
    for i, row in enumerate(rows):
        key = _key(row)
        if width is None:
            width = len(key)
        elif len(key) != width:
            raise DataFormatError(f"ragged observation row {i}: {len(key)} features, expected {width}")
        seen.setdefault(key, None)
    if width is None:
        raise ConfigurationError("cannot build an observation codec from zero rows")
    return ObservationCodec(symbols=tuple(seen), n_features=width, sensor_names=tuple(sensor_names))
