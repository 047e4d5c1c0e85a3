from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from actbench.errors import ConfigurationError, DomainError

# Combined indices are stored as int64.
_MAX_COMBINED = np.iinfo(np.int64).max


@dataclass(frozen=True)
class LabelSpace:
    """Per-resident activity alphabets.

    Attributes:
        sizes: Alphabet size K^m of every resident (length M)
        activity_names: Display names per resident; generated when omitted
    """

    sizes: tuple[int, ...]
    activity_names: tuple[tuple[str, ...], ...] = field(default=())

    def __post_init__(self) -> None:
        sizes = tuple(int(k) for k in self.sizes)
        if not sizes:
            raise ConfigurationError("label space needs at least one resident")
        if any(k < 1 for k in sizes):
            raise ConfigurationError(f"every activity alphabet needs at least one label: {sizes}")
        if math.prod(sizes) > _MAX_COMBINED:
            raise ConfigurationError(f"combined label space {sizes} exceeds int64 range")
        names = self.activity_names
        if not names:
            names = tuple(
                tuple(f"activity-{k:02d}" for k in range(size)) for size in sizes
            )
        names = tuple(tuple(str(n) for n in per) for per in names)
        if len(names) != len(sizes) or any(len(n) != k for n, k in zip(names, sizes)):
            raise ConfigurationError("activity_names must list exactly K^m names per resident")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "activity_names", names)

    @property
    def residents(self) -> int:
        return len(self.sizes)

    @property
    def combined_size(self) -> int:
        return math.prod(self.sizes)

    def with_extra_activity(self, name: str) -> LabelSpace:
        """Return a space where every resident gains one trailing activity ``name``."""
        return LabelSpace(
            sizes=tuple(k + 1 for k in self.sizes),
            activity_names=tuple((*names, name) for names in self.activity_names),
        )

    def components(self) -> np.ndarray:
        """Per-resident labels of every combined index, shape (J, M)."""
        return decode_array(np.arange(self.combined_size), self)

    def to_dict(self) -> dict:
        return {"sizes": list(self.sizes), "activity_names": [list(n) for n in self.activity_names]}

    @classmethod
    def from_dict(cls, data: dict) -> LabelSpace:
        return cls(
            sizes=tuple(data["sizes"]),
            activity_names=tuple(tuple(n) for n in data.get("activity_names", ())),
        )


@dataclass(frozen=True)
class ActivityFrame:
    """Activities of all residents at one time step (0-based indices)."""

    labels: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(int(a) for a in self.labels))

    def validate(self, space: LabelSpace) -> None:
        if len(self.labels) != space.residents:
            raise DomainError(
                f"frame has {len(self.labels)} labels but the space has {space.residents} residents"
            )
        for m, (a, k) in enumerate(zip(self.labels, space.sizes)):
            if not 0 <= a < k:
                raise DomainError(f"label {a} of resident {m} outside [0, {k})")


def encode_combined(frame: ActivityFrame, space: LabelSpace) -> int:
    """Row-major mixed-radix index of ``frame``; resident 1 is most significant."""
    frame.validate(space)
    index = 0
    for a, k in zip(frame.labels, space.sizes):
        index = index * k + a
    return index


def decode_combined(index: int, space: LabelSpace) -> ActivityFrame:
    """Inverse of :func:`encode_combined`."""
    index = int(index)
    if not 0 <= index < space.combined_size:
        raise DomainError(f"combined index {index} outside [0, {space.combined_size})")
    labels = []
    for k in reversed(space.sizes):
        index, a = divmod(index, k)
        labels.append(a)
    return ActivityFrame(tuple(reversed(labels)))


def encode_array(labels: np.ndarray, space: LabelSpace) -> np.ndarray:
    """Vectorised :func:`encode_combined` over a (T, M) label array."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 2 or labels.shape[1] != space.residents:
        raise DomainError(f"expected labels of shape (T, {space.residents}), got {labels.shape}")
    sizes = np.asarray(space.sizes)
    if labels.size and ((labels < 0).any() or (labels >= sizes).any()):
        raise DomainError("label index outside its activity alphabet")
    return np.ravel_multi_index(tuple(labels.T), space.sizes).astype(np.int64)


def decode_array(index: np.ndarray, space: LabelSpace) -> np.ndarray:
    """Vectorised :func:`decode_combined`; returns a (T, M) label array."""
    index = np.asarray(index, dtype=np.int64)
    if index.size and ((index < 0).any() or (index >= space.combined_size).any()):
        raise DomainError(f"combined index outside [0, {space.combined_size})")
    return np.stack(np.unravel_index(index, space.sizes), axis=-1).astype(np.int64)
