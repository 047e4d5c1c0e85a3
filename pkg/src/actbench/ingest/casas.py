from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from actbench.data import Dataset, LabelSpace, SequenceInstance
from actbench.errors import DataFormatError
from actbench.parallel import run_bounded

logger = logging.getLogger("actbench")

# Sensor layout of the WSU two-resident apartment (37 ambient sensors).
CASAS_SENSORS: tuple[str, ...] = (
    "M19", "M23", "M18", "M01", "M17", "D07", "M21", "M22", "M03", "I04",
    "D12", "I06", "M26", "M04", "M02", "M07", "M08", "M09", "M14", "M15",
    "M16", "M06", "M10", "M11", "M51", "D11", "M13", "M12", "D14", "D13",
    "D10", "M05", "D09", "D15", "M20", "M25", "M24",
)  # fmt: skip
CASAS_RESIDENTS = 2
CASAS_ACTIVITIES = 15
IDLE = "Idle"

_ON = {"ON", "OPEN", "PRESENT"}
_OFF = {"OFF", "CLOSE", "ABSENT"}


@dataclass(frozen=True)
class _Event:
    date: str
    sensor: int
    value: float
    # (resident, activity) pairs, 0-based
    annotations: tuple[tuple[int, int], ...]


def _parse_value(token: str, path: Path, lineno: int) -> float:
    upper = token.upper()
    if upper in _ON:
        return 1.0
    if upper in _OFF:
        return 0.0
    try:
        return float(token)
    except ValueError as e:
        raise DataFormatError(f"unrecognised sensor value {token!r}", path, lineno) from e


def _parse_file(path: Path, sensors: Sequence[str], n_activities: int) -> list[_Event]:
    """Parse ``date time sensor value [resident activity]...`` lines."""
    slot = {name: i for i, name in enumerate(sensors)}
    events: list[_Event] = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            tokens = line.split()
            if not tokens:
                continue
            if len(tokens) < 4:
                raise DataFormatError(
                    f"expected date, time, sensor and value; got {len(tokens)} fields", path, lineno
                )
            date, _time, sensor, value = tokens[:4]
            if sensor not in slot:
                raise DataFormatError(f"unknown sensor id {sensor!r}", path, lineno)
            trailing = tokens[4:]
            if len(trailing) % 2:
                raise DataFormatError("resident id without activity column", path, lineno)
            annotations = []
            for r_tok, a_tok in zip(trailing[::2], trailing[1::2]):
                try:
                    resident, activity = int(r_tok) - 1, int(a_tok) - 1
                except ValueError as e:
                    raise DataFormatError(
                        f"non-integer resident/activity {r_tok!r} {a_tok!r}", path, lineno
                    ) from e
                if not 0 <= resident < CASAS_RESIDENTS:
                    raise DataFormatError(f"resident id {r_tok} outside 1..2", path, lineno)
                if not 0 <= activity < n_activities:
                    raise DataFormatError(
                        f"activity id {a_tok} outside 1..{n_activities}", path, lineno
                    )
                annotations.append((resident, activity))
            events.append(
                _Event(date, slot[sensor], _parse_value(value, path, lineno), tuple(annotations))
            )
    if not events:
        logger.warning("Skipping %s: no sensor events", path)
    return events


def _source_files(path: Path) -> list[Path]:
    if path.is_file():
        return [path]
    if not path.is_dir():
        raise DataFormatError("CASAS path is neither a file nor a directory", path)
    files = sorted(p for p in path.iterdir() if p.is_file() and not p.name.startswith("."))
    if not files:
        raise DataFormatError("no CASAS event files found", path)
    return files


def _normalise_columns(features: np.ndarray) -> np.ndarray:
    """Min-max scale every non-binary column into [0, 1]."""
    out = features.copy()
    for d in range(out.shape[1]):
        column = out[:, d]
        if np.isin(column, (0.0, 1.0)).all():
            continue
        lo, hi = column.min(), column.max()
        out[:, d] = 0.0 if hi == lo else (column - lo) / (hi - lo)
    return out


def load_casas(
    path: Path,
    sensors: Sequence[str] = CASAS_SENSORS,
    n_activities: int = CASAS_ACTIVITIES,
    workers: int | None = None,
) -> Dataset:
    """Load the CASAS two-resident corpus into one instance per calendar day.

    One time step per sensor event; the observation carries the last known value of
    every sensor. Annotations persist until superseded. Steps preceding a resident's
    first annotation get a reserved ``Idle`` activity, appended only if needed.
    """
    files = _source_files(path)
    parsed = run_bounded(lambda p: _parse_file(p, sensors, n_activities), files, workers)

    state = np.zeros(len(sensors))
    current = [-1] * CASAS_RESIDENTS
    days: dict[str, tuple[list[np.ndarray], list[list[int]]]] = {}
    for events in parsed:
        for ev in events:
            state[ev.sensor] = ev.value
            for resident, activity in ev.annotations:
                current[resident] = activity
            rows, labels = days.setdefault(ev.date, ([], []))
            rows.append(state.copy())
            labels.append(list(current))

    if not days:
        raise DataFormatError("CASAS corpus contains no events", path)

    space = LabelSpace(sizes=(n_activities,) * CASAS_RESIDENTS)
    notes = ["time base: one step per sensor event (state-carry observation)"]
    has_gaps = any(min(min(lab) for lab in labels) < 0 for _, labels in days.values())
    if has_gaps:
        space = space.with_extra_activity(IDLE)
        notes.append(f"steps before a resident's first annotation are labeled {IDLE}")

    dates = sorted(days)
    all_rows = _normalise_columns(np.concatenate([np.array(days[d][0]) for d in dates]))
    instances = []
    offset = 0
    for date in dates:
        rows, labels = days[date]
        lab = np.array(labels, dtype=np.int64)
        lab[lab < 0] = n_activities
        instances.append(SequenceInstance(date, all_rows[offset : offset + len(rows)], lab))
        offset += len(rows)

    logger.info("Loaded CASAS corpus: %d days, %d events", len(instances), offset)
    return Dataset.from_instances(
        instances, space, sensor_names=sensors, name="casas", notes=notes
    )
