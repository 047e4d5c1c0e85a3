from __future__ import annotations

import logging
import re
from pathlib import Path
from typing import Literal

import numpy as np

from actbench.data import Dataset, LabelSpace, SequenceInstance
from actbench.errors import DataFormatError
from actbench.parallel import run_bounded

logger = logging.getLogger("actbench")

ARAS_SENSORS = 20
ARAS_RESIDENTS = 2
ARAS_ACTIVITIES: tuple[str, ...] = (
    "Other", "Going Out", "Preparing Breakfast", "Having Breakfast", "Preparing Lunch",
    "Having Lunch", "Preparing Dinner", "Having Dinner", "Washing Dishes", "Having Snack",
    "Sleeping", "Watching TV", "Studying", "Having Shower", "Toileting", "Napping",
    "Using Internet", "Reading Book", "Laundry", "Shaving", "Brushing Teeth",
    "Talking on the Phone", "Listening to Music", "Cleaning", "Having Conversation",
    "Having Guest", "Changing Clothes",
)  # fmt: skip

_COLUMNS = ARAS_SENSORS + ARAS_RESIDENTS


def _natural_key(path: Path) -> tuple:
    return tuple(int(p) if p.isdigit() else p for p in re.split(r"(\d+)", path.stem))


def _parse_day(path: Path) -> SequenceInstance | None:
    """One row per second: 20 binary sensors then two 1-based activity ids."""
    rows: list[list[int]] = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            tokens = line.split()
            if not tokens:
                continue
            if len(tokens) != _COLUMNS:
                raise DataFormatError(
                    f"expected {_COLUMNS} columns, got {len(tokens)}", path, lineno
                )
            try:
                row = [int(t) for t in tokens]
            except ValueError as e:
                raise DataFormatError(f"non-integer value: {e}", path, lineno) from e
            for value in row[:ARAS_SENSORS]:
                if value not in (0, 1):
                    raise DataFormatError(f"sensor value {value} is not binary", path, lineno)
            for act in row[ARAS_SENSORS:]:
                if not 1 <= act <= len(ARAS_ACTIVITIES):
                    raise DataFormatError(
                        f"activity id {act} outside 1..{len(ARAS_ACTIVITIES)}", path, lineno
                    )
            rows.append(row)
    if not rows:
        logger.warning("Skipping %s: no rows", path)
        return None
    data = np.array(rows, dtype=np.int64)
    features = data[:, :ARAS_SENSORS].astype(np.float64)
    return SequenceInstance(path.stem, features, data[:, ARAS_SENSORS:] - 1)


def load_aras(path: Path, house: Literal["A", "B"] = "A", workers: int | None = None) -> Dataset:
    """Load one ARAS house: one instance per day file, 1 Hz rows, activities shifted to 0-based."""
    if house not in ("A", "B"):
        raise DataFormatError(f"ARAS house must be A or B, got {house!r}", path)
    if not path.is_dir():
        raise DataFormatError("ARAS path must be a directory of day files", path)
    files = sorted(
        (p for p in path.iterdir() if p.is_file() and p.suffix == ".txt"), key=_natural_key
    )
    if not files:
        raise DataFormatError("no ARAS day files (*.txt) found", path)

    instances = [inst for inst in run_bounded(_parse_day, files, workers) if inst is not None]
    space = LabelSpace(
        sizes=(len(ARAS_ACTIVITIES),) * ARAS_RESIDENTS,
        activity_names=(ARAS_ACTIVITIES,) * ARAS_RESIDENTS,
    )
    sensor_names = tuple(f"{house}{d + 1:02d}" for d in range(ARAS_SENSORS))
    logger.info("Loaded ARAS house %s: %d days", house, len(instances))
    return Dataset.from_instances(
        instances,
        space,
        sensor_names=sensor_names,
        name=f"aras-{house}",
        notes=[f"house {house}; time base: one step per second (1 Hz rows)"],
    )
