"""Canonical interchange format.

One UTF-8 file per day::

    # sensors=D residents=M
    # note: <loader convention>
    t<TAB>f_1,...,f_D<TAB>a_1,...,a_M

plus a ``codec.meta`` JSON sidecar holding the symbol table, the UNK id, the sensor
names, the label space and the chronological day order.
"""

from __future__ import annotations

import json
import logging
import re
from pathlib import Path

import numpy as np

from actbench.errors import DataFormatError

from .dataset import Dataset, SequenceInstance
from .labels import LabelSpace
from .observations import ObservationCodec

logger = logging.getLogger("actbench")

META_FILE = "codec.meta"
FORMAT_TAG = "actbench-canonical"
_HEADER = re.compile(r"^#\s*sensors=(\d+)\s+residents=(\d+)\s*$")


def _fmt(value: float) -> str:
    value = float(value)
    if value.is_integer():
        return str(int(value))
    return repr(value)


def _day_file(day_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", day_id) + ".txt"


def write_canonical(dataset: Dataset, out_dir: Path) -> list[Path]:
    """Write ``dataset`` as canonical day files plus ``codec.meta``; returns written paths."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    days = []
    for inst in dataset.instances:
        name = _day_file(inst.day_id)
        days.append({"day_id": inst.day_id, "file": name})
        lines = [f"# sensors={dataset.n_features} residents={dataset.label_space.residents}"]
        lines += [f"# note: {note}" for note in dataset.notes]
        for t in range(inst.length):
            feats = ",".join(_fmt(v) for v in inst.features[t])
            acts = ",".join(str(int(a)) for a in inst.labels[t])
            lines.append(f"{t}\t{feats}\t{acts}")
        path = out_dir / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
        written.append(path)

    meta = {
        "format": FORMAT_TAG,
        "version": 1,
        "name": dataset.name,
        "notes": list(dataset.notes),
        "codec": dataset.codec.to_dict(),
        "label_space": dataset.label_space.to_dict(),
        "days": days,
    }
    meta_path = out_dir / META_FILE
    meta_path.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8", newline="\n")
    written.append(meta_path)
    logger.info("Wrote %d canonical day files to %s", len(days), out_dir)
    return written


def read_day_file(path: Path, day_id: str) -> SequenceInstance:
    """Parse one canonical day file."""
    lines = path.read_text(encoding="utf-8").split("\n")
    match = _HEADER.match(lines[0]) if lines else None
    if match is None:
        raise DataFormatError("missing '# sensors=D residents=M' header", path, 1)
    n_features, residents = int(match.group(1)), int(match.group(2))

    features: list[list[float]] = []
    labels: list[list[int]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise DataFormatError(f"expected 3 tab-separated columns, got {len(parts)}", path, lineno)
        try:
            t = int(parts[0])
            row = [float(v) for v in parts[1].split(",")]
            acts = [int(a) for a in parts[2].split(",")]
        except ValueError as e:
            raise DataFormatError(f"unparseable value: {e}", path, lineno) from e
        if t != len(features):
            raise DataFormatError(f"time index {t} out of sequence", path, lineno)
        if len(row) != n_features or len(acts) != residents:
            raise DataFormatError(
                f"expected {n_features} features and {residents} activities", path, lineno
            )
        features.append(row)
        labels.append(acts)
    if not features:
        raise DataFormatError("day file has no time steps", path)
    return SequenceInstance(day_id, np.array(features), np.array(labels, dtype=np.int64))


def load_canonical(in_dir: Path) -> Dataset:
    """Load a directory written by :func:`write_canonical`."""
    meta_path = in_dir / META_FILE
    if not meta_path.exists():
        raise DataFormatError(f"missing {META_FILE} sidecar", in_dir)
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DataFormatError(f"invalid JSON: {e.msg}", meta_path, e.lineno) from e
    if meta.get("format") != FORMAT_TAG:
        raise DataFormatError(f"not an {FORMAT_TAG} sidecar", meta_path)

    codec = ObservationCodec.from_dict(meta["codec"])
    space = LabelSpace.from_dict(meta["label_space"])
    instances = [read_day_file(in_dir / day["file"], day["day_id"]) for day in meta["days"]]
    return Dataset(
        tuple(instances),
        space,
        codec,
        name=meta.get("name", in_dir.name),
        notes=tuple(meta.get("notes", ())),
    )
