from __future__ import annotations

import hashlib
import platform
from dataclasses import dataclass, field
from datetime import UTC, datetime
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import yaml

from actbench.config import RunConfig

MANIFEST_FILE = "manifest.txt"
_PACKAGES = ("actbench", "numpy", "scipy", "pydantic")


def _package_version(name: str) -> str:
    try:
        return version(name)
    except PackageNotFoundError:
        return "unknown"


def file_digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def data_files(path: Path) -> list[Path]:
    """Every regular file behind a dataset path, in sorted order."""
    if path.is_file():
        return [path]
    return sorted(p for p in path.rglob("*") if p.is_file())


@dataclass
class RunManifest:
    """Everything needed to reproduce a benchmark run.

    Attributes:
        config_digest: SHA-256 of the canonical JSON form of the run config
        config: The run config itself
        seeds: Seeds of every RNN repeat (seed .. seed + repeats - 1)
        versions: Python and package versions
        data_files: SHA-256 of every input data file, keyed by path
        created: ISO timestamp of the run
        failed_rows: ``model/dataset`` of every row that did not complete
    """

    config_digest: str
    config: dict
    seeds: list[int]
    versions: dict[str, str]
    data_files: dict[str, str] = field(default_factory=dict)
    created: str | None = None
    failed_rows: list[str] = field(default_factory=list)

    @classmethod
    def for_run(cls, config: RunConfig) -> RunManifest:
        files: dict[str, str] = {}
        for source in config.datasets:
            for path in data_files(source.path):
                files[str(path)] = file_digest(path)
        versions = {"python": platform.python_version()}
        versions.update({name: _package_version(name) for name in _PACKAGES})
        return cls(
            config_digest=config.digest(),
            config=config.to_dict(),
            seeds=list(range(config.seed, config.seed + config.repeats)),
            versions=versions,
            data_files=files,
            created=datetime.now(UTC).isoformat(),
        )

    def to_dict(self) -> dict:
        return {
            "config_digest": self.config_digest,
            "created": self.created,
            "versions": self.versions,
            "seeds": self.seeds,
            "data_files": self.data_files,
            "failed_rows": self.failed_rows,
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, data: dict) -> RunManifest:
        return cls(
            config_digest=data["config_digest"],
            config=data.get("config", {}),
            seeds=list(data.get("seeds", [])),
            versions=dict(data.get("versions", {})),
            data_files=dict(data.get("data_files", {})),
            created=data.get("created"),
            failed_rows=list(data.get("failed_rows", [])),
        )

    def save(self, out_dir: Path) -> Path:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / MANIFEST_FILE
        path.write_text(yaml.safe_dump(self.to_dict(), sort_keys=False), encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: Path) -> RunManifest:
        return cls.from_dict(yaml.safe_load(path.read_text(encoding="utf-8")))
