"""Model files: one ``.npz`` archive per parameter bundle.

The archive holds a JSON ``header`` entry (format tag, model kind, label space,
dimensions, hyper-parameters and optionally the observation codec) next to the named
weight arrays, so a file can be loaded without knowing what it contains.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from actbench.data import LabelSpace, ObservationCodec
from actbench.errors import DataFormatError

from .crf import CrfParams, FcrfParams
from .hmm import FhmmParams, HmmParams
from .rnn import RnnParams

ModelParams = HmmParams | FhmmParams | CrfParams | FcrfParams | RnnParams

FORMAT_TAG = "actbench-model"
MODEL_KINDS: dict[str, type] = {
    cls.kind: cls for cls in (HmmParams, FhmmParams, CrfParams, FcrfParams, RnnParams)
}


@dataclass(frozen=True)
class ModelFile:
    """Contents of a loaded model file.

    Attributes:
        params: The parameter bundle
        codec: Observation codec the model was trained with, if saved
        header: Full JSON header, including caller-supplied metadata
    """

    params: ModelParams
    codec: ObservationCodec | None
    header: dict[str, Any]


def count_parameters(params: ModelParams) -> int:
    """Number of scalar parameters of a bundle."""
    return int(sum(a.size for a in params.to_arrays().values()))


def save_model(
    params: ModelParams,
    path: Path,
    codec: ObservationCodec | None = None,
    metadata: dict[str, Any] | None = None,
) -> Path:
    header = {
        "format": FORMAT_TAG,
        "version": 1,
        "kind": params.kind,
        "label_space": params.label_space.to_dict(),
        **params.header(),
        "parameters": count_parameters(params),
        "metadata": metadata or {},
    }
    if codec is not None:
        header["codec"] = codec.to_dict()
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        np.savez(f, header=np.array(json.dumps(header)), **params.to_arrays())
    return path


def load_model(path: Path) -> ModelFile:
    try:
        with np.load(path, allow_pickle=False) as data:
            if "header" not in data.files:
                raise DataFormatError("model file has no header entry", path)
            header = json.loads(str(data["header"]))
            arrays = {name: data[name] for name in data.files if name != "header"}
    except (OSError, ValueError) as e:
        raise DataFormatError(f"cannot read model file: {e}", path) from e
    if header.get("format") != FORMAT_TAG:
        raise DataFormatError(f"not an {FORMAT_TAG} file", path)
    kind = header.get("kind")
    if kind not in MODEL_KINDS:
        raise DataFormatError(f"unknown model kind {kind!r}", path)
    try:
        params = MODEL_KINDS[kind].from_arrays(
            LabelSpace.from_dict(header["label_space"]), header, arrays
        )
    except KeyError as e:
        raise DataFormatError(f"model file lacks entry {e}", path) from e
    codec = ObservationCodec.from_dict(header["codec"]) if "codec" in header else None
    return ModelFile(params, codec, header)
