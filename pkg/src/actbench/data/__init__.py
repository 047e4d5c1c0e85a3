from .canonical import load_canonical, write_canonical
from .dataset import Dataset, SequenceInstance
from .labels import (
    ActivityFrame,
    LabelSpace,
    decode_array,
    decode_combined,
    encode_array,
    encode_combined,
)
from .observations import Observation, ObservationCodec, build_observation_codec

__all__ = [
    "ActivityFrame",
    "Dataset",
    "LabelSpace",
    "Observation",
    "ObservationCodec",
    "SequenceInstance",
    "build_observation_codec",
    "decode_array",
    "decode_combined",
    "encode_array",
    "encode_combined",
    "load_canonical",
    "write_canonical",
]
