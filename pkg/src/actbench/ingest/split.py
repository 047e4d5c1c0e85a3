from __future__ import annotations

import logging

import numpy as np

from actbench.config import SplitSpec
from actbench.data import Dataset, build_observation_codec
from actbench.errors import ConfigurationError

logger = logging.getLogger("actbench")


def split_by_days(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset, Dataset]:
    """Chronological train/val/test partition with a codec rebuilt from train only.

    Days beyond ``spec.total`` are left out.
    """
    if spec.total > len(dataset):
        raise ConfigurationError(
            f"split {spec.as_tuple()} needs {spec.total} days, dataset {dataset.name!r} "
            f"has {len(dataset)}"
        )
    days = dataset.instances
    train = days[: spec.train_days]
    val = days[spec.train_days : spec.train_days + spec.val_days]
    test = days[spec.train_days + spec.val_days : spec.total]
    if spec.total < len(dataset):
        logger.info(
            "Split %s uses %d of %d days; trailing days unused",
            dataset.name,
            spec.total,
            len(dataset),
        )

    rows = np.concatenate([inst.features for inst in train], axis=0)
    codec = build_observation_codec(rows, sensor_names=dataset.codec.sensor_names)
    train_ds, val_ds, test_ds = (
        Dataset(tuple(part), dataset.label_space, codec, name=dataset.name, notes=dataset.notes)
        for part in (train, val, test)
    )
    return train_ds, val_ds, test_ds
