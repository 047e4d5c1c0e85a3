from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from actbench.errors import ActbenchError, ConfigurationError, TrainingError
from actbench.parallel import run_bounded

from .metrics import Scores

logger = logging.getLogger("actbench")


@dataclass
class RepeatSummary:
    """Mean and population standard deviation of repeated runs.

    Attributes:
        mean: Mean per-resident accuracies and accuracy_all
        std: Standard deviations matching ``mean``
        runs: Runs that finished
        excluded: Runs that diverged and were left out
        errors: Messages of the excluded runs
    """

    mean: Scores
    std: Scores
    runs: int
    excluded: int = 0
    errors: list[str] = field(default_factory=list)


def repeated_runs(
    run: Callable[[int], Scores], n: int, seed: int = 0, workers: int = 1, label: str = "repeats"
) -> RepeatSummary:
    """Call ``run(seed + r)`` for r = 0..n-1 and aggregate the test scores."""
    if n < 1:
        raise ConfigurationError(f"repeat count must be >= 1, got {n}")

    def one(r: int) -> Scores | str:
        try:
            return run(seed + r)
        except ActbenchError as e:
            logger.warning("%s: run with seed %d excluded: %s", label, seed + r, e)
            return str(e)

    outcomes = run_bounded(one, list(range(n)), workers)
    done = [o for o in outcomes if isinstance(o, Scores)]
    errors = [o for o in outcomes if isinstance(o, str)]
    if not done:
        raise TrainingError(f"{label}: all {n} runs diverged")
    table = np.stack([s.as_vector() for s in done])
    if (table == table[0]).all():
        # identical runs: report them exactly, free of summation round-off
        mean, std = table[0], np.zeros(table.shape[1])
    else:
        mean, std = table.mean(axis=0), table.std(axis=0)
    return RepeatSummary(
        mean=Scores(tuple(float(v) for v in mean[:-1]), float(mean[-1])),
        std=Scores(tuple(float(v) for v in std[:-1]), float(std[-1])),
        runs=len(done),
        excluded=len(errors),
        errors=errors,
    )
