from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace
from itertools import product

from actbench.errors import ActbenchError, ConfigurationError, SelectionError
from actbench.parallel import run_bounded

logger = logging.getLogger("actbench")


@dataclass(frozen=True)
class GridPoint:
    """One hyper-parameter setting; unused axes stay None."""

    hidden: int | None = None
    learning_rate: float | None = None
    alpha: float | None = None

    def tie_key(self, score: float) -> tuple:
        """Higher score first, then smaller H, smaller η, larger α."""
        return (
            -score,
            self.hidden if self.hidden is not None else 0,
            self.learning_rate if self.learning_rate is not None else 0.0,
            -(self.alpha if self.alpha is not None else 0.0),
        )

    def as_dict(self) -> dict[str, float | int]:
        return {k: v for k, v in vars(self).items() if v is not None}


@dataclass(frozen=True)
class Grid:
    """Axes of a search grid. Empty axes are not searched.

    ``alphas`` and ``learning_rates`` are log-spaced and may be extended past a boundary;
    ``hidden`` is a fixed set.
    """

    hidden: tuple[int, ...] = ()
    learning_rates: tuple[float, ...] = ()
    alphas: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        for name in ("hidden", "learning_rates", "alphas"):
            values = tuple(sorted(set(getattr(self, name))))
            if any(v <= 0 for v in values):
                raise ConfigurationError(f"grid axis {name} must hold positive values")
            object.__setattr__(self, name, values)

    def points(self) -> list[GridPoint]:
        axes = [self.hidden or (None,), self.learning_rates or (None,), self.alphas or (None,)]
        return [GridPoint(h, lr, a) for h, lr, a in product(*axes)]

    def expand(self, best: GridPoint) -> Grid | None:
        """Grid extended one log-step past every boundary ``best`` sits on, if any.

        A single-value axis sits on both boundaries and grows in both directions.
        """
        changes = {}
        for axis, value in (("learning_rates", best.learning_rate), ("alphas", best.alpha)):
            values = getattr(self, axis)
            if value is None or len(values) < 1:
                continue
            ratio = values[1] / values[0] if len(values) > 1 else 10.0
            if value == values[0]:
                values = (values[0] / ratio, *values)
            if value == values[-1]:
                values = (*values, values[-1] * ratio)
            if values != getattr(self, axis):
                changes[axis] = values
        return replace(self, **changes) if changes else None


@dataclass
class GridResult:
    point: GridPoint
    score: float | None
    error: str | None = None


@dataclass
class SelectionResult:
    """Outcome of :func:`grid_search`.

    Attributes:
        best: Selected setting
        best_score: Its validation score
        results: Every evaluated point, in evaluation order
        expansions: Boundary expansions performed
    """

    best: GridPoint
    best_score: float
    results: list[GridResult] = field(default_factory=list)
    expansions: int = 0


def _best(results: Sequence[GridResult]) -> GridResult | None:
    ok = [r for r in results if r.score is not None]
    return min(ok, key=lambda r: r.point.tie_key(r.score)) if ok else None


def grid_search(
    evaluate: Callable[[GridPoint], float],
    grid: Grid,
    workers: int = 1,
    max_expansions: int = 2,
    label: str = "grid",
) -> SelectionResult:
    """Score every grid point and return the best.

    ``evaluate`` trains one model and returns its validation score. A point whose
    training raises an :class:`ActbenchError` is recorded as failed. When the winner
    sits on the boundary of a log-spaced axis the grid grows one step in that
    direction, at most ``max_expansions`` times.
    """

    def run(point: GridPoint) -> GridResult:
        try:
            return GridResult(point, float(evaluate(point)))
        except (ActbenchError, FloatingPointError) as e:
            logger.warning("%s: point %s failed: %s", label, point.as_dict(), e)
            return GridResult(point, None, str(e))

    results: list[GridResult] = []
    pending = grid.points()
    expansions = 0
    while True:
        results += run_bounded(run, pending, workers)
        best = _best(results)
        if best is None:
            raise SelectionError(f"{label}: all {len(results)} grid points failed")
        larger = grid.expand(best.point) if expansions < max_expansions else None
        if larger is None:
            break
        seen = {r.point for r in results}
        pending = [p for p in larger.points() if p not in seen]
        grid = larger
        expansions += 1
        logger.info("%s: optimum on grid boundary, expanding (%d)", label, expansions)
        if not pending:
            break

    logger.info("%s: selected %s (score %.4f)", label, best.point.as_dict(), best.score)
    return SelectionResult(best.point, best.score, results, expansions)
