from __future__ import annotations

import numpy as np
import pytest

from actbench.config import HMM_ALPHAS, RNN_HIDDEN, RNN_LEARNING_RATES
from actbench.errors import ConfigurationError, SelectionError, TrainingError
from actbench.evaluate import Grid, GridPoint, Scores, grid_search, repeated_runs


class TestGrid:
    def test_default_rnn_grid_size(self):
        grid = Grid(hidden=RNN_HIDDEN, learning_rates=RNN_LEARNING_RATES)
        assert len(grid.points()) == 45
        assert grid.learning_rates[0] == pytest.approx(1e-4)
        assert grid.learning_rates[-1] == pytest.approx(1.0)

    def test_default_hmm_grid(self):
        points = Grid(alphas=HMM_ALPHAS).points()
        assert [p.alpha for p in points] == [1e-6, 1e-5, 1e-4, 1e-3, 1e-2]
        assert all(p.hidden is None and p.learning_rate is None for p in points)

    def test_empty_grid_is_a_single_point(self):
        assert Grid().points() == [GridPoint()]

    def test_rejects_non_positive_values(self):
        with pytest.raises(ConfigurationError):
            Grid(alphas=(0.0, 1e-3))

    def test_expand_past_upper_boundary(self):
        grid = Grid(alphas=(1e-3, 1e-2))
        larger = grid.expand(GridPoint(alpha=1e-2))
        assert larger.alphas == pytest.approx((1e-3, 1e-2, 1e-1))

    def test_expand_past_lower_boundary(self):
        grid = Grid(hidden=(10, 50), learning_rates=(0.01, 0.1))
        larger = grid.expand(GridPoint(hidden=10, learning_rate=0.01))
        assert larger.learning_rates == pytest.approx((0.001, 0.01, 0.1))
        assert larger.hidden == (10, 50)

    def test_single_value_axis_expands_both_ways(self):
        larger = Grid(alphas=(1e-3,)).expand(GridPoint(alpha=1e-3))
        assert larger.alphas == pytest.approx((1e-4, 1e-3, 1e-2))

    def test_interior_optimum_does_not_expand(self):
        grid = Grid(alphas=(1e-4, 1e-3, 1e-2))
        assert grid.expand(GridPoint(alpha=1e-3)) is None


class TestGridSearch:
    def test_ties_prefer_smaller_hidden(self):
        grid = Grid(hidden=(10, 50), learning_rates=(0.01,))
        result = grid_search(lambda p: 0.8, grid, max_expansions=0)
        assert result.best == GridPoint(hidden=10, learning_rate=0.01)

    def test_ties_prefer_smaller_rate_then_larger_alpha(self):
        grid = Grid(learning_rates=(0.01, 0.1), alphas=(1e-3, 1e-2))
        result = grid_search(lambda p: 0.5, grid, max_expansions=0)
        assert result.best == GridPoint(learning_rate=0.01, alpha=1e-2)

    def test_picks_highest_score(self):
        grid = Grid(alphas=(1e-4, 1e-3, 1e-2))
        result = grid_search(lambda p: -abs(np.log10(p.alpha) + 3), grid)
        assert result.best.alpha == 1e-3
        assert result.expansions == 0
        assert len(result.results) == 3

    def test_boundary_optimum_expands_at_most_twice(self):
        grid = Grid(alphas=(1e-3, 1e-2))
        result = grid_search(lambda p: p.alpha, grid, max_expansions=2)
        assert result.expansions == 2
        assert result.best.alpha == pytest.approx(1.0)
        assert len(result.results) == 4

    def test_expansion_finds_outside_optimum(self):
        grid = Grid(alphas=(1e-4, 1e-3))
        result = grid_search(lambda p: -abs(np.log10(p.alpha) + 2), grid)
        assert result.best.alpha == pytest.approx(1e-2)
        assert result.expansions == 2

    def test_single_value_axis_finds_lower_optimum(self):
        result = grid_search(lambda p: -abs(np.log10(p.alpha) + 4), Grid(alphas=(1e-3,)))
        assert result.best.alpha == pytest.approx(1e-4)
        tried = sorted(r.point.alpha for r in result.results)
        assert tried[0] == pytest.approx(1e-5)

    def test_failed_points_are_recorded(self):
        def evaluate(point):
            if point.hidden == 10:
                raise TrainingError("diverged", step=3)
            return 0.5

        result = grid_search(evaluate, Grid(hidden=(10, 50)))
        assert result.best.hidden == 50
        failed = [r for r in result.results if r.score is None]
        assert len(failed) == 1 and "diverged" in failed[0].error

    def test_all_points_failing(self):
        def evaluate(point):
            raise TrainingError("diverged")

        with pytest.raises(SelectionError):
            grid_search(evaluate, Grid(alphas=(1e-3, 1e-2)))

    def test_deterministic_with_workers(self):
        grid = Grid(hidden=(10, 50, 100), learning_rates=(0.01, 0.1, 1.0))

        def evaluate(p):
            return float(np.sin(p.hidden * p.learning_rate))

        a = grid_search(evaluate, grid, workers=1)
        b = grid_search(evaluate, grid, workers=4)
        assert a.best == b.best and a.best_score == b.best_score
        assert [r.point for r in a.results] == [r.point for r in b.results]


def _scores(value: float) -> Scores:
    return Scores((value, value / 2), value / 4)


class TestRepeatedRuns:
    def test_single_run(self):
        summary = repeated_runs(lambda seed: _scores(0.8), 1)
        assert summary.mean == _scores(0.8)
        assert summary.std == Scores((0.0, 0.0), 0.0)
        assert summary.runs == 1

    def test_deterministic_runs_have_zero_spread(self):
        summary = repeated_runs(lambda seed: _scores(0.3), 7, workers=3)
        assert summary.mean == _scores(0.3)
        assert summary.std.all == 0.0 and summary.std.residents == (0.0, 0.0)

    def test_seeds_and_population_std(self):
        seen = []

        def run(seed):
            seen.append(seed)
            return _scores(seed / 10)

        summary = repeated_runs(run, 4, seed=3)
        assert sorted(seen) == [3, 4, 5, 6]
        values = np.array([0.3, 0.4, 0.5, 0.6])
        assert summary.mean.residents[0] == pytest.approx(values.mean())
        assert summary.std.residents[0] == pytest.approx(values.std(ddof=0))

    def test_divergent_runs_are_excluded(self):
        def run(seed):
            if seed % 2:
                raise TrainingError("loss diverged")
            return _scores(0.6)

        summary = repeated_runs(run, 5)
        assert summary.runs == 3 and summary.excluded == 2
        assert summary.mean == _scores(0.6)
        assert all("diverged" in e for e in summary.errors)

    def test_every_run_diverging(self):
        def run(seed):
            raise TrainingError("loss diverged")

        with pytest.raises(TrainingError):
            repeated_runs(run, 3)

    def test_rejects_zero_repeats(self):
        with pytest.raises(ConfigurationError):
            repeated_runs(lambda seed: _scores(0.5), 0)
