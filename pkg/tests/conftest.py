"""Shared fixtures: toy corpora, brute-force chain oracles and a gradient checker."""

from __future__ import annotations

import itertools
from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest
import yaml
from scipy.special import logsumexp

from actbench.data import Dataset, LabelSpace, SequenceInstance


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(42)


@pytest.fixture
def make_dataset() -> Callable[..., Dataset]:
    """Random binary-feature corpus with uniformly drawn labels."""

    def build(
        rng: np.random.Generator,
        sizes: tuple[int, ...] = (2, 3),
        n_features: int = 3,
        days: int = 4,
        steps: int = 6,
        name: str = "toy",
    ) -> Dataset:
        instances = []
        for d in range(days):
            features = rng.integers(0, 2, size=(steps, n_features)).astype(np.float64)
            labels = np.stack([rng.integers(0, k, size=steps) for k in sizes], axis=1)
            instances.append(SequenceInstance(f"day-{d + 1:02d}", features, labels))
        return Dataset.from_instances(instances, LabelSpace(tuple(sizes)), name=name)

    return build


@pytest.fixture
def signature_dataset() -> Callable[..., Dataset]:
    """Corpus where every combined label has its own one-hot sensor signature."""

    def build(
        sizes: tuple[int, ...] = (2, 2), days: int = 4, steps: int = 12, seed: int = 0
    ) -> Dataset:
        gen = np.random.default_rng(seed)
        space = LabelSpace(tuple(sizes))
        J = space.combined_size
        instances = []
        for d in range(days):
            joint = gen.integers(0, J, size=steps)
            features = np.eye(J)[joint]
            labels = space.components()[joint]
            instances.append(SequenceInstance(f"day-{d + 1:02d}", features, labels))
        return Dataset.from_instances(instances, space, name="signature")

    return build


def _path_scores(log_init, log_trans, log_unary, paths: np.ndarray) -> np.ndarray:
    """Scores of every row of (P, T) ``paths``."""
    T = paths.shape[1]
    scores = log_init[paths[:, 0]] + log_unary[np.arange(T), paths].sum(axis=1)
    return scores + log_trans[paths[:, :-1], paths[:, 1:]].sum(axis=1)


class ChainOracle:
    """Exhaustive evaluation of a first-order chain over all J^T paths."""

    def __init__(self, log_init: np.ndarray, log_trans: np.ndarray, log_unary: np.ndarray):
        T, J = log_unary.shape
        self.paths = np.array(list(itertools.product(range(J), repeat=T)), dtype=np.int64)
        self.scores = _path_scores(log_init, log_trans, log_unary, self.paths)
        self.T, self.J = T, J

    @property
    def best(self) -> np.ndarray:
        return self.paths[int(np.argmax(self.scores))]

    @property
    def log_z(self) -> float:
        return float(logsumexp(self.scores))

    def node_marginals(self) -> np.ndarray:
        weights = np.exp(self.scores - self.log_z)
        node = np.zeros((self.T, self.J))
        for p, w in zip(self.paths, weights):
            node[np.arange(self.T), p] += w
        return node

    def edge_marginals(self) -> np.ndarray:
        weights = np.exp(self.scores - self.log_z)
        edge = np.zeros((self.T - 1, self.J, self.J))
        for p, w in zip(self.paths, weights):
            edge[np.arange(self.T - 1), p[:-1], p[1:]] += w
        return edge


@pytest.fixture
def chain_oracle() -> type[ChainOracle]:
    return ChainOracle


@pytest.fixture
def check_gradient() -> Callable[..., None]:
    """Compare an analytic gradient with central differences on random coordinates."""

    def check(
        fun: Callable[[np.ndarray], float],
        x: np.ndarray,
        grad: np.ndarray,
        rng: np.random.Generator,
        n_coords: int = 20,
        h: float = 1e-5,
        rtol: float = 1e-6,
        atol: float = 1e-8,
    ) -> None:
        coords = rng.choice(x.size, size=min(n_coords, x.size), replace=False)
        numeric = []
        for i in coords:
            step = np.zeros_like(x)
            step[i] = h
            numeric.append((fun(x + step) - fun(x - step)) / (2 * h))
        np.testing.assert_allclose(np.array(numeric), grad[coords], rtol=rtol, atol=atol)

    return check


@pytest.fixture
def toy_benchmark(tmp_path: Path) -> Callable[..., Path]:
    """A synthetic corpus plus a benchmark file with small grids; returns the file."""

    def build(
        models: list[str],
        split: tuple[int, int, int] = (3, 1, 1),
        repeats: int = 2,
        sizes: tuple[int, ...] = (2, 2),
    ) -> Path:
        synth = {"sizes": list(sizes), "symbols": 4, "steps": 40, "days": 5, "seed": 3}
        (tmp_path / "toy.yaml").write_text(yaml.safe_dump({"synth": synth}))
        config = {
            "datasets": [
                {"name": "toy", "format": "synth", "path": "toy.yaml", "split": list(split)}
            ],
            "models": models,
            "selection": {
                "hmm_alphas": [1e-3, 1e-2],
                "rnn_hidden": [4],
                "rnn_learning_rates": [0.1],
                "crf_max_iter": 30,
                "max_expansions": 0,
                "rnn_max_epochs": 5,
                "rnn_patience": 2,
            },
            "run": {"seed": 0, "repeats": repeats, "workers": 1, "out": str(tmp_path / "out")},
        }
        path = tmp_path / "bench.yaml"
        path.write_text(yaml.safe_dump(config))
        return path

    return build
