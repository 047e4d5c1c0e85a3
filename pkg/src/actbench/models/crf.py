from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np

from actbench.data import Dataset, LabelSpace, SequenceInstance, decode_array
from actbench.errors import ConfigurationError, DomainError
from actbench.parallel import run_bounded

from .chain import expected_counts, forward_backward, path_score, viterbi_decode
from .lbfgs import LbfgsResult, minimize_lbfgs

logger = logging.getLogger("actbench")

GRADIENT_TOL = 1e-5


def _features(obs: SequenceInstance | np.ndarray) -> np.ndarray:
    x = obs.features if isinstance(obs, SequenceInstance) else np.asarray(obs, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise DomainError("observation sequence must be a non-empty (T, D) feature array")
    return x


def _finite(name: str, *arrays: np.ndarray) -> None:
    if not all(np.all(np.isfinite(a)) for a in arrays):
        raise DomainError(f"{name} weights must be finite")


@dataclass(frozen=True, eq=False)
class CrfParams:
    """Linear-chain CRF over combined labels.

    The log-potential of label j at step t is ``x_t · emit[:, j] + bias[j]``, plus
    ``init[j]`` at the first step and ``trans[i, j]`` from the previous label i.

    Attributes:
        label_space: Activity alphabets; J = ``label_space.combined_size``
        emit: Feature weights, shape (D, J)
        trans: Transition weights, shape (J, J)
        bias: Per-label weights, shape (J,)
        init: First-step weights, shape (J,)
    """

    kind = "crf"

    label_space: LabelSpace
    emit: np.ndarray
    trans: np.ndarray
    bias: np.ndarray
    init: np.ndarray

    def __post_init__(self) -> None:
        J = self.label_space.combined_size
        emit, trans, bias, init = (
            np.asarray(a, dtype=np.float64) for a in (self.emit, self.trans, self.bias, self.init)
        )
        if emit.ndim != 2 or emit.shape[1] != J:
            raise DomainError(f"emission weights must be (D, {J}), got {emit.shape}")
        if trans.shape != (J, J) or bias.shape != (J,) or init.shape != (J,):
            raise DomainError(f"transition ({J}, {J}), bias ({J},) and init ({J},) expected")
        _finite("CRF", emit, trans, bias, init)
        object.__setattr__(self, "emit", emit)
        object.__setattr__(self, "trans", trans)
        object.__setattr__(self, "bias", bias)
        object.__setattr__(self, "init", init)

    @property
    def n_features(self) -> int:
        return int(self.emit.shape[0])

    @classmethod
    def zeros(cls, label_space: LabelSpace, n_features: int) -> CrfParams:
        J = label_space.combined_size
        return cls(label_space, np.zeros((n_features, J)), np.zeros((J, J)), np.zeros(J), np.zeros(J))

    def log_unary(self, features: np.ndarray) -> np.ndarray:
        if features.shape[1] != self.n_features:
            raise DomainError(f"expected {self.n_features} features, got {features.shape[1]}")
        return features @ self.emit + self.bias

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.emit.ravel(), self.trans.ravel(), self.bias, self.init])

    @classmethod
    def from_vector(cls, label_space: LabelSpace, n_features: int, vector: np.ndarray) -> CrfParams:
        J = label_space.combined_size
        sizes = [n_features * J, J * J, J, J]
        if vector.shape != (sum(sizes),):
            raise DomainError(f"parameter vector must have {sum(sizes)} entries")
        emit, trans, bias, init = np.split(vector, np.cumsum(sizes)[:-1])
        return cls(label_space, emit.reshape(n_features, J), trans.reshape(J, J), bias, init)

    def header(self) -> dict:
        return {"D": self.n_features, "J": self.label_space.combined_size}

    def to_arrays(self) -> dict[str, np.ndarray]:
        return {"emit": self.emit, "trans": self.trans, "bias": self.bias, "init": self.init}

    @classmethod
    def from_arrays(
        cls, label_space: LabelSpace, header: dict, arrays: dict[str, np.ndarray]
    ) -> CrfParams:
        return cls(label_space, arrays["emit"], arrays["trans"], arrays["bias"], arrays["init"])


@dataclass(frozen=True, eq=False)
class FcrfParams:
    """Factorial CRF: one chain per resident plus co-temporal pair weights.

    Attributes:
        label_space: Activity alphabets
        emit: Per-chain feature weights, shapes (D, K^m)
        trans: Per-chain transition weights, shapes (K^m, K^m)
        bias: Per-chain label weights, shapes (K^m,)
        init: Per-chain first-step weights, shapes (K^m,)
        pair: Co-temporal weights for every resident pair m < m' (in
            ``itertools.combinations`` order), shapes (K^m, K^m')
    """

    kind = "fcrf"

    label_space: LabelSpace
    emit: tuple[np.ndarray, ...]
    trans: tuple[np.ndarray, ...]
    bias: tuple[np.ndarray, ...]
    init: tuple[np.ndarray, ...]
    pair: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        space = self.label_space
        blocks = {
            name: tuple(np.asarray(a, dtype=np.float64) for a in getattr(self, name))
            for name in ("emit", "trans", "bias", "init", "pair")
        }
        if any(len(blocks[n]) != space.residents for n in ("emit", "trans", "bias", "init")):
            raise DomainError("need one emission, transition, bias and init block per resident")
        if len(blocks["pair"]) != len(self.pairs):
            raise DomainError(f"need {len(self.pairs)} pair blocks for {space.residents} residents")
        D = blocks["emit"][0].shape[0]
        for m, k in enumerate(space.sizes):
            if blocks["emit"][m].shape != (D, k) or blocks["trans"][m].shape != (k, k):
                raise DomainError(f"chain {m}: emission ({D}, {k}) and transitions ({k}, {k})")
            if blocks["bias"][m].shape != (k,) or blocks["init"][m].shape != (k,):
                raise DomainError(f"chain {m}: bias and init must have {k} entries")
        for (m, n), w in zip(self.pairs, blocks["pair"]):
            if w.shape != (space.sizes[m], space.sizes[n]):
                raise DomainError(f"pair ({m}, {n}) must be {space.sizes[m]}x{space.sizes[n]}")
        _finite("fCRF", *(a for arrays in blocks.values() for a in arrays))
        for name, arrays in blocks.items():
            object.__setattr__(self, name, arrays)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return list(combinations(range(self.label_space.residents), 2))

    @property
    def n_features(self) -> int:
        return int(self.emit[0].shape[0])

    @cached_property
    def _projections(self) -> list[np.ndarray]:
        """One-hot maps from merged labels to chain labels, shapes (J, K^m)."""
        comps = self.label_space.components()
        return [np.eye(k)[comps[:, m]] for m, k in enumerate(self.label_space.sizes)]

    @classmethod
    def zeros(cls, label_space: LabelSpace, n_features: int) -> FcrfParams:
        sizes = label_space.sizes
        return cls(
            label_space,
            tuple(np.zeros((n_features, k)) for k in sizes),
            tuple(np.zeros((k, k)) for k in sizes),
            tuple(np.zeros(k) for k in sizes),
            tuple(np.zeros(k) for k in sizes),
            tuple(np.zeros((sizes[m], sizes[n])) for m, n in combinations(range(len(sizes)), 2)),
        )

    def to_combined(self) -> CrfParams:
        """Merged clique-chain CRF whose weights are the summed factored blocks."""
        P = self._projections
        emit = sum(e @ p.T for e, p in zip(self.emit, P))
        trans = sum(p @ w @ p.T for w, p in zip(self.trans, P))
        bias = sum(p @ b for b, p in zip(self.bias, P))
        bias = bias + sum(((P[m] @ w) * P[n]).sum(axis=1) for (m, n), w in zip(self.pairs, self.pair))
        init = sum(p @ b for b, p in zip(self.init, P))
        return CrfParams(self.label_space, emit, trans, bias, init)

    def project(self, grad: CrfParams) -> FcrfParams:
        """Chain-rule map of a merged-chain gradient onto the factored blocks."""
        P = self._projections
        return FcrfParams(
            self.label_space,
            tuple(grad.emit @ p for p in P),
            tuple(p.T @ grad.trans @ p for p in P),
            tuple(grad.bias @ p for p in P),
            tuple(grad.init @ p for p in P),
            tuple(P[m].T @ (grad.bias[:, None] * P[n]) for m, n in self.pairs),
        )

    def _blocks(self) -> list[np.ndarray]:
        return [*self.emit, *self.trans, *self.bias, *self.init, *self.pair]

    def to_vector(self) -> np.ndarray:
        return np.concatenate([b.ravel() for b in self._blocks()])

    @classmethod
    def from_vector(cls, label_space: LabelSpace, n_features: int, vector: np.ndarray) -> FcrfParams:
        template = cls.zeros(label_space, n_features)
        shapes = [b.shape for b in template._blocks()]
        sizes = [int(np.prod(s)) for s in shapes]
        if vector.shape != (sum(sizes),):
            raise DomainError(f"parameter vector must have {sum(sizes)} entries")
        parts = [p.reshape(s) for p, s in zip(np.split(vector, np.cumsum(sizes)[:-1]), shapes)]
        M = label_space.residents
        return cls(
            label_space,
            tuple(parts[:M]),
            tuple(parts[M : 2 * M]),
            tuple(parts[2 * M : 3 * M]),
            tuple(parts[3 * M : 4 * M]),
            tuple(parts[4 * M :]),
        )

    def header(self) -> dict:
        return {"D": self.n_features, "K": list(self.label_space.sizes)}

    def to_arrays(self) -> dict[str, np.ndarray]:
        arrays: dict[str, np.ndarray] = {}
        for name in ("emit", "trans", "bias", "init"):
            arrays.update({f"{name}_{m}": a for m, a in enumerate(getattr(self, name))})
        arrays.update({f"pair_{m}_{n}": w for (m, n), w in zip(self.pairs, self.pair)})
        return arrays

    @classmethod
    def from_arrays(
        cls, label_space: LabelSpace, header: dict, arrays: dict[str, np.ndarray]
    ) -> FcrfParams:
        M = label_space.residents
        blocks = {
            name: tuple(arrays[f"{name}_{m}"] for m in range(M))
            for name in ("emit", "trans", "bias", "init")
        }
        pair = tuple(arrays[f"pair_{m}_{n}"] for m, n in combinations(range(M), 2))
        return cls(label_space, pair=pair, **blocks)


# ---------------------------------------------------------------------------
# Inference
# ---------------------------------------------------------------------------


def crf_forward_backward(
    params: CrfParams, obs: SequenceInstance | np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """``(log Z, node marginals (T, J), edge marginals (T-1, J, J))``."""
    unary = params.log_unary(_features(obs))
    return forward_backward(params.init, params.trans, unary)


def crf_decode(params: CrfParams, obs: SequenceInstance | np.ndarray) -> np.ndarray:
    """Exact max-product path over combined labels, ties toward the lower index."""
    path, _ = viterbi_decode(params.init, params.trans, params.log_unary(_features(obs)))
    return path


def fcrf_decode(params: FcrfParams, obs: SequenceInstance | np.ndarray) -> np.ndarray:
    """Exact decoding on the merged chain; returns (T, M) labels."""
    return decode_array(crf_decode(params.to_combined(), obs), params.label_space)


def crf_log_likelihood(params: CrfParams, instance: SequenceInstance) -> float:
    """log p(labels | observations) of one instance."""
    x = _features(instance)
    unary = params.log_unary(x)
    log_z, _, _ = expected_counts(params.init, params.trans, unary)
    joint = instance.combined_labels(params.label_space)
    return path_score(params.init, params.trans, unary, joint) - log_z


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


def _instance_objective(params: CrfParams, instance: SequenceInstance) -> tuple[float, CrfParams]:
    x = _features(instance)
    J = params.label_space.combined_size
    y = instance.combined_labels(params.label_space)
    unary = params.log_unary(x)
    log_z, node, edges = expected_counts(params.init, params.trans, unary)
    nll = log_z - path_score(params.init, params.trans, unary, y)

    emp_emit = np.zeros((J, x.shape[1]))
    np.add.at(emp_emit, y, x)
    emp_init = np.zeros(J)
    emp_init[y[0]] = 1.0
    emp_trans = np.bincount(y[:-1] * J + y[1:], minlength=J * J).reshape(J, J)
    grad = CrfParams(
        params.label_space,
        x.T @ node - emp_emit.T,
        edges - emp_trans,
        node.sum(axis=0) - np.bincount(y, minlength=J),
        node[0] - emp_init,
    )
    return nll, grad


def crf_objective(
    params: CrfParams,
    batch: Dataset | Sequence[SequenceInstance],
    workers: int = 1,
) -> tuple[float, CrfParams]:
    """Negative conditional log-likelihood of ``batch`` and its gradient.

    The gradient is expected minus empirical feature counts. Per-instance terms are
    summed in instance order regardless of ``workers``.
    """
    instances = list(batch)
    if not instances:
        raise ConfigurationError("CRF objective needs at least one instance")
    parts = run_bounded(lambda inst: _instance_objective(params, inst), instances, workers)
    nll = 0.0
    vector = np.zeros_like(params.to_vector())
    for value, grad in parts:
        nll += value
        vector += grad.to_vector()
    return nll, CrfParams.from_vector(params.label_space, params.n_features, vector)


def fcrf_objective(
    params: FcrfParams,
    batch: Dataset | Sequence[SequenceInstance],
    workers: int = 1,
) -> tuple[float, FcrfParams]:
    """As :func:`crf_objective` through the merged chain, gradient projected to the factors."""
    nll, grad = crf_objective(params.to_combined(), batch, workers)
    return nll, params.project(grad)


def _check_train(train: Dataset, max_iter: int) -> None:
    if max_iter < 1:
        raise ConfigurationError(f"max_iter must be >= 1, got {max_iter}")
    if len(train) == 0:
        raise ConfigurationError("cannot train on an empty dataset")


def fit_crf(
    train: Dataset, max_iter: int = 1000, workers: int = 1
) -> tuple[CrfParams, LbfgsResult]:
    """Unregularised maximum likelihood from θ = 0; returns the optimiser result too."""
    _check_train(train, max_iter)
    space, D = train.label_space, train.n_features

    def objective(vector: np.ndarray) -> tuple[float, np.ndarray]:
        nll, grad = crf_objective(CrfParams.from_vector(space, D, vector), train, workers)
        return nll, grad.to_vector()

    result = minimize_lbfgs(objective, CrfParams.zeros(space, D).to_vector(), max_iter, GRADIENT_TOL)
    logger.info(
        "CRF: %d iterations, NLL %.4f, %s", result.n_iter, result.fun, result.message
    )
    return CrfParams.from_vector(space, D, result.x), result


def train_crf(train: Dataset, max_iter: int = 1000, workers: int = 1) -> CrfParams:
    return fit_crf(train, max_iter, workers)[0]


def fit_fcrf(
    train: Dataset, max_iter: int = 1000, workers: int = 1
) -> tuple[FcrfParams, LbfgsResult]:
    _check_train(train, max_iter)
    space, D = train.label_space, train.n_features

    def objective(vector: np.ndarray) -> tuple[float, np.ndarray]:
        nll, grad = fcrf_objective(FcrfParams.from_vector(space, D, vector), train, workers)
        return nll, grad.to_vector()

    result = minimize_lbfgs(objective, FcrfParams.zeros(space, D).to_vector(), max_iter, GRADIENT_TOL)
    logger.info(
        "fCRF: %d iterations, NLL %.4f, %s", result.n_iter, result.fun, result.message
    )
    return FcrfParams.from_vector(space, D, result.x), result


def train_fcrf(train: Dataset, max_iter: int = 1000, workers: int = 1) -> FcrfParams:
    return fit_fcrf(train, max_iter, workers)[0]
