from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property, singledispatch

import numpy as np

from actbench.data import Dataset, LabelSpace, SequenceInstance, decode_array
from actbench.errors import ConfigurationError, DomainError

from .chain import path_score, viterbi_decode

logger = logging.getLogger("actbench")

_ROW_TOL = 1e-9


def _check_stochastic(name: str, table: np.ndarray) -> None:
    if (table < 0).any() or not np.all(np.abs(table.sum(axis=-1) - 1.0) <= _ROW_TOL):
        raise DomainError(f"{name} rows must be non-negative and sum to 1")


def _log(table: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(table)


def _smooth(counts: np.ndarray, alpha: float) -> np.ndarray:
    """(count + α) / (row total + α · width), row-wise over the last axis."""
    counts = counts.astype(np.float64)
    width = counts.shape[-1]
    return (counts + alpha) / (counts.sum(axis=-1, keepdims=True) + alpha * width)


def _symbols(obs: SequenceInstance | np.ndarray) -> np.ndarray:
    symbols = obs.symbols if isinstance(obs, SequenceInstance) else np.asarray(obs, dtype=np.int64)
    if symbols.ndim != 1 or symbols.shape[0] < 1:
        raise DomainError("observation sequence must be a non-empty 1-D symbol array")
    return symbols


@dataclass(frozen=True, eq=False)
class HmmParams:
    """Combined-label HMM over J = ∏K^m joint activities.

    Attributes:
        label_space: Activity alphabets; J = ``label_space.combined_size``
        prior: Initial distribution, shape (J,)
        transition: Row-stochastic transitions, shape (J, J)
        emission: Row-stochastic emission over S symbols plus UNK, shape (J, S+1)
        alpha: Laplace smoothing factor used in training (0 for hand-built tables)
    """

    kind = "hmm"

    label_space: LabelSpace
    prior: np.ndarray
    transition: np.ndarray
    emission: np.ndarray
    alpha: float = 0.0

    def __post_init__(self) -> None:
        J = self.label_space.combined_size
        prior = np.asarray(self.prior, dtype=np.float64)
        transition = np.asarray(self.transition, dtype=np.float64)
        emission = np.asarray(self.emission, dtype=np.float64)
        if prior.shape != (J,) or transition.shape != (J, J):
            raise DomainError(f"prior must be ({J},) and transition ({J}, {J})")
        if emission.ndim != 2 or emission.shape[0] != J or emission.shape[1] < 1:
            raise DomainError(f"emission must be ({J}, S+1)")
        _check_stochastic("prior", prior)
        _check_stochastic("transition", transition)
        _check_stochastic("emission", emission)
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "transition", transition)
        object.__setattr__(self, "emission", emission)

    @property
    def n_states(self) -> int:
        return int(self.prior.shape[0])

    @property
    def n_symbols(self) -> int:
        """Emission width including the UNK column."""
        return int(self.emission.shape[1])

    @cached_property
    def log_prior(self) -> np.ndarray:
        return _log(self.prior)

    @cached_property
    def log_transition(self) -> np.ndarray:
        return _log(self.transition)

    @cached_property
    def log_emission(self) -> np.ndarray:
        return _log(self.emission)

    def log_unary(self, symbols: np.ndarray) -> np.ndarray:
        if symbols.max(initial=0) >= self.n_symbols or symbols.min(initial=0) < 0:
            raise DomainError(f"symbol id outside [0, {self.n_symbols})")
        return self.log_emission[:, symbols].T

    def header(self) -> dict:
        return {"alpha": self.alpha, "J": self.n_states, "S": self.n_symbols - 1}

    def to_arrays(self) -> dict[str, np.ndarray]:
        return {"prior": self.prior, "transition": self.transition, "emission": self.emission}

    @classmethod
    def from_arrays(
        cls, label_space: LabelSpace, header: dict, arrays: dict[str, np.ndarray]
    ) -> HmmParams:
        return cls(
            label_space,
            arrays["prior"],
            arrays["transition"],
            arrays["emission"],
            alpha=float(header.get("alpha", 0.0)),
        )


@dataclass(frozen=True, eq=False)
class FhmmParams:
    """Factorial HMM with cross dependencies.

    Each resident's next activity conditions on the full previous joint state; the
    emission conditions on the joint state.

    Attributes:
        label_space: Activity alphabets
        priors: Per-resident initial distributions, shapes (K^m,)
        transitions: Per-resident cross transitions, shapes (J, K^m)
        emission: Joint-state emission over S symbols plus UNK, shape (J, S+1)
        alpha: Laplace smoothing factor used in training
    """

    kind = "fhmm"

    label_space: LabelSpace
    priors: tuple[np.ndarray, ...]
    transitions: tuple[np.ndarray, ...]
    emission: np.ndarray
    alpha: float = 0.0

    def __post_init__(self) -> None:
        space = self.label_space
        J = space.combined_size
        priors = tuple(np.asarray(p, dtype=np.float64) for p in self.priors)
        transitions = tuple(np.asarray(a, dtype=np.float64) for a in self.transitions)
        emission = np.asarray(self.emission, dtype=np.float64)
        if len(priors) != space.residents or len(transitions) != space.residents:
            raise DomainError("need one prior and one transition table per resident")
        for m, (p, a, k) in enumerate(zip(priors, transitions, space.sizes)):
            if p.shape != (k,) or a.shape != (J, k):
                raise DomainError(f"resident {m}: prior ({k},) and transitions ({J}, {k}) expected")
            _check_stochastic(f"prior {m}", p)
            _check_stochastic(f"transitions {m}", a)
        if emission.ndim != 2 or emission.shape[0] != J:
            raise DomainError(f"emission must be ({J}, S+1)")
        _check_stochastic("emission", emission)
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "transitions", transitions)
        object.__setattr__(self, "emission", emission)

    @property
    def n_symbols(self) -> int:
        return int(self.emission.shape[1])

    @cached_property
    def log_prior(self) -> np.ndarray:
        """Σ_m log π_m(j_m) for every joint state j."""
        comps = self.label_space.components()
        return sum(_log(p)[comps[:, m]] for m, p in enumerate(self.priors))

    @cached_property
    def log_transition(self) -> np.ndarray:
        """Σ_m log A_m(i → j_m) for every pair of joint states."""
        comps = self.label_space.components()
        return sum(_log(a)[:, comps[:, m]] for m, a in enumerate(self.transitions))

    @cached_property
    def log_emission(self) -> np.ndarray:
        return _log(self.emission)

    def log_unary(self, symbols: np.ndarray) -> np.ndarray:
        if symbols.max(initial=0) >= self.n_symbols or symbols.min(initial=0) < 0:
            raise DomainError(f"symbol id outside [0, {self.n_symbols})")
        return self.log_emission[:, symbols].T

    def to_hmm(self) -> HmmParams:
        """Product construction A(i, j) = ∏_m A_m(i → j_m), π(j) = ∏_m π_m(j_m)."""
        prior = np.exp(self.log_prior)
        transition = np.exp(self.log_transition)
        return HmmParams(
            self.label_space,
            prior / prior.sum(),
            transition / transition.sum(axis=1, keepdims=True),
            self.emission,
            alpha=self.alpha,
        )

    def header(self) -> dict:
        return {"alpha": self.alpha, "S": self.n_symbols - 1}

    def to_arrays(self) -> dict[str, np.ndarray]:
        arrays = {f"prior_{m}": p for m, p in enumerate(self.priors)}
        arrays.update({f"transition_{m}": a for m, a in enumerate(self.transitions)})
        arrays["emission"] = self.emission
        return arrays

    @classmethod
    def from_arrays(
        cls, label_space: LabelSpace, header: dict, arrays: dict[str, np.ndarray]
    ) -> FhmmParams:
        M = label_space.residents
        return cls(
            label_space,
            tuple(arrays[f"prior_{m}"] for m in range(M)),
            tuple(arrays[f"transition_{m}"] for m in range(M)),
            arrays["emission"],
            alpha=float(header.get("alpha", 0.0)),
        )


def _check_training(train: Dataset, alpha: float) -> None:
    if alpha <= 0:
        raise ConfigurationError(f"smoothing factor must be > 0, got {alpha}")
    if len(train) == 0:
        raise ConfigurationError("cannot train on an empty dataset")


def _emission_counts(train: Dataset) -> np.ndarray:
    J = train.label_space.combined_size
    width = train.codec.size + 1
    counts = np.zeros(J * width, dtype=np.int64)
    for inst in train:
        joint = inst.combined_labels(train.label_space)
        counts += np.bincount(joint * width + inst.symbols, minlength=J * width)
    return counts.reshape(J, width)


def train_hmm(train: Dataset, alpha: float) -> HmmParams:
    """Laplace-smoothed maximum-likelihood estimates of prior, transitions and emission."""
    _check_training(train, alpha)
    J = train.label_space.combined_size
    prior = np.zeros(J, dtype=np.int64)
    transition = np.zeros(J * J, dtype=np.int64)
    for inst in train:
        joint = inst.combined_labels(train.label_space)
        prior[joint[0]] += 1
        transition += np.bincount(joint[:-1] * J + joint[1:], minlength=J * J)
    emission = _emission_counts(train)
    logger.debug("HMM counts: %d days, J=%d, S=%d, alpha=%g", len(train), J, train.codec.size, alpha)
    return HmmParams(
        train.label_space,
        _smooth(prior, alpha),
        _smooth(transition.reshape(J, J), alpha),
        _smooth(emission, alpha),
        alpha=alpha,
    )


def train_fhmm(train: Dataset, alpha: float) -> FhmmParams:
    """As :func:`train_hmm`, counting π_m from first frames and A_m from (a^{t-1} → a^{m,t})."""
    _check_training(train, alpha)
    space = train.label_space
    J = space.combined_size
    priors = [np.zeros(k, dtype=np.int64) for k in space.sizes]
    transitions = [np.zeros(J * k, dtype=np.int64) for k in space.sizes]
    for inst in train:
        joint = inst.combined_labels(space)
        for m, k in enumerate(space.sizes):
            priors[m][inst.labels[0, m]] += 1
            transitions[m] += np.bincount(joint[:-1] * k + inst.labels[1:, m], minlength=J * k)
    return FhmmParams(
        space,
        tuple(_smooth(p, alpha) for p in priors),
        tuple(_smooth(a.reshape(J, k), alpha) for a, k in zip(transitions, space.sizes)),
        _smooth(_emission_counts(train), alpha),
        alpha=alpha,
    )


def viterbi(params: HmmParams, obs: SequenceInstance | np.ndarray) -> np.ndarray:
    """Most probable combined-state path, ties toward the lower state index."""
    symbols = _symbols(obs)
    path, _ = viterbi_decode(params.log_prior, params.log_transition, params.log_unary(symbols))
    return path


def viterbi_fhmm(params: FhmmParams, obs: SequenceInstance | np.ndarray) -> np.ndarray:
    """Exact joint-space Viterbi under the factored transitions; returns (T, M) labels."""
    symbols = _symbols(obs)
    path, _ = viterbi_decode(params.log_prior, params.log_transition, params.log_unary(symbols))
    return decode_array(path, params.label_space)


@singledispatch
def hmm_log_likelihood(params, instance: SequenceInstance) -> float:
    """Joint log-probability of an instance's observations and labels."""
    raise TypeError(f"no log-likelihood for {type(params).__name__}")


@hmm_log_likelihood.register
def _(params: HmmParams, instance: SequenceInstance) -> float:
    joint = instance.combined_labels(params.label_space)
    symbols = _symbols(instance)
    return path_score(params.log_prior, params.log_transition, params.log_unary(symbols), joint)


@hmm_log_likelihood.register
def _(params: FhmmParams, instance: SequenceInstance) -> float:
    joint = instance.combined_labels(params.label_space)
    symbols = _symbols(instance)
    score = params.log_emission[joint, symbols].sum()
    for m, (p, a) in enumerate(zip(params.priors, params.transitions)):
        score += _log(p)[instance.labels[0, m]]
        score += _log(a)[joint[:-1], instance.labels[1:, m]].sum()
    return float(score)
