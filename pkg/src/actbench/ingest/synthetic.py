from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from actbench.config import load_yaml
from actbench.data import Dataset, LabelSpace, ObservationCodec, SequenceInstance
from actbench.errors import ConfigurationError
from actbench.models.hmm import FhmmParams, HmmParams

logger = logging.getLogger("actbench")

_ROW_TOL = 1e-12


def _check_rows(name: str, matrix: np.ndarray) -> None:
    if (matrix < 0).any() or not np.all(np.abs(matrix.sum(axis=-1) - 1.0) <= _ROW_TOL):
        raise ConfigurationError(f"{name} rows must be non-negative and sum to 1")


@dataclass(frozen=True, eq=False)
class SynthConfig:
    """Cross-dependent factorial HMM used to sample synthetic corpora.

    Attributes:
        sizes: Activity alphabet size K^m of every resident
        priors: Initial distribution of every resident, shapes (K^m,)
        transitions: Cross transitions of every resident, shapes (J, K^m); row = previous joint state
        emission: Joint-state emission over sensor states, shape (J, S)
        n_features: Feature count D; sensor state s is emitted as the D-bit binary code of s
        steps: Time steps T per day
        days: Number of day instances
        noise: Probability ε that an emitted state is replaced by a uniform one
        seed: Sampler seed
    """

    sizes: tuple[int, ...]
    priors: tuple[np.ndarray, ...]
    transitions: tuple[np.ndarray, ...]
    emission: np.ndarray
    n_features: int
    steps: int
    days: int
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        space = LabelSpace(self.sizes)
        object.__setattr__(self, "sizes", space.sizes)
        J = space.combined_size
        priors = tuple(np.asarray(p, dtype=np.float64) for p in self.priors)
        transitions = tuple(np.asarray(a, dtype=np.float64) for a in self.transitions)
        emission = np.asarray(self.emission, dtype=np.float64)
        if len(priors) != space.residents or len(transitions) != space.residents:
            raise ConfigurationError("need one prior and one transition table per resident")
        for m, (p, a, k) in enumerate(zip(priors, transitions, space.sizes)):
            if p.shape != (k,) or a.shape != (J, k):
                raise ConfigurationError(f"resident {m}: prior ({k},) and transitions ({J}, {k})")
            _check_rows(f"prior {m}", p)
            _check_rows(f"transitions {m}", a)
        if emission.ndim != 2 or emission.shape[0] != J:
            raise ConfigurationError(f"emission must have shape ({J}, S)")
        _check_rows("emission", emission)
        if 2**self.n_features < emission.shape[1]:
            raise ConfigurationError(
                f"{self.n_features} binary features cannot encode {emission.shape[1]} sensor states"
            )
        if not 0.0 <= self.noise < 1.0:
            raise ConfigurationError(f"noise must lie in [0, 1), got {self.noise}")
        if self.steps < 1 or self.days < 1:
            raise ConfigurationError("steps and days must be >= 1")
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "transitions", transitions)
        object.__setattr__(self, "emission", emission)

    @property
    def label_space(self) -> LabelSpace:
        return LabelSpace(self.sizes)

    @property
    def n_symbols(self) -> int:
        return int(self.emission.shape[1])

    def symbol_features(self) -> np.ndarray:
        """Binary code of every sensor state, shape (S, D)."""
        s = np.arange(self.n_symbols)[:, None]
        bits = (s >> np.arange(self.n_features - 1, -1, -1)[None, :]) & 1
        return bits.astype(np.float64)

    def save(self, path: Path) -> None:
        header = {
            "sizes": list(self.sizes),
            "n_features": self.n_features,
            "steps": self.steps,
            "days": self.days,
            "noise": self.noise,
            "seed": self.seed,
        }
        arrays = {f"prior_{m}": p for m, p in enumerate(self.priors)}
        arrays.update({f"transition_{m}": a for m, a in enumerate(self.transitions)})
        with open(path, "wb") as f:
            np.savez(f, header=np.array(json.dumps(header)), emission=self.emission, **arrays)

    @classmethod
    def load(cls, path: Path) -> SynthConfig:
        with np.load(path, allow_pickle=False) as data:
            header = json.loads(str(data["header"]))
            M = len(header["sizes"])
            return cls(
                sizes=tuple(header["sizes"]),
                priors=tuple(data[f"prior_{m}"] for m in range(M)),
                transitions=tuple(data[f"transition_{m}"] for m in range(M)),
                emission=data["emission"],
                n_features=header["n_features"],
                steps=header["steps"],
                days=header["days"],
                noise=header["noise"],
                seed=header["seed"],
            )


def _draw(cumulative: np.ndarray, u: float) -> int:
    return min(int(np.searchsorted(cumulative, u, side="right")), cumulative.shape[-1] - 1)


def generate_synthetic(cfg: SynthConfig, name: str = "synthetic") -> Dataset:
    """Sample ``cfg.days`` day sequences; deterministic given ``cfg.seed``."""
    space = cfg.label_space
    M = space.residents
    rng = np.random.default_rng(cfg.seed)
    cum_prior = [np.cumsum(p) for p in cfg.priors]
    cum_trans = [np.cumsum(a, axis=1) for a in cfg.transitions]
    cum_emit = np.cumsum(cfg.emission, axis=1)
    radix = np.array([math.prod(space.sizes[m + 1 :]) for m in range(M)], dtype=np.int64)
    codes = cfg.symbol_features()
    S = cfg.n_symbols

    instances = []
    for day in range(cfg.days):
        u = rng.random((cfg.steps, M + 3))
        labels = np.zeros((cfg.steps, M), dtype=np.int64)
        symbols = np.zeros(cfg.steps, dtype=np.int64)
        prev = -1
        for t in range(cfg.steps):
            if t == 0:
                frame = [_draw(cum_prior[m], u[t, m]) for m in range(M)]
            else:
                frame = [_draw(cum_trans[m][prev], u[t, m]) for m in range(M)]
            labels[t] = frame
            joint = int(np.dot(frame, radix))
            if u[t, M + 1] < cfg.noise:
                symbols[t] = min(int(u[t, M + 2] * S), S - 1)
            else:
                symbols[t] = _draw(cum_emit[joint], u[t, M])
            prev = joint
        instances.append(SequenceInstance(f"day-{day + 1:03d}", codes[symbols], labels))

    logger.info("Generated %d synthetic days of %d steps", cfg.days, cfg.steps)
    return Dataset.from_instances(
        instances,
        space,
        name=name,
        notes=[f"synthetic factorial HMM corpus, seed {cfg.seed}, noise {cfg.noise}"],
    )


def random_synth_config(
    sizes: tuple[int, ...],
    n_symbols: int,
    steps: int,
    days: int,
    n_features: int | None = None,
    noise: float = 0.0,
    coupling: float = 0.0,
    stickiness: float = 0.5,
    concentration: float = 1.0,
    seed: int = 0,
) -> SynthConfig:
    """Draw a random generator.

    Each resident's next activity mixes a Dirichlet row, a ``stickiness`` share of
    repeating its own previous activity, and a ``coupling`` share of copying the next
    resident's previous activity (modulo its own alphabet).
    """
    if not 0.0 <= coupling <= 1.0 or not 0.0 <= stickiness <= 1.0 or coupling + stickiness > 1.0:
        raise ConfigurationError("coupling and stickiness must lie in [0, 1] and sum to <= 1")
    space = LabelSpace(sizes)
    rng = np.random.default_rng(seed)
    comps = space.components()
    M = space.residents
    J = space.combined_size

    priors = tuple(rng.dirichlet(np.ones(k)) for k in space.sizes)
    transitions = []
    for m, k in enumerate(space.sizes):
        base = rng.dirichlet(np.full(k, concentration), size=J)
        own = np.eye(k)[comps[:, m]]
        other = np.eye(k)[comps[:, (m + 1) % M] % k]
        rows = (1.0 - stickiness - coupling) * base + stickiness * own + coupling * other
        transitions.append(rows / rows.sum(axis=1, keepdims=True))
    emission = rng.dirichlet(np.full(n_symbols, 0.3), size=J)
    emission /= emission.sum(axis=1, keepdims=True)
    width = n_features or max(1, math.ceil(math.log2(max(n_symbols, 2))))
    return SynthConfig(
        sizes=space.sizes,
        priors=tuple(p / p.sum() for p in priors),
        transitions=tuple(transitions),
        emission=emission,
        n_features=width,
        steps=steps,
        days=days,
        noise=noise,
        seed=seed,
    )


def generator_symbol_map(cfg: SynthConfig, codec: ObservationCodec) -> np.ndarray:
    """Codec id (or UNK) of every generator sensor state."""
    return np.array([codec.lookup(row) for row in cfg.symbol_features()], dtype=np.int64)


def effective_emission(cfg: SynthConfig, codec: ObservationCodec) -> np.ndarray:
    """Generator emission including noise, re-indexed to ``codec`` ids (UNK last), shape (J, S'+1)."""
    noisy = (1.0 - cfg.noise) * cfg.emission + cfg.noise / cfg.n_symbols
    out = np.zeros((noisy.shape[0], codec.size + 1))
    np.add.at(out.T, generator_symbol_map(cfg, codec), noisy.T)
    return out


def generator_fhmm_params(cfg: SynthConfig, codec: ObservationCodec) -> FhmmParams:
    """The generator itself as factorial-HMM parameters over ``codec`` symbols."""
    return FhmmParams(cfg.label_space, cfg.priors, cfg.transitions, effective_emission(cfg, codec))


def generator_hmm_params(cfg: SynthConfig, codec: ObservationCodec) -> HmmParams:
    """Product construction of the generator over the combined label space."""
    return generator_fhmm_params(cfg, codec).to_hmm()


class SynthSection(BaseModel):
    sizes: list[int] = Field(default_factory=lambda: [3, 3])
    symbols: int = Field(default=8, ge=1)
    features: int | None = Field(default=None, ge=1)
    steps: int = Field(default=1000, ge=1)
    days: int = Field(default=26, ge=1)
    noise: float = Field(default=0.0, ge=0.0, lt=1.0)
    coupling: float = Field(default=0.0, ge=0.0, le=1.0)
    stickiness: float = Field(default=0.5, ge=0.0, le=1.0)
    seed: int = 0


def load_synth_config(path: Path) -> SynthConfig:
    """Read the ``synth`` section of a YAML file into a random generator."""
    data = load_yaml(path)
    try:
        section = SynthSection.model_validate(data.get("synth", data))
    except ValidationError as e:
        first = e.errors()[0]
        loc = ".".join(str(p) for p in first["loc"])
        raise ConfigurationError(f"{path}: {loc}: {first['msg']}") from e
    return random_synth_config(
        sizes=tuple(section.sizes),
        n_symbols=section.symbols,
        steps=section.steps,
        days=section.days,
        n_features=section.features,
        noise=section.noise,
        coupling=section.coupling,
        stickiness=section.stickiness,
        seed=section.seed,
    )
