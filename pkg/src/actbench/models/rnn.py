"""Recurrent taggers with tanh, GRU and LSTM cells.

Row-vector convention throughout: ``h_t = cell(x_t W + h_{t-1} V + c)``. Gate blocks are
laid out side by side in W, V and c: GRU ``[z, r, n]``, LSTM ``[i, f, o, g]``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.special import expit, log_softmax

from actbench.data import Dataset, LabelSpace, SequenceInstance, decode_array, encode_array
from actbench.errors import ConfigurationError, TrainingError
from actbench.evaluate.metrics import accuracy_all

logger = logging.getLogger("actbench")

Cell = Literal["tanh", "gru", "lstm"]
Head = Literal["combined", "separate"]

GATES: dict[str, int] = {"tanh": 1, "gru": 3, "lstm": 4}


@dataclass(frozen=True)
class RnnConfig:
    """Hyper-parameters of one recurrent training run.

    Attributes:
        cell: tanh | gru | lstm
        head: combined (one softmax over J) or separate (one softmax per resident)
        hidden: Hidden units H
        learning_rate: SGD step size η
        max_epochs: Epoch cap
        patience: Epochs without validation improvement before stopping
        seed: Seed for initialisation and the per-epoch shuffle
        clip_norm: Global gradient-norm clip (None disables clipping)
    """

    cell: Cell = "tanh"
    head: Head = "combined"
    hidden: int = 10
    learning_rate: float = 0.01
    max_epochs: int = 200
    patience: int = 10
    seed: int = 0
    clip_norm: float | None = 5.0

    def __post_init__(self) -> None:
        if self.cell not in GATES:
            raise ConfigurationError(f"cell must be one of {', '.join(GATES)}, got {self.cell!r}")
        if self.head not in ("combined", "separate"):
            raise ConfigurationError(f"head must be combined or separate, got {self.head!r}")
        if self.hidden < 1:
            raise ConfigurationError(f"hidden size must be >= 1, got {self.hidden}")
        if not self.learning_rate > 0:
            raise ConfigurationError(f"learning rate must be > 0, got {self.learning_rate}")
        if self.patience < 1 or self.max_epochs < 1:
            raise ConfigurationError("patience and max_epochs must be >= 1")
        if self.clip_norm is not None and not self.clip_norm > 0:
            raise ConfigurationError(f"clip_norm must be > 0, got {self.clip_norm}")


@dataclass(frozen=True, eq=False)
class RnnParams:
    """Weights of a recurrent tagger.

    Attributes:
        label_space: Activity alphabets
        cell: tanh | gru | lstm
        head: combined | separate
        W: Input weights, shape (D, G·H)
        V: Recurrent weights, shape (H, G·H)
        c: Cell biases, shape (G·H,)
        U: Head weights, one (H, J) or M (H, K^m) matrices
        b: Head biases matching ``U``
        seed: Seed the weights were initialised from
    """

    kind = "rnn"

    label_space: LabelSpace
    cell: Cell
    head: Head
    W: np.ndarray
    V: np.ndarray
    c: np.ndarray
    U: tuple[np.ndarray, ...]
    b: tuple[np.ndarray, ...]
    seed: int = 0

    def __post_init__(self) -> None:
        if self.cell not in GATES:
            raise ConfigurationError(f"unknown cell {self.cell!r}")
        W, V, c = (np.asarray(a, dtype=np.float64) for a in (self.W, self.V, self.c))
        U = tuple(np.asarray(u, dtype=np.float64) for u in self.U)
        b = tuple(np.asarray(v, dtype=np.float64) for v in self.b)
        H = V.shape[0]
        width = GATES[self.cell] * H
        if W.ndim != 2 or W.shape[1] != width or V.shape != (H, width) or c.shape != (width,):
            raise ConfigurationError(f"{self.cell} cell weights inconsistent with H={H}")
        for u, v, k in zip(U, b, self.head_sizes, strict=False):
            if u.shape != (H, k) or v.shape != (k,):
                raise ConfigurationError(f"head weights must be ({H}, {k}) and ({k},)")
        if len(U) != len(self.head_sizes) or len(b) != len(self.head_sizes):
            raise ConfigurationError(f"{self.head} mode needs {len(self.head_sizes)} heads")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "b", b)

    @property
    def head_sizes(self) -> tuple[int, ...]:
        if self.head == "combined":
            return (self.label_space.combined_size,)
        return self.label_space.sizes

    @property
    def hidden(self) -> int:
        return int(self.V.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.W.shape[0])

    def blocks(self) -> list[np.ndarray]:
        return [self.W, self.V, self.c, *self.U, *self.b]

    def with_blocks(self, blocks: list[np.ndarray]) -> RnnParams:
        n = len(self.U)
        return RnnParams(
            self.label_space,
            self.cell,
            self.head,
            blocks[0],
            blocks[1],
            blocks[2],
            tuple(blocks[3 : 3 + n]),
            tuple(blocks[3 + n :]),
            seed=self.seed,
        )

    def sgd_step(self, grads: RnnParams, learning_rate: float) -> RnnParams:
        return self.with_blocks([p - learning_rate * g for p, g in zip(self.blocks(), grads.blocks())])

    def global_norm(self) -> float:
        return float(np.sqrt(sum(np.sum(g * g) for g in self.blocks())))

    def header(self) -> dict:
        return {
            "cell": self.cell,
            "head": self.head,
            "D": self.n_features,
            "H": self.hidden,
            "outputs": list(self.head_sizes),
            "seed": self.seed,
        }

    def to_arrays(self) -> dict[str, np.ndarray]:
        arrays = {"W": self.W, "V": self.V, "c": self.c}
        arrays.update({f"U_{k}": u for k, u in enumerate(self.U)})
        arrays.update({f"b_{k}": v for k, v in enumerate(self.b)})
        return arrays

    @classmethod
    def from_arrays(
        cls, label_space: LabelSpace, header: dict, arrays: dict[str, np.ndarray]
    ) -> RnnParams:
        n = len(header["outputs"])
        return cls(
            label_space,
            header["cell"],
            header["head"],
            arrays["W"],
            arrays["V"],
            arrays["c"],
            tuple(arrays[f"U_{k}"] for k in range(n)),
            tuple(arrays[f"b_{k}"] for k in range(n)),
            seed=int(header.get("seed", 0)),
        )


def init_rnn_params(
    cfg: RnnConfig, n_features: int, label_space: LabelSpace, rng: np.random.Generator
) -> RnnParams:
    """uniform(±1/√H) matrices, zero biases; LSTM forget-gate bias starts at 1."""
    H = cfg.hidden
    G = GATES[cfg.cell]
    r = 1.0 / np.sqrt(H)
    sizes = (label_space.combined_size,) if cfg.head == "combined" else label_space.sizes
    W = rng.uniform(-r, r, size=(n_features, G * H))
    V = rng.uniform(-r, r, size=(H, G * H))
    c = np.zeros(G * H)
    if cfg.cell == "lstm":
        c[H : 2 * H] = 1.0
    U = tuple(rng.uniform(-r, r, size=(H, k)) for k in sizes)
    b = tuple(np.zeros(k) for k in sizes)
    return RnnParams(label_space, cfg.cell, cfg.head, W, V, c, U, b, seed=cfg.seed)


@dataclass
class RnnOutputs:
    """Per-step head distributions plus the states needed for backpropagation.

    Attributes:
        probs: One (T, K) distribution table per head
        log_probs: Log of ``probs``
        states: Cached activations keyed by name (``X``, ``H`` and cell gates)
    """

    probs: tuple[np.ndarray, ...]
    log_probs: tuple[np.ndarray, ...]
    states: dict[str, np.ndarray] = field(repr=False)


def _features(obs: SequenceInstance | np.ndarray) -> np.ndarray:
    x = obs.features if isinstance(obs, SequenceInstance) else np.asarray(obs, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ConfigurationError("observation sequence must be a non-empty (T, D) feature array")
    return x


def _run_cell(params: RnnParams, X: np.ndarray) -> dict[str, np.ndarray]:
    T, H = X.shape[0], params.hidden
    XA = X @ params.W + params.c
    V = params.V
    Hs = np.zeros((T + 1, H))
    states: dict[str, np.ndarray] = {"X": X, "H": Hs}
    if params.cell == "tanh":
        for t in range(T):
            Hs[t + 1] = np.tanh(XA[t] + Hs[t] @ V)
    elif params.cell == "gru":
        Z, R, N = np.zeros((T, H)), np.zeros((T, H)), np.zeros((T, H))
        for t in range(T):
            h = Hs[t]
            Z[t] = expit(XA[t, :H] + h @ V[:, :H])
            R[t] = expit(XA[t, H : 2 * H] + h @ V[:, H : 2 * H])
            N[t] = np.tanh(XA[t, 2 * H :] + (R[t] * h) @ V[:, 2 * H :])
            Hs[t + 1] = (1.0 - Z[t]) * N[t] + Z[t] * h
        states.update(Z=Z, R=R, N=N)
    else:
        Cs = np.zeros((T + 1, H))
        I, F, O, G, TC = (np.zeros((T, H)) for _ in range(5))
        for t in range(T):
            a = XA[t] + Hs[t] @ V
            I[t] = expit(a[:H])
            F[t] = expit(a[H : 2 * H])
            O[t] = expit(a[2 * H : 3 * H])
            G[t] = np.tanh(a[3 * H :])
            Cs[t + 1] = F[t] * Cs[t] + I[t] * G[t]
            TC[t] = np.tanh(Cs[t + 1])
            Hs[t + 1] = O[t] * TC[t]
        states.update(C=Cs, I=I, F=F, O=O, G=G, TC=TC)
    return states


def rnn_forward(params: RnnParams, obs: SequenceInstance | np.ndarray) -> RnnOutputs:
    """Run the recurrence from h_0 = 0 and apply every head's softmax."""
    X = _features(obs)
    if X.shape[1] != params.n_features:
        raise ConfigurationError(f"expected {params.n_features} features, got {X.shape[1]}")
    states = _run_cell(params, X)
    hidden = states["H"][1:]
    log_probs = tuple(log_softmax(hidden @ u + v, axis=1) for u, v in zip(params.U, params.b))
    return RnnOutputs(tuple(np.exp(lp) for lp in log_probs), log_probs, states)


def rnn_targets(params: RnnParams, labels: np.ndarray) -> tuple[np.ndarray, ...]:
    """Per-head class indices for a (T, M) label array."""
    labels = np.asarray(labels, dtype=np.int64)
    if params.head == "combined":
        return (encode_array(labels, params.label_space),)
    return tuple(labels[:, m] for m in range(labels.shape[1]))


def _step_losses(outputs: RnnOutputs, targets: tuple[np.ndarray, ...]) -> np.ndarray:
    T = outputs.log_probs[0].shape[0]
    if any(y.shape != (T,) for y in targets) or len(targets) != len(outputs.log_probs):
        raise ConfigurationError("targets must give one length-T index array per head")
    steps = np.arange(T)
    return -sum(lp[steps, y] for lp, y in zip(outputs.log_probs, targets))


def rnn_loss(outputs: RnnOutputs, targets: tuple[np.ndarray, ...]) -> float:
    """Mean over steps of the (head-summed) cross-entropy."""
    return float(np.mean(_step_losses(outputs, targets)))


def _first_bad_step(rows: np.ndarray) -> int | None:
    bad = np.flatnonzero(~np.isfinite(rows).all(axis=tuple(range(1, rows.ndim))))
    return int(bad[0]) if bad.size else None


def rnn_backward(
    params: RnnParams,
    outputs: RnnOutputs,
    targets: tuple[np.ndarray, ...],
    clip_norm: float | None = None,
) -> RnnParams:
    """Exact gradient of :func:`rnn_loss` by backpropagation through time.

    Returned as an :class:`RnnParams` holding the gradient of every block. When
    ``clip_norm`` is given the whole gradient is rescaled to at most that global norm.
    """
    s = outputs.states
    X, Hs = s["X"], s["H"]
    T, H = X.shape[0], params.hidden
    hidden, hprev = Hs[1:], Hs[:-1]
    steps = np.arange(T)

    dH = np.zeros((T, H))
    dU, db = [], []
    for p, u, y in zip(outputs.probs, params.U, targets):
        dlogits = p.copy()
        dlogits[steps, y] -= 1.0
        dlogits /= T
        dU.append(hidden.T @ dlogits)
        db.append(dlogits.sum(axis=0))
        dH += dlogits @ u.T

    V = params.V
    DA = np.zeros((T, GATES[params.cell] * H))
    dh_next = np.zeros(H)
    if params.cell == "tanh":
        for t in range(T - 1, -1, -1):
            da = (dH[t] + dh_next) * (1.0 - Hs[t + 1] ** 2)
            DA[t] = da
            dh_next = da @ V.T
        dV = hprev.T @ DA
    elif params.cell == "gru":
        Z, R, N = s["Z"], s["R"], s["N"]
        Vz, Vr, Vn = V[:, :H], V[:, H : 2 * H], V[:, 2 * H :]
        for t in range(T - 1, -1, -1):
            dh = dH[t] + dh_next
            h = hprev[t]
            dan = dh * (1.0 - Z[t]) * (1.0 - N[t] ** 2)
            daz = dh * (h - N[t]) * Z[t] * (1.0 - Z[t])
            drh = dan @ Vn.T
            dar = drh * h * R[t] * (1.0 - R[t])
            DA[t] = np.concatenate([daz, dar, dan])
            dh_next = dh * Z[t] + drh * R[t] + daz @ Vz.T + dar @ Vr.T
        dV = np.concatenate(
            [hprev.T @ DA[:, : 2 * H], (R * hprev).T @ DA[:, 2 * H :]], axis=1
        )
    else:
        I, F, O, G, TC, Cs = s["I"], s["F"], s["O"], s["G"], s["TC"], s["C"]
        dc_next = np.zeros(H)
        for t in range(T - 1, -1, -1):
            dh = dH[t] + dh_next
            dc = dc_next + dh * O[t] * (1.0 - TC[t] ** 2)
            DA[t] = np.concatenate(
                [
                    dc * G[t] * I[t] * (1.0 - I[t]),
                    dc * Cs[t] * F[t] * (1.0 - F[t]),
                    dh * TC[t] * O[t] * (1.0 - O[t]),
                    dc * I[t] * (1.0 - G[t] ** 2),
                ]
            )
            dc_next = dc * F[t]
            dh_next = DA[t] @ V.T
        dV = hprev.T @ DA

    bad = _first_bad_step(DA)
    if bad is not None:
        raise TrainingError("non-finite gradient", step=bad)

    grads = RnnParams(
        params.label_space,
        params.cell,
        params.head,
        X.T @ DA,
        dV,
        DA.sum(axis=0),
        tuple(dU),
        tuple(db),
        seed=params.seed,
    )
    if clip_norm is not None:
        norm = grads.global_norm()
        if norm > clip_norm:
            grads = grads.with_blocks([g * (clip_norm / norm) for g in grads.blocks()])
    return grads


def rnn_decode(params: RnnParams, obs: SequenceInstance | np.ndarray) -> np.ndarray:
    """Per-step argmax of every head, ties toward the lower index; returns (T, M) labels."""
    outputs = rnn_forward(params, obs)
    if params.head == "combined":
        return decode_array(np.argmax(outputs.log_probs[0], axis=1), params.label_space)
    return np.stack([np.argmax(lp, axis=1) for lp in outputs.log_probs], axis=1)


@dataclass
class RnnTrace:
    """Per-epoch training history.

    Attributes:
        epochs: Epoch numbers (1-based)
        train_loss: Mean per-day training loss of every epoch
        val_accuracy: Validation accuracy_all after every epoch
        best_epoch: Epoch whose parameters were returned
    """

    epochs: list[int] = field(default_factory=list)
    train_loss: list[float] = field(default_factory=list)
    val_accuracy: list[float] = field(default_factory=list)
    best_epoch: int = 0

    def rows(self) -> list[tuple[int, float, float]]:
        return list(zip(self.epochs, self.train_loss, self.val_accuracy))


def _accuracy(params: RnnParams, data: Dataset) -> float:
    return accuracy_all([rnn_decode(params, inst) for inst in data], [inst.labels for inst in data])


def train_rnn(train: Dataset, val: Dataset, cfg: RnnConfig) -> tuple[RnnParams, RnnTrace]:
    """Per-day SGD with early stopping on validation accuracy_all.

    Days are shuffled every epoch with a generator seeded by ``cfg.seed``; the returned
    parameters are those of the best validation epoch.
    """
    if len(train) == 0:
        raise ConfigurationError("cannot train on an empty dataset")
    if len(val) == 0:
        raise ConfigurationError("recurrent training needs at least one validation day")
    rng = np.random.default_rng(cfg.seed)
    params = init_rnn_params(cfg, train.n_features, train.label_space, rng)
    targets = [rnn_targets(params, inst.labels) for inst in train.instances]

    best, best_accuracy = params, -np.inf
    trace = RnnTrace()
    for epoch in range(1, cfg.max_epochs + 1):
        losses = []
        for i in rng.permutation(len(train)):
            inst = train.instances[i]
            outputs = rnn_forward(params, inst)
            step_losses = _step_losses(outputs, targets[i])
            bad = _first_bad_step(step_losses)
            if bad is not None:
                raise TrainingError(f"loss diverged on day {inst.day_id} in epoch {epoch}", step=bad)
            losses.append(float(step_losses.mean()))
            grads = rnn_backward(params, outputs, targets[i], cfg.clip_norm)
            params = params.sgd_step(grads, cfg.learning_rate)

        accuracy = _accuracy(params, val)
        trace.epochs.append(epoch)
        trace.train_loss.append(float(np.mean(losses)))
        trace.val_accuracy.append(accuracy)
        logger.debug(
            "RNN %s/%s H=%d lr=%g epoch %d: loss %.4f val %.4f",
            cfg.cell, cfg.head, cfg.hidden, cfg.learning_rate, epoch, trace.train_loss[-1], accuracy,
        )  # fmt: skip
        if accuracy > best_accuracy:
            best, best_accuracy, trace.best_epoch = params, accuracy, epoch
        elif epoch - trace.best_epoch >= cfg.patience:
            break
    return best, trace
