"""Exact inference on a first-order chain of log-potentials.

All routines take the same three tables:

- ``log_init``  shape (J,): score of the first label
- ``log_trans`` shape (J, J): score of moving from label i to label j
- ``log_unary`` shape (T, J): per-step label scores

HMMs, CRFs and the merged clique chain of the factorial models all reduce to this form.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from actbench.errors import DomainError

_EDGE_BLOCK_ENTRIES = 4_000_000


def _check(log_init: np.ndarray, log_trans: np.ndarray, log_unary: np.ndarray) -> int:
    if log_unary.ndim != 2 or log_unary.shape[0] < 1:
        raise DomainError("need a non-empty (T, J) table of unary scores")
    J = log_unary.shape[1]
    if log_init.shape != (J,) or log_trans.shape != (J, J):
        raise DomainError(f"init must be ({J},) and transitions ({J}, {J})")
    return J


def viterbi_decode(
    log_init: np.ndarray, log_trans: np.ndarray, log_unary: np.ndarray
) -> tuple[np.ndarray, float]:
    """Highest-scoring label path and its score.

    Ties go to the lower label index, both at every backpointer and at the final step.
    """
    _check(log_init, log_trans, log_unary)
    T, J = log_unary.shape
    backptr = np.zeros((T, J), dtype=np.int64)
    delta = log_init + log_unary[0]
    for t in range(1, T):
        scores = delta[:, None] + log_trans
        backptr[t] = np.argmax(scores, axis=0)
        delta = scores[backptr[t], np.arange(J)] + log_unary[t]

    path = np.zeros(T, dtype=np.int64)
    path[-1] = int(np.argmax(delta))
    for t in range(T - 1, 0, -1):
        path[t - 1] = backptr[t, path[t]]
    return path, float(delta[path[-1]])


def path_score(
    log_init: np.ndarray, log_trans: np.ndarray, log_unary: np.ndarray, path: np.ndarray
) -> float:
    """Un-normalised log score of one label path."""
    _check(log_init, log_trans, log_unary)
    path = np.asarray(path, dtype=np.int64)
    score = log_init[path[0]] + log_unary[np.arange(len(path)), path].sum()
    if len(path) > 1:
        score += log_trans[path[:-1], path[1:]].sum()
    return float(score)


def _forward_backward_tables(
    log_init: np.ndarray, log_trans: np.ndarray, log_unary: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    T, J = log_unary.shape
    log_alpha = np.empty((T, J))
    log_beta = np.zeros((T, J))
    log_alpha[0] = log_init + log_unary[0]
    for t in range(1, T):
        log_alpha[t] = logsumexp(log_alpha[t - 1][:, None] + log_trans, axis=0) + log_unary[t]
    for t in range(T - 2, -1, -1):
        log_beta[t] = logsumexp(log_trans + (log_unary[t + 1] + log_beta[t + 1])[None, :], axis=1)
    return float(logsumexp(log_alpha[-1])), log_alpha, log_beta


def _edge_block(
    log_alpha: np.ndarray,
    log_beta: np.ndarray,
    log_trans: np.ndarray,
    log_unary: np.ndarray,
    log_z: float,
    start: int,
    stop: int,
) -> np.ndarray:
    return np.exp(
        log_alpha[start:stop, :, None]
        + log_trans[None, :, :]
        + (log_unary[start + 1 : stop + 1] + log_beta[start + 1 : stop + 1])[:, None, :]
        - log_z
    )


def forward_backward(
    log_init: np.ndarray, log_trans: np.ndarray, log_unary: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Log partition function with node and edge marginals.

    Returns:
        ``(log_z, node, edge)`` where ``node[t, j] = p(y_t = j)`` has shape (T, J) and
        ``edge[t, i, j] = p(y_t = i, y_{t+1} = j)`` has shape (T-1, J, J).
    """
    _check(log_init, log_trans, log_unary)
    log_z, log_alpha, log_beta = _forward_backward_tables(log_init, log_trans, log_unary)
    node = np.exp(log_alpha + log_beta - log_z)
    T = log_unary.shape[0]
    edge = _edge_block(log_alpha, log_beta, log_trans, log_unary, log_z, 0, T - 1)
    return log_z, node, edge


def expected_counts(
    log_init: np.ndarray,
    log_trans: np.ndarray,
    log_unary: np.ndarray,
    chunk: int | None = None,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Like :func:`forward_backward` but with edge marginals summed over time, shape (J, J).

    Edges are accumulated in blocks of ``chunk`` steps so long days never materialise
    the full (T-1, J, J) tensor.
    """
    _check(log_init, log_trans, log_unary)
    log_z, log_alpha, log_beta = _forward_backward_tables(log_init, log_trans, log_unary)
    node = np.exp(log_alpha + log_beta - log_z)
    T, J = log_unary.shape
    chunk = chunk or max(1, _EDGE_BLOCK_ENTRIES // (J * J))
    edges = np.zeros((J, J))
    for start in range(0, T - 1, chunk):
        stop = min(start + chunk, T - 1)
        edges += _edge_block(log_alpha, log_beta, log_trans, log_unary, log_z, start, stop).sum(
            axis=0
        )
    return log_z, node, edges
