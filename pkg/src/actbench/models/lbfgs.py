from __future__ import annotations

import logging
from collections import deque
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from actbench.errors import OptimizationError

logger = logging.getLogger("actbench")

Objective = Callable[[np.ndarray], tuple[float, np.ndarray]]


@dataclass
class LbfgsResult:
    """Outcome of :func:`minimize_lbfgs`.

    Attributes:
        x: Final iterate
        fun: Objective at ``x``
        grad: Gradient at ``x``
        n_iter: Accepted iterations
        converged: Gradient max-norm fell below the tolerance
        message: Why the iteration stopped
        trace: Objective after every accepted iterate, starting with the initial point
    """

    x: np.ndarray
    fun: float
    grad: np.ndarray
    n_iter: int
    converged: bool
    message: str
    trace: list[float] = field(default_factory=list)


def _two_loop(grad: np.ndarray, pairs: deque[tuple[np.ndarray, np.ndarray, float]]) -> np.ndarray:
    q = grad.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * s.dot(q)
        q -= a * y
        alphas.append(a)
    s, y, _ = pairs[-1]
    q *= s.dot(y) / y.dot(y)
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * y.dot(q)
        q += (a - b) * s
    return -q


def minimize_lbfgs(
    fun: Objective,
    x0: np.ndarray,
    max_iter: int = 1000,
    tol: float = 1e-5,
    history: int = 10,
    c1: float = 1e-4,
    max_backtracks: int = 60,
) -> LbfgsResult:
    """Limited-memory BFGS with Armijo backtracking.

    ``fun`` returns ``(value, gradient)``. A trial point with a non-finite value is
    rejected and the step halved; when no trial point along the direction is finite,
    :class:`OptimizationError` is raised. Accepted iterates never increase the value.
    """
    if max_iter < 1:
        raise OptimizationError(f"max_iter must be >= 1, got {max_iter}")
    x = np.asarray(x0, dtype=np.float64).copy()
    f, g = fun(x)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise OptimizationError("objective is not finite at the starting point")
    pairs: deque[tuple[np.ndarray, np.ndarray, float]] = deque(maxlen=history)
    trace = [float(f)]
    message = "iteration limit reached"
    n_iter = 0

    while n_iter < max_iter:
        if np.max(np.abs(g), initial=0.0) < tol:
            message = "gradient below tolerance"
            break
        direction = _two_loop(g, pairs) if pairs else -g
        slope = g.dot(direction)
        if not pairs or not np.isfinite(slope) or slope >= 0:
            pairs.clear()
            direction = -g
            slope = -g.dot(g)
            step = min(1.0, 1.0 / np.linalg.norm(g))
        else:
            step = 1.0

        accepted = False
        any_finite = False
        for _ in range(max_backtracks):
            x_new = x + step * direction
            f_new, g_new = fun(x_new)
            if np.isfinite(f_new) and np.all(np.isfinite(g_new)):
                any_finite = True
                if f_new <= f + c1 * step * slope:
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            if not any_finite:
                raise OptimizationError(
                    f"no finite step along the search direction at iteration {n_iter + 1}"
                )
            message = "line search made no progress"
            break

        s, y = x_new - x, g_new - g
        sy = s.dot(y)
        if sy > 1e-10:
            pairs.append((s, y, 1.0 / sy))
        x, f, g = x_new, float(f_new), g_new
        n_iter += 1
        trace.append(f)
        logger.debug("L-BFGS iter %d: f=%.6f |g|max=%.3e step=%.3g", n_iter, f, np.abs(g).max(), step)

    converged = bool(np.max(np.abs(g), initial=0.0) < tol)
    if converged:
        message = "gradient below tolerance"
    return LbfgsResult(x, float(f), g, n_iter, converged, message, trace)
