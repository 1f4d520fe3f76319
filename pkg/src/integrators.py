"""
Adaptive embedded Runge-Kutta integration with optional constraint projection.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from .exceptions import StepFailure

logger = logging.getLogger(__name__)

VectorField = Callable[[float, np.ndarray], np.ndarray]
Projection = Callable[[np.ndarray], np.ndarray]


@dataclass
class IntegrationResult:
    """Accepted steps of one integration run."""
    times: np.ndarray
    states: np.ndarray
    accepted: int
    rejected: int
    evaluations: int


class ExplicitRungeKutta:
    """
    Base class for explicit embedded Runge-Kutta pairs with step-size control.

    Subclasses provide the Butcher table: ``nodes`` (c), ``tableau`` (rows of a),
    ``weights`` (b of the propagating order) and ``error_weights`` (b - b_hat).
    """

    nodes: List[float] = []
    tableau: List[List[float]] = []
    weights: List[float] = []
    error_weights: List[float] = []
    order: int = 1

    def __init__(self, rel_tol: float = 1e-10, abs_tol: float = 1e-12, min_step: float = 1e-14,
                 max_step: float = np.inf, max_steps: int = 10_000_000, safety: float = 0.9,
                 min_factor: float = 0.2, max_factor: float = 5.0):
        if rel_tol <= 0 or abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol
        self.min_step = min_step
        self.max_step = max_step
        self.max_steps = max_steps
        self.safety = safety
        self.min_factor = min_factor
        self.max_factor = max_factor

    def _error_norm(self, error: np.ndarray, y: np.ndarray, y_new: np.ndarray) -> float:
        """Largest componentwise error relative to abs_tol + rel_tol |y|."""
        scale = self.abs_tol + self.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        return float(np.max(np.abs(error) / scale))

    def _initial_step(self, fun: VectorField, t0: float, y0: np.ndarray, f0: np.ndarray, span: float) -> float:
        scale = self.abs_tol + self.rel_tol * np.abs(y0)
        d0 = np.sqrt(np.mean((y0 / scale) ** 2))
        d1 = np.sqrt(np.mean((f0 / scale) ** 2))
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        return float(min(h0, span, self.max_step))

    def step(self, fun: VectorField, t: float, y: np.ndarray, f: np.ndarray, h: float):
        """
        One trial step.

        Returns:
            (y_new, error_estimate, evaluations)
        """
        stages = [f]
        for c, row in zip(self.nodes[1:], self.tableau):
            increment = sum(a * k for a, k in zip(row, stages) if a)
            stages.append(fun(t + c * h, y + h * increment))
        y_new = y + h * sum(b * k for b, k in zip(self.weights, stages) if b)
        error = h * sum(e * k for e, k in zip(self.error_weights, stages) if e)
        return y_new, error, len(stages) - 1

    def integrate(self, fun: VectorField, t0: float, y0, t_end: float,
                  projection: Optional[Projection] = None) -> IntegrationResult:
        """
        Integrate y' = fun(t, y) from t0 to t_end (either direction).

        Every accepted state is passed through ``projection`` when given, and
        the right-hand side is re-evaluated at the projected state.

        Args:
            fun: Right-hand side
            t0: Initial time
            y0: Initial state
            t_end: Final time (the last step is clamped to it exactly)
            projection: Map applied after each accepted step

        Returns:
            IntegrationResult with one row per accepted step (initial state included)

        Raises:
            StepFailure: If the step size falls below min_step or max_steps is exceeded
        """
        y = np.array(y0, dtype=float)
        if projection is not None:
            y = projection(y)
        t = float(t0)
        times, states = [t], [y.copy()]
        span = abs(t_end - t0)
        if span == 0.0:
            return IntegrationResult(np.array(times), np.array(states), 0, 0, 0)
        direction = 1.0 if t_end > t0 else -1.0
        f = fun(t, y)
        evaluations = 1
        h = self._initial_step(fun, t, y, f, span)
        accepted = rejected = 0
        exponent = -1.0 / self.order

        while direction * (t_end - t) > 0:
            if h < self.min_step:
                raise StepFailure(t, h)
            if accepted + rejected >= self.max_steps:
                raise StepFailure(t, h)
            remaining = abs(t_end - t)
            last = h >= remaining
            h_try = remaining if last else h
            y_new, error, count = self.step(fun, t, y, f, direction * h_try)
            evaluations += count
            err = self._error_norm(error, y, y_new)
            if err <= 1.0:
                t = t_end if last else t + direction * h_try
                y = projection(y_new) if projection is not None else y_new
                f = fun(t, y)
                evaluations += 1
                times.append(t)
                states.append(y.copy())
                accepted += 1
                factor = self.max_factor if err == 0 else min(self.max_factor, self.safety * err ** exponent)
                h = min(h_try * factor, self.max_step)
            else:
                rejected += 1
                h = h_try * max(self.min_factor, self.safety * err ** exponent)
                logger.debug("rejected step at t=%.6g (err=%.3e), retrying with h=%.3e", t, err, h)

        logger.debug("integration finished: %d accepted, %d rejected steps", accepted, rejected)
        return IntegrationResult(np.array(times), np.array(states), accepted, rejected, evaluations)


class DormandPrince54(ExplicitRungeKutta):
    """
    Dormand-Prince 5(4) pair: seven stages, fifth-order propagation with an
    embedded fourth-order error estimate.
    """

    order = 5
    nodes = [0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0]
    tableau = [
        [1 / 5],
        [3 / 40, 9 / 40],
        [44 / 45, -56 / 15, 32 / 9],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
        [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
    ]
    weights = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0]
    error_weights = [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
