"""Empirical convergence-order estimation from iteration traces.

The order omega is fit from the model e_{t+1} = c * e_t^omega: a straight
line of slope omega in log-log coordinates. Errors need the true solution,
which is taken from a tight Newton solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData
from .solver import IterationTrace, LoopSystem, Termination, solve

NOISE_FLOOR = 1e-14
WINDOW_PAIRS = 6
MIN_USABLE = 4


@dataclass(frozen=True)
class OrderEstimate:
    omega: float
    rate: float
    classification: str  # quadratic | linear | inconclusive
    samples_used: int

    def as_dict(self) -> dict:
        return {
            "omega": self.omega,
            "rate": self.rate,
            "classification": self.classification,
            "samples_used": self.samples_used,
        }


def error_sequence(trace: IterationTrace, x_star: np.ndarray) -> np.ndarray:
    """e_t = ||x_t - x*|| with trailing noise-floor entries dropped."""
    x_star = np.asarray(x_star, dtype=float)
    errors = [float(np.max(np.abs(x - x_star))) for x in trace.iterates]
    while errors and errors[-1] < NOISE_FLOOR:
        errors.pop()
    return np.array(errors)


def estimate_order(errors: np.ndarray) -> OrderEstimate:
    """Least-squares slope of log e_{t+1} vs log e_t over the last pairs.

    Classification: quadratic when omega >= 1.8; linear when omega is in
    [0.8, 1.2] and the geometric-mean ratio stays below 0.95; otherwise
    inconclusive. Fewer than 4 usable errors raise InsufficientData.
    """
    errors = list(np.asarray(errors, dtype=float))
    while errors and errors[-1] < NOISE_FLOOR:
        errors.pop()
    if any(e <= 0 or not np.isfinite(e) for e in errors):
        raise InsufficientData("error sequence has nonpositive or non-finite interior entries")
    if len(errors) < MIN_USABLE:
        raise InsufficientData(f"need at least {MIN_USABLE} usable error values, got {len(errors)}")
    logs = np.log(errors)
    window = min(WINDOW_PAIRS, len(errors) - 1)
    lx = logs[-window - 1 : -1]
    ly = logs[1:][-window:]
    rate = float(np.exp(np.mean(ly - lx)))
    spread = float(np.max(lx) - np.min(lx))
    if spread < 1e-12:
        # stagnating sequence: slope is indeterminate, report no order
        omega = 0.0
    else:
        omega = float(np.polyfit(lx, ly, 1)[0])
    if omega >= 1.8:
        classification = "quadratic"
    elif 0.8 <= omega <= 1.2 and rate < 0.95:
        classification = "linear"
    else:
        classification = "inconclusive"
    return OrderEstimate(omega=omega, rate=rate, classification=classification, samples_used=window)


def tight_solution(sys: LoopSystem, x0: np.ndarray) -> np.ndarray:
    """Reference solution from a tight Newton solve (residual <= 1e-13)."""
    trace = solve(sys, x0, method="nr", tol_residual=1e-13, max_iters=200)
    if trace.termination is not Termination.RESIDUAL_TOL:
        raise InsufficientData(
            f"tight Newton solve did not converge ({trace.termination.value}); no reference solution"
        )
    return trace.final
