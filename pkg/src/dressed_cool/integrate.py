"""Adaptive embedded Runge-Kutta integration for complex ODE systems.

Dormand-Prince 5(4) pair with standard step-size control.  Steps are clamped
so every requested output time is hit exactly (no dense-output interpolation),
and an optional hook runs after each accepted step so callers can project the
state back onto a constraint manifold (Hermitian density matrices, here).
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

# Butcher tableau, Dormand & Prince (1980).  B5 propagates (order 5), the
# B5 - B4 difference weights estimate the local error of the order-4 solution.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


class StiffnessError(RuntimeError):
    """Step size underflowed; the loudest symptom of a stiff or broken system."""

    def __init__(self, time: float):
        super().__init__(f"step size underflow at t = {time:.6g}; system too stiff for this tolerance")
        self.time = time


def _error_norm(err: np.ndarray, y0: np.ndarray, y1: np.ndarray, rtol: float, atol: float) -> float:
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean(np.abs(err / scale) ** 2)))


def _initial_step(f, t0, y0, f0, rtol, atol, span):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean(np.abs(y0 / scale) ** 2))
    d1 = np.sqrt(np.mean(np.abs(f0 / scale) ** 2))
    h0 = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6 * span
    return min(h0, 0.1 * span)


def integrate_adaptive(
    f: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    t_grid: Sequence[float],
    rtol: float = 1e-8,
    atol: float = 1e-10,
    post_step: Callable[[np.ndarray], np.ndarray] | None = None,
    fixed_step: float | None = None,
    max_steps: int = 20_000_000,
) -> list[np.ndarray]:
    """Integrate y' = f(t, y) and return the solution at each time in t_grid.

    t_grid must be strictly increasing; t_grid[0] is the initial time and the
    returned list starts with a copy of y0.  With fixed_step set, adaptivity is
    disabled (used to measure convergence order).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 2:
        raise ValueError("t_grid needs at least an initial and one output time")
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")

    y = np.array(y0, dtype=complex)
    t = float(t_grid[0])
    span = float(t_grid[-1] - t_grid[0])
    out = [y.copy()]

    k = [None] * 7
    k[0] = f(t, y)
    h = fixed_step if fixed_step is not None else _initial_step(f, t, y, k[0], rtol, atol, span)

    steps = 0
    for target in t_grid[1:]:
        while t < target - 1e-14 * max(1.0, abs(target)):
            steps += 1
            if steps > max_steps:
                raise RuntimeError(f"exceeded {max_steps} integration steps")
            clamped = h > target - t
            h_try = target - t if clamped else h
            if h_try < 1e-14 * max(abs(t), 1.0):
                raise StiffnessError(t)

            y_new = y
            for i in range(1, 7):
                yi = y + h_try * sum(_A[i][j] * k[j] for j in range(i))
                k[i] = f(t + _C[i] * h_try, yi)
                if i == 6:
                    # the last stage's argument already is the order-5 update
                    # (tableau row 7 equals the propagation weights B5)
                    y_new = yi
            err_vec = h_try * sum(_E[i] * k[i] for i in range(7) if _E[i] != 0.0)

            if fixed_step is not None:
                accept = True
            else:
                err = _error_norm(err_vec, y, y_new, rtol, atol)
                accept = err <= 1.0
                factor = _MAX_FACTOR if err == 0.0 else min(
                    _MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * err ** -0.2)
                )
                if accept:
                    if not clamped:
                        h = h_try * factor
                else:
                    h = h_try * min(1.0, factor)

            if accept:
                t = t + h_try
                y = y_new
                if post_step is not None:
                    y = post_step(y)
                k[0] = f(t, y)
        out.append(y.copy())
    return out
