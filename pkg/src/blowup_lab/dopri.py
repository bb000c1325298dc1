"""
Dormand-Prince 5(4) embedded Runge-Kutta integrator.

The 5th order solution is propagated (local extrapolation) and the
difference to the embedded 4th order solution controls the step size.
Accepted nodes are returned together with the right-hand side at each
node, which is all the quintic Hermite interpolant in `dense` needs for the
second-order ODEs used in this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, IntegrationError

ORDER = 5

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# 5th order weights are the last row of _A; error = (b5 - b4) weights
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

# below this the error test asks for more than double precision can deliver
MIN_TOL = 1e-14

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


@dataclass
class Trajectory:
    """Accepted nodes of one integration run."""

    x: np.ndarray
    y: np.ndarray          # shape (n, d)
    f: np.ndarray          # rhs at each node, shape (n, d)
    event: bool = False    # terminal event fired between the last two nodes
    rejected: int = 0


def _initial_step(rhs, x0, y0, f0, direction, tol, max_step):
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        h = _initial_step_estimate(rhs, x0, y0, f0, direction, tol, max_step)
    if not (h > 0 and math.isfinite(h)):
        raise IntegrationError(f"no usable initial step at x={x0!r}", last_x=x0)
    return h


def _initial_step_estimate(rhs, x0, y0, f0, direction, tol, max_step):
    scale = tol * (1.0 + np.abs(y0))
    d0 = np.max(np.abs(y0) / scale)
    d1 = np.max(np.abs(f0) / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, max_step)
    y1 = y0 + direction * h0 * f0
    f1 = rhs(x0 + direction * h0, y1)
    d2 = np.max(np.abs(f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / ORDER)
    return min(100 * h0, h1, max_step)


def step(rhs, x, y, f, h):
    """One Dormand-Prince step of size h: (y_new, rhs(y_new), error estimate)."""
    k = [f]
    # overflow near a singularity surfaces as non-finite values, handled by the caller
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, 7):
            yi = y + h * sum(a * kj for a, kj in zip(_A[i], k) if a != 0.0)
            k.append(rhs(x + _C[i] * h, yi))
            if i == 6:
                y_new = yi
        err = h * sum(e * kj for e, kj in zip(_E, k) if e != 0.0)
    return y_new, k[6], err


def integrate(rhs: Callable, x0: float, y0, x_end: float, *, tol: float = 1e-10,
              max_step: float = math.inf, fixed_step: float | None = None,
              event: Callable | None = None, max_steps: int = 1_000_000) -> Trajectory:
    """Integrate y' = rhs(x, y) from x0 to x_end.

    `event(x, y)` is a scalar function; integration stops at the first
    accepted step across which it changes sign (the crossing lies between
    the last two returned nodes). With `fixed_step` the error control is
    disabled and steps of exactly that size are taken, the last one
    shortened to land on `x_end`.
    """
    if fixed_step is None and not MIN_TOL <= tol < 1.0:
        raise ConfigError(f"tol must lie in [{MIN_TOL}, 1), got {tol!r}")
    y = np.array(y0, dtype=float)
    span = x_end - x0
    if span == 0:
        raise IntegrationError("empty integration interval", last_x=x0)
    direction = 1.0 if span > 0 else -1.0
    f = np.asarray(rhs(x0, y), dtype=float)
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(f))):
        raise IntegrationError(f"non-finite initial state at x={x0!r}", last_x=x0)

    xs, ys, fs = [x0], [y.copy()], [f.copy()]
    g_prev = event(x0, y) if event is not None else None
    if fixed_step is not None:
        h = abs(fixed_step)
    else:
        h = _initial_step(rhs, x0, y, f, direction, tol, max_step)
    x = x0
    rejected = 0
    for _ in range(max_steps):
        remaining = (x_end - x) * direction
        if remaining <= 1e-14 * max(1.0, abs(x_end)):
            return Trajectory(np.array(xs), np.array(ys), np.array(fs), False, rejected)
        h = min(h, remaining)
        y_new, f_new, err = step(rhs, x, y, f, direction * h)
        finite = np.all(np.isfinite(y_new)) and np.all(np.isfinite(f_new))

        if fixed_step is not None:
            if not finite:
                raise IntegrationError(f"non-finite solution past x={x!r}", last_x=x)
            accept = True
        else:
            if finite:
                scale = tol * (1.0 + np.maximum(np.abs(y), np.abs(y_new)))
                err_norm = float(np.max(np.abs(err) / scale))
            else:
                err_norm = math.inf
            accept = err_norm <= 1.0
            if accept:
                factor = _MAX_FACTOR if err_norm == 0 else min(
                    _MAX_FACTOR, _SAFETY * err_norm ** (-1.0 / ORDER))
            else:
                factor = max(_MIN_FACTOR, _SAFETY * err_norm ** (-1.0 / ORDER)) \
                    if math.isfinite(err_norm) else _MIN_FACTOR

        if not accept:
            rejected += 1
            h *= factor
            if not h >= 1e-14 * max(1.0, abs(x)):
                raise IntegrationError(f"step size underflow at x={x!r}", last_x=x)
            continue

        x = x + direction * h
        if (x_end - x) * direction < 1e-14 * max(1.0, abs(x_end)):
            x = x_end
        y, f = y_new, f_new
        xs.append(x)
        ys.append(y.copy())
        fs.append(f.copy())
        if event is not None:
            g = event(x, y)
            if g_prev != 0 and (g == 0 or (g > 0) != (g_prev > 0)):
                return Trajectory(np.array(xs), np.array(ys), np.array(fs), True, rejected)
            g_prev = g
        if fixed_step is None:
            h = min(h * factor, max_step)
        else:
            h = abs(fixed_step)
    raise IntegrationError(f"exceeded {max_steps} steps", last_x=x)
