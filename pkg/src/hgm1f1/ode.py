"""Explicit one-step integrators for linear systems v' = R(x) v.

Fixed-step classical RK4 is the workhorse; forward Euler is kept for
comparison with the hand-rolled m=2 scheme, and ``rk4_adaptive`` adds step
doubling with a PI controller for when a step size is hard to guess.

Fixed-step runs shrink the nominal step slightly so that an integer number
of steps lands exactly on every stopping point.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import IntegrationError

METHODS = ("euler", "rk4", "rk4_adaptive")


@dataclass(frozen=True)
class IntegrationPlan:
    x_start: float
    x_end: float
    step: float = 1e-3
    method: str = "rk4"
    rel_tol: float = 1e-10

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.x_start == self.x_end:
            raise ValueError("empty integration interval")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.method == "rk4_adaptive" and not 0 < self.rel_tol <= 1e-2:
            raise ValueError("rel_tol must lie in (0, 1e-2]")


def _euler(rhs, x, v, h):
    return v + h * rhs(x, v)


def _rk4(rhs, x, v, h):
    k1 = rhs(x, v)
    k2 = rhs(x + h / 2, v + (h / 2) * k1)
    k3 = rhs(x + h / 2, v + (h / 2) * k2)
    k4 = rhs(x + h, v + h * k3)
    return v + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def _check(v, x):
    if not np.all(np.isfinite(v)):
        raise IntegrationError(f"non-finite state at x={x!r}")


def _fixed(rhs, v, x0, x1, step, stepper):
    span = x1 - x0
    n = max(1, math.ceil(abs(span) / step - 1e-9))
    h = span / n
    for j in range(n):
        x = x0 + j * h
        v = stepper(rhs, x, v, h)
        _check(v, x + h)
    return v


def _adaptive(rhs, v, x0, x1, h0, rel_tol, max_steps=10_000_000):
    direction = 1.0 if x1 > x0 else -1.0
    x, h = x0, min(abs(h0), abs(x1 - x0))
    err_prev = 1.0
    steps = 0
    while (x1 - x) * direction > 0:
        h = min(h, abs(x1 - x))
        hs = h * direction
        full = _rk4(rhs, x, v, hs)
        half = _rk4(rhs, x, v, hs / 2)
        two = _rk4(rhs, x + hs / 2, half, hs / 2)
        scale = np.maximum(np.abs(two), np.abs(v)) * rel_tol + 1e-300
        err = float(np.max(np.abs(two - full) / scale)) / 15.0
        if err <= 1.0:
            x += hs
            v = two + (two - full) / 15.0
            _check(v, x)
            # PI control on the accepted step
            fac = 0.9 * max(err, 1e-10) ** (-0.7 / 5) * err_prev ** (0.4 / 5)
            err_prev = max(err, 1e-4)
            h *= min(5.0, max(0.2, fac))
        else:
            h *= max(0.1, 0.9 * err ** (-1 / 5))
        steps += 1
        if steps > max_steps or h < 1e-14 * max(1.0, abs(x)):
            raise IntegrationError(f"step size collapsed near x={x!r}")
    return v


def _segment(rhs, v, x0, x1, plan):
    if plan.method == "euler":
        return _fixed(rhs, v, x0, x1, plan.step, _euler)
    if plan.method == "rk4":
        return _fixed(rhs, v, x0, x1, plan.step, _rk4)
    return _adaptive(rhs, v, x0, x1, plan.step, plan.rel_tol)


def integrate(rhs, v0, plan):
    """Approximate v(plan.x_end) for v' = rhs(x, v), v(plan.x_start) = v0."""
    v = np.array(v0, dtype=float, copy=True)
    _check(v, plan.x_start)
    return _segment(rhs, v, plan.x_start, plan.x_end, plan)


def integrate_with_trace(rhs, v0, plan, grid):
    """Snapshots ``[(x, v(x)), ...]`` at the sorted points of ``grid``.

    The solver stops exactly at each grid point, so a snapshot equals what
    :func:`integrate` would return for that end point with the same step.
    """
    grid = [float(g) for g in grid]
    if not grid:
        return []
    lo, hi = sorted((plan.x_start, plan.x_end))
    sign = 1 if plan.x_end > plan.x_start else -1
    if any(sign * (b - a) < 0 for a, b in zip(grid[:-1], grid[1:])):
        raise ValueError("grid must be ordered in the direction of integration")
    if grid[0] < lo - 1e-12 or grid[-1] > hi + 1e-12 or grid[0] > hi or grid[-1] < lo:
        raise ValueError("grid must lie inside the integration interval")
    v = np.array(v0, dtype=float, copy=True)
    x = plan.x_start
    out = []
    for g in grid:
        if g != x:
            v = _segment(rhs, v, x, g, plan)
            x = g
        out.append((g, v.copy()))
    return out
