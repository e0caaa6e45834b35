"""Dormand-Prince 5(4) stepper with Hermite dense output.

The stepper is driven one accepted step at a time so that callers can
inspect the state, switch variables or stop on custom criteria between
steps.  The error norm is relative to the size of the whole state vector,
which keeps solutions that decay by hundreds of orders of magnitude
resolved to a fixed relative accuracy.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import StepUnderflow

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = np.array([
    [0, 0, 0, 0, 0, 0],
    [1 / 5, 0, 0, 0, 0, 0],
    [3 / 40, 9 / 40, 0, 0, 0, 0],
    [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
])
B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
E = B5 - B4

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
EPS = np.finfo(float).eps


def _stages(fun, t, y, f, h):
    k = np.empty((7, y.size))
    k[0] = f
    for i in range(1, 6):
        k[i] = fun(t + C[i] * h, y + h * (A[i, :i] @ k[:i]))
    y_new = y + h * (B5[:6] @ k[:6])
    k[6] = fun(t + h, y_new)
    return y_new, k


def rk_step(fun, t, y, h, f=None):
    """One Dormand-Prince step of size ``h`` (may be negative); 5th order result."""
    y = np.asarray(y, dtype=float)
    if f is None:
        f = fun(t, y)
    y_new, _ = _stages(fun, t, y, np.asarray(f, dtype=float), h)
    return y_new


def hermite(t0, y0, f0, t1, y1, f1, t):
    """Cubic Hermite interpolant on ``[t0, t1]`` evaluated at ``t``."""
    h = t1 - t0
    s = (np.asarray(t, dtype=float) - t0) / h
    s2, s3 = s * s, s * s * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    return (np.multiply.outer(h00, y0) + np.multiply.outer(h10 * h, f0)
            + np.multiply.outer(h01, y1) + np.multiply.outer(h11 * h, f1))


def hermite_root(t0, y0, f0, t1, y1, f1, component=0, level=0.0):
    """First crossing of ``y[component] = level`` inside ``[t0, t1]``."""
    def g(t):
        return hermite(t0, y0, f0, t1, y1, f1, t)[component] - level

    return brentq(g, t0, t1, xtol=1e-15 * max(1.0, abs(t1)), rtol=4 * EPS)


class Stepper:
    """Adaptive driver around :func:`_stages`.

    Parameters
    ----------
    fun:
        Right-hand side ``fun(t, y) -> ndarray``.
    max_step:
        Either a number or a callable ``max_step(t)`` giving the cap at ``t``.
    componentwise:
        Scale each component's error by its own size instead of the size of
        the whole state.  Needed when one component is many decades smaller
        than another but must still be resolved relatively.
    """

    def __init__(self, fun: Callable, t0: float, y0, rtol: float = 1e-10,
                 atol: float = 1e-300, first_step: float | None = None,
                 max_step: float | Callable[[float], float] = math.inf,
                 direction: float = 1.0, componentwise: bool = False):
        self.fun = fun
        self.t = float(t0)
        self.y = np.asarray(y0, dtype=float).copy()
        self.f = np.asarray(fun(self.t, self.y), dtype=float)
        self.rtol = rtol
        self.atol = atol
        self.direction = 1.0 if direction >= 0 else -1.0
        self.componentwise = componentwise
        self._cap = max_step if callable(max_step) else (lambda t, m=max_step: m)
        self.h = abs(first_step) if first_step else self._initial_step()
        self.n_accepted = 0
        self.n_rejected = 0
        self.nfev = 1

    def _scale(self, y_a, y_b):
        if self.componentwise:
            return self.atol + self.rtol * np.maximum(np.abs(y_a), np.abs(y_b))
        size = max(np.abs(y_a).sum(), np.abs(y_b).sum())
        return self.atol + self.rtol * size

    def _initial_step(self):
        sc = self._scale(self.y, self.y)
        d0 = float(np.max(np.abs(self.y) / sc))
        d1 = float(np.max(np.abs(self.f) / sc))
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        return min(h0, self._cap(self.t))

    def step(self, t_bound: float):
        """Advance by one accepted step, never past ``t_bound``.

        Returns the previous ``(t, y, f)`` so the caller can build dense
        output over the step just taken.
        """
        t, y, f = self.t, self.y, self.f
        remaining = abs(t_bound - t)
        min_step = 10 * EPS * max(abs(t), 1e-300)
        h = min(self.h, self._cap(t), remaining)
        while True:
            if h < min_step:
                raise StepUnderflow(
                    f"step size {h:.3e} underflowed at t = {t:.17g}")
            hs = h * self.direction
            y_new, k = _stages(self.fun, t, y, f, hs)
            self.nfev += 6
            err_vec = hs * (E @ k)
            sc = self._scale(y, y_new)
            with np.errstate(over="ignore", invalid="ignore"):
                err = math.sqrt(float(np.mean((err_vec / sc) ** 2)))
            if not math.isfinite(err) or not np.all(np.isfinite(y_new)):
                self.n_rejected += 1
                h *= MIN_FACTOR
                continue
            if err <= 1.0:
                factor = MAX_FACTOR if err == 0 else min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * err ** -0.2))
                prev = (t, y, f)
                self.t = t + hs if h < remaining else float(t_bound)
                self.y = y_new
                self.f = k[6]
                self.h = h * factor if h < remaining else self.h
                self.n_accepted += 1
                return prev
            self.n_rejected += 1
            h *= max(MIN_FACTOR, SAFETY * err ** -0.2)
