"""Central finite differences, used wherever a field has no analytic derivative."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .vectors import Array

RELATIVE_STEP = 1e-6


def step_size(value: float) -> float:
    return RELATIVE_STEP * max(1.0, abs(value))


def partial_derivatives(func: Callable[[float, Array], float], t: float, x: Array) -> tuple[float, Array]:
    """Return `(∂f/∂t, ∂f/∂x)` of a scalar function of `(t, x)`."""

    h = step_size(t)
    ft = (func(t + h, x) - func(t - h, x)) / (2 * h)
    fx = np.empty(len(x))
    for i in range(len(x)):
        h = step_size(x[i])
        forward = x.copy()
        backward = x.copy()
        forward[i] += h
        backward[i] -= h
        fx[i] = (func(t, forward) - func(t, backward)) / (2 * h)
    return float(ft), fx


def jacobian(func: Callable[[float, Array], Array], t: float, x: Array) -> tuple[Array, Array]:
    """Return `(∂F/∂t, ∂F/∂x)` of a vector function of `(t, x)`; the second item has shape `(m, n)`."""

    h = step_size(t)
    ft = (np.asarray(func(t + h, x)) - np.asarray(func(t - h, x))) / (2 * h)
    columns = []
    for i in range(len(x)):
        h = step_size(x[i])
        forward = x.copy()
        backward = x.copy()
        forward[i] += h
        backward[i] -= h
        columns.append((np.asarray(func(t, forward)) - np.asarray(func(t, backward))) / (2 * h))
    return ft, np.stack(columns, axis=-1)
