"""Input checks shared by the estimator wrappers."""
from __future__ import annotations

from math import comb

import numpy as np

from .fields import FormField, GridSpec


def check_grid_params(n, N, L) -> GridSpec:
    if not isinstance(n, (int, np.integer)) or not isinstance(N, (int, np.integer)):
        raise TypeError(f"n and N must be integers, got {type(n).__name__}, {type(N).__name__}")
    return GridSpec(int(n), int(N), float(L))


def check_form(x, grid: GridSpec, grade: int, name: str = "field") -> FormField:
    """Accept a FormField or a physical array of shape ``(C(n, grade), N, ..., N)``."""
    if isinstance(x, FormField):
        if x.grid != grid:
            raise ValueError(f"{name} lives on {x.grid}, expected {grid}")
        if x.grade != grade:
            raise ValueError(f"{name} has grade {x.grade}, expected {grade}")
        return x
    arr = np.asarray(x, dtype=float)
    expected = (comb(grid.n, grade), *grid.shape)
    if arr.shape != expected:
        raise ValueError(f"{name} has shape {arr.shape}, expected {expected}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")
    return FormField(grid, grade, arr)


def check_pair(X, grid: GridSpec) -> tuple[FormField, FormField]:
    try:
        u0, b0 = X
    except (TypeError, ValueError):
        raise ValueError("X must be a pair (u0, b0)") from None
    return check_form(u0, grid, 1, "u0"), check_form(b0, grid, 2, "b0")


def check_times(times, T: float) -> np.ndarray:
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if t.ndim != 1:
        raise ValueError("times must be a scalar or 1-d array")
    if not np.isfinite(t).all() or (t < 0).any() or (t > T * (1 + 1e-12)).any():
        raise ValueError(f"times must lie in [0, {T}]")
    return t
