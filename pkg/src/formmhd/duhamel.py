"""Exponential product integration of the Duhamel integral.

For a forcing ``g`` sampled on a time grid, computes

    I(t_m) = int_0^{t_m} exp(-(t_m - s) A) g(s) ds

with the heat kernel exact per Fourier mode and ``g`` linearly interpolated
between nodes. One step of length ``h`` with ``z = -h |k|^2`` reads

    I_{m+1} = e^z I_m + h [(phi1(z) - phi2(z)) g_m + phi2(z) g_{m+1}]

which is second order in ``h`` and unconditionally stable.
"""
from __future__ import annotations

import numpy as np

from .hodge import OperatorKind, check_constraint
from .series import FieldSeries

PHI_SERIES_THRESHOLD = 1e-3


def phi1(z):
    """``(e^z - 1) / z`` with a 4-term Taylor fallback near 0."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < PHI_SERIES_THRESHOLD
    zs = np.where(small, 1.0, z)
    out = np.expm1(zs) / zs
    taylor = 1.0 + z / 2.0 + z**2 / 6.0 + z**3 / 24.0
    return np.where(small, taylor, out)


def phi2(z):
    """``(e^z - 1 - z) / z^2`` with a 4-term Taylor fallback near 0."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < PHI_SERIES_THRESHOLD
    zs = np.where(small, 1.0, z)
    out = (np.expm1(zs) - zs) / zs**2
    taylor = 0.5 + z / 6.0 + z**2 / 24.0 + z**3 / 120.0
    return np.where(small, taylor, out)


class DuhamelWeights:
    """Per-mode step coefficients for one grid and step size."""

    def __init__(self, grid, h: float):
        z = -h * grid.tables.ksq
        self.h = h
        self.decay = np.exp(z)
        p1 = phi1(z)
        p2 = phi2(z)
        self.w_left = h * (p1 - p2)
        self.w_right = h * p2

    def step(self, acc, g_left, g_right):
        return self.decay * acc + self.w_left * g_left + self.w_right * g_right


def duhamel(kind, forcing: FieldSeries, check: bool = True) -> FieldSeries:
    """Duhamel integral of ``forcing`` for the Laplacian, Stokes or Maxwell semigroup.

    The result at node 0 is zero. With ``check`` the forcing is verified to
    lie in the constraint subspace of ``kind`` at the first and last node.
    """
    kind = OperatorKind(kind)
    if not isinstance(forcing, FieldSeries):
        raise TypeError(f"forcing must be a FieldSeries, got {type(forcing).__name__}")
    if check and kind is not OperatorKind.LAPLACIAN:
        for m in {0, forcing.times.M}:
            check_constraint(forcing[m], kind)
    w = DuhamelWeights(forcing.grid, forcing.times.dt)
    g = forcing.data
    out = np.empty_like(g)
    out[0] = 0.0
    for m in range(forcing.times.M):
        out[m + 1] = w.step(out[m], g[m], g[m + 1])
    return forcing.with_data(out)
