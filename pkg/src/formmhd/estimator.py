"""scikit-learn style wrappers around the solver and the Hodge projections."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_form, check_grid_params, check_pair, check_times
from .hodge import coexact_part, exact_part, harmonic_part
from .norms import CriticalExponents
from .series import TimeGrid
from .solver import MhdState, picard_solve


class MildMHDSolver(BaseEstimator):
    """Picard solver for the mild MHD system on a periodic box.

    ``fit((u0, b0))`` computes the trajectory on ``M`` uniform steps up to
    ``T``; ``predict(times)`` returns states interpolated linearly between
    nodes (exact at nodes).
    """

    def __init__(self, n=3, N=16, L=2 * np.pi, T=0.1, M=32, tol=1e-10, max_iter=50, p=None):
        self.n = n
        self.N = N
        self.L = L
        self.T = T
        self.M = M
        self.tol = tol
        self.max_iter = max_iter
        self.p = p

    def fit(self, X, y=None):
        grid = check_grid_params(self.n, self.N, self.L)
        u0, b0 = check_pair(X, grid)
        exps = None if self.p is None else CriticalExponents.from_p(grid.n, self.p)
        self.trajectory_, self.report_ = picard_solve(u0, b0, TimeGrid(self.T, self.M), self.tol, self.max_iter, exps)
        self.grid_ = grid
        return self

    def predict(self, times) -> list[MhdState]:
        check_is_fitted(self, "trajectory_")
        traj = self.trajectory_
        ts = check_times(times, traj.times.T)
        pos = np.clip((ts - traj.times.t0) / traj.times.dt, 0, traj.times.M)
        near = np.abs(pos - np.round(pos)) < 1e-9
        pos[near] = np.round(pos[near])
        out = []
        for t, x in zip(ts, pos):
            m = min(int(np.floor(x)), traj.times.M - 1)
            w = x - m
            u = traj.u[m] * (1 - w) + traj.u[m + 1] * w
            b = traj.b[m] * (1 - w) + traj.b[m + 1] * w
            out.append(MhdState(float(t), u, b))
        return out


_PARTS = {"exact": exact_part, "coexact": coexact_part, "harmonic": harmonic_part}


class HodgeProjector(TransformerMixin, BaseEstimator):
    """Stateless transformer returning one Hodge component of a physical form array."""

    def __init__(self, n=3, N=16, grade=1, part="coexact", L=2 * np.pi):
        self.n = n
        self.N = N
        self.grade = grade
        self.part = part
        self.L = L

    def fit(self, X=None, y=None):
        if self.part not in _PARTS:
            raise ValueError(f"part must be one of {sorted(_PARTS)}, got {self.part!r}")
        self.grid_ = check_grid_params(self.n, self.N, self.L)
        if not 0 <= self.grade <= self.grid_.n:
            raise ValueError(f"grade must be in [0, {self.grid_.n}], got {self.grade}")
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "grid_")
        f = check_form(X, self.grid_, self.grade, "X")
        return _PARTS[self.part](f.spectral_rep()).to_physical().data.copy()
