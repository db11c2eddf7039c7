"""Mild solutions of incompressible MHD written with differential forms.

The velocity ``u`` is a divergence-free 1-form and the magnetic field ``b``
an exact 2-form. The mild formulation is

    u(t) = e^{-tS} u0 + int_0^t e^{-(t-s)S} P(-u _| du - (delta b) _| b) ds
    b(t) = e^{-tM} b0 + int_0^t e^{-(t-s)M} (-d(u _| b)) ds

with ``S`` and ``M`` the Stokes and Maxwell operators and ``P`` the Leray
projection. :func:`picard_solve` iterates ``U <- a + B(U, U)`` on whole
trajectories; :func:`integrate_semi_implicit` is an independent
integrating-factor Euler scheme used for cross-validation.
"""
from __future__ import annotations

import json
import logging
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from .duhamel import duhamel
from .fields import FormField, dealias, load_snapshot, pointwise_contract, save_snapshot
from .hodge import (
    CONSTRAINT_RTOL,
    OperatorKind,
    codifferential,
    constraint_defect,
    exact_part,
    ext_deriv,
    harmonic_part,
    leray_project,
)
from .norms import CriticalExponents, product_norm
from .series import FieldSeries, TimeGrid

log = logging.getLogger(__name__)

PROJECTION_WARN_RTOL = 1e-8


class PicardDivergenceError(RuntimeError):
    """Picard residuals grew for several consecutive iterations; ``report`` holds the history."""

    def __init__(self, message: str, report: PicardReport):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True, eq=False)
class MhdState:
    """Velocity 1-form ``u`` and magnetic 2-form ``b`` at time ``t`` (stored spectrally)."""

    t: float
    u: FormField
    b: FormField

    def __post_init__(self):
        if self.u.grade != 1 or self.b.grade != 2:
            raise ValueError(f"state needs a 1-form u and a 2-form b, got grades {self.u.grade}, {self.b.grade}")
        if self.u.grid != self.b.grid:
            raise ValueError("u and b live on different grids")
        if self.u.grid.n < 3:
            raise ValueError("MHD states need n >= 3")
        object.__setattr__(self, "u", self.u.spectral_rep())
        object.__setattr__(self, "b", self.b.spectral_rep())

    @property
    def grid(self):
        return self.u.grid

    def constraint_defects(self) -> tuple[float, float]:
        """Relative ``delta u`` and ``d b`` defects."""
        return constraint_defect(self.u, OperatorKind.STOKES), constraint_defect(self.b, OperatorKind.MAXWELL)

    def validate(self, rtol: float = CONSTRAINT_RTOL) -> None:
        du, db = self.constraint_defects()
        if du > rtol:
            raise ValueError(f"velocity is not divergence-free: relative defect {du:.3e}")
        if db > rtol:
            raise ValueError(f"magnetic field is not closed: relative defect {db:.3e}")
        scale = max(np.abs(self.b.data).max(), 1e-300)
        if np.abs(harmonic_part(self.b).data).max() > rtol * scale:
            raise ValueError("magnetic field has a harmonic (mean) component")


def _relative_change(before: FormField, after: FormField) -> float:
    ref = before.norm_l2()
    return (before - after).norm_l2() / ref if ref > 0 else 0.0


def project_initial_data(u0: FormField, b0: FormField) -> tuple[FormField, FormField]:
    """Project ``u0`` onto mean-zero divergence-free 1-forms and ``b0`` onto exact 2-forms.

    Warns when either projection changes its input by more than 1e-8 relative.
    """
    u0 = u0.spectral_rep()
    b0 = b0.spectral_rep()
    u = leray_project(u0)
    u = u - harmonic_part(u)
    b = exact_part(b0)
    for name, before, after in (("u0", u0, u), ("b0", b0, b)):
        change = _relative_change(before, after)
        if change > PROJECTION_WARN_RTOL:
            warnings.warn(f"{name} projected onto its constraint space (relative change {change:.2e})", stacklevel=2)
    return u, b


def _nonlinear_pair(u: FormField, b: FormField) -> tuple[FormField, FormField]:
    pu = u.to_physical()
    pb = b.to_physical()
    pdu = ext_deriv(u).to_physical()
    pdb = codifferential(b).to_physical()
    w = pointwise_contract(pu, pdu) + pointwise_contract(pdb, pb)
    nu = -leray_project(dealias(w.to_spectral()))
    c = dealias(pointwise_contract(pu, pb).to_spectral())
    nb = -ext_deriv(c)
    return nu, nb


def nonlinear_terms(state: MhdState) -> tuple[FormField, FormField]:
    """Both right-hand sides ``(P(-u _| du - (delta b) _| b), -d(u _| b))`` with shared transforms."""
    state.validate()
    return _nonlinear_pair(state.u, state.b)


def nonlinear_u(state: MhdState) -> FormField:
    return nonlinear_terms(state)[0]


def nonlinear_b(state: MhdState) -> FormField:
    return nonlinear_terms(state)[1]


def pressure_gradient(state: MhdState) -> FormField:
    """``d pi``: the gradient part removed by the Leray projection, ``-(I - P)(u _| du + (delta b) _| b)``."""
    state.validate()
    pu = state.u.to_physical()
    pb = state.b.to_physical()
    w = pointwise_contract(pu, ext_deriv(state.u).to_physical())
    w = w + pointwise_contract(codifferential(state.b).to_physical(), pb)
    return -exact_part(dealias(w.to_spectral()))


# bilinear Duhamel operators ---------------------------------------------------

def _check_series(*series: FieldSeries) -> None:
    s0 = series[0]
    for s in series[1:]:
        if s.times != s0.times:
            raise ValueError(f"time grid mismatch: {s0.times} vs {s.times}")
        if s.grid != s0.grid:
            raise ValueError("spatial grid mismatch")


def _nodewise(fn, *series: FieldSeries) -> FieldSeries:
    times = series[0].times
    return FieldSeries.from_fields([fn(*(s[m] for s in series)) for m in range(times.M + 1)], times)


def _contract_term(x: FormField, y: FormField) -> FormField:
    return dealias(pointwise_contract(x.to_physical(), y.to_physical()).to_spectral())


def B1(u: FieldSeries, v: FieldSeries) -> FieldSeries:
    """``int_0^t e^{-(t-s)S} P(-u _| dv) ds``."""
    _check_series(u, v)
    forcing = _nodewise(lambda x, y: -leray_project(_contract_term(x, ext_deriv(y))), u, v)
    return duhamel(OperatorKind.STOKES, forcing, check=False)


def B2(b: FieldSeries, bp: FieldSeries) -> FieldSeries:
    """``int_0^t e^{-(t-s)S} P(-(delta b) _| b') ds``."""
    _check_series(b, bp)
    forcing = _nodewise(lambda x, y: -leray_project(_contract_term(codifferential(x), y)), b, bp)
    return duhamel(OperatorKind.STOKES, forcing, check=False)


def B3(u: FieldSeries, b: FieldSeries) -> FieldSeries:
    """``int_0^t e^{-(t-s)M} (-d(u _| b)) ds``."""
    _check_series(u, b)
    forcing = _nodewise(lambda x, y: -ext_deriv(_contract_term(x, y)), u, b)
    return duhamel(OperatorKind.MAXWELL, forcing, check=False)


def bilinear(U: tuple[FieldSeries, FieldSeries], Up: tuple[FieldSeries, FieldSeries]):
    """``B(U, U') = (B1(u, u') + B2(b, b'), B3(u, b'))``."""
    u, b = U
    up, bp = Up
    return B1(u, up) + B2(b, bp), B3(u, bp)


# trajectories -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Trajectory:
    times: TimeGrid
    u: FieldSeries
    b: FieldSeries

    def __post_init__(self):
        _check_series(self.u, self.b)
        if self.u.times != self.times:
            raise ValueError("series do not match the trajectory time grid")

    def __len__(self) -> int:
        return self.times.M + 1

    def state(self, m: int) -> MhdState:
        return MhdState(float(self.times.nodes[m]), self.u[m], self.b[m])

    @property
    def states(self) -> list[MhdState]:
        return [self.state(m) for m in range(len(self))]

    @property
    def grid(self):
        return self.u.grid

    def max_constraint_defects(self) -> tuple[float, float]:
        du = max(constraint_defect(f, OperatorKind.STOKES) for f in self.u)
        db = max(constraint_defect(f, OperatorKind.MAXWELL) for f in self.b)
        return du, db


@dataclass
class PicardReport:
    residuals: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    tol: float = 0.0

    @property
    def contraction_ratios(self) -> list[float]:
        r = self.residuals
        return [r[i + 1] / r[i] for i in range(len(r) - 1) if r[i] > 0]

    def as_dict(self) -> dict:
        return {
            "residuals": list(self.residuals),
            "contraction_ratios": self.contraction_ratios,
            "iterations": self.iterations,
            "converged": self.converged,
            "tol": self.tol,
        }


def linear_part(u0: FormField, b0: FormField, times: TimeGrid) -> tuple[FieldSeries, FieldSeries]:
    """``a = (e^{-tS} u0, e^{-tM} b0)`` on every node."""
    g = u0.grid
    decay = np.exp(-np.multiply.outer(times.nodes, g.tables.ksq))[:, None]
    au = FieldSeries(g, 1, times, decay * u0.data[None])
    ab = FieldSeries(g, 2, times, decay * b0.data[None])
    return au, ab


def _nonlinear_series(u: FieldSeries, b: FieldSeries) -> tuple[FieldSeries, FieldSeries]:
    pairs = [_nonlinear_pair(u[m], b[m]) for m in range(len(u))]
    nu = FieldSeries.from_fields([p[0] for p in pairs], u.times)
    nb = FieldSeries.from_fields([p[1] for p in pairs], u.times)
    return nu, nb


def picard_map(a, U):
    """``a + B(U, U)`` evaluated with one shared nonlinear pass per node."""
    nu, nb = _nonlinear_series(*U)
    return a[0] + duhamel(OperatorKind.STOKES, nu, check=False), a[1] + duhamel(OperatorKind.MAXWELL, nb, check=False)


def picard_solve(
    u0: FormField,
    b0: FormField,
    times: TimeGrid,
    tol: float = 1e-10,
    max_iter: int = 50,
    exponents: CriticalExponents | None = None,
    min_iter: int = 1,
) -> tuple[Trajectory, PicardReport]:
    """Solve ``U = a + B(U, U)`` by fixed-point iteration starting from ``U = a``.

    Residuals are measured in the discrete ``L^q_t L^p_x`` working-space norm
    (default ``p = 2n, q = 4``). Raises :class:`PicardDivergenceError` when the
    residual increases three times in a row.
    """
    u0, b0 = project_initial_data(u0, b0)
    if exponents is None:
        exponents = CriticalExponents.lqlp_default(u0.grid.n)
    a = linear_part(u0, b0, times)
    U = a
    report = PicardReport(tol=tol)
    for it in range(1, max_iter + 1):
        new = picard_map(a, U)
        res = product_norm(new[0] - U[0], new[1] - U[1], exponents)
        report.residuals.append(res)
        report.iterations = it
        U = new
        log.debug("picard iteration %d residual %.3e", it, res)
        if not np.isfinite(res):
            raise PicardDivergenceError("non-finite Picard residual", report)
        if res < tol and it >= min_iter:
            report.converged = True
            break
        r = report.residuals
        if len(r) >= 4 and r[-1] > r[-2] > r[-3] > r[-4]:
            raise PicardDivergenceError(
                f"Picard residual increased 3 times in a row (last {res:.3e}); shrink T or the data", report
            )
    return Trajectory(times, U[0], U[1]), report


def fixed_point_defect(traj: Trajectory, exponents: CriticalExponents | None = None) -> float:
    """``||U - a - B(U, U)||`` recomputed from scratch for a finished trajectory."""
    if exponents is None:
        exponents = CriticalExponents.lqlp_default(traj.grid.n)
    a = linear_part(traj.u[0], traj.b[0], traj.times)
    new = picard_map(a, (traj.u, traj.b))
    return product_norm(new[0] - traj.u, new[1] - traj.b, exponents)


# semi-implicit oracle ---------------------------------------------------------

def step_semi_implicit(state: MhdState, dt: float) -> MhdState:
    """One integrating-factor Euler step ``f <- e^{-dt|k|^2}(f + dt N(f))`` with re-projection."""
    nu, nb = _nonlinear_pair(state.u, state.b)
    decay = np.exp(-dt * state.grid.tables.ksq)
    u = state.u._wrap(decay * (state.u.data + dt * nu.data))
    b = state.b._wrap(decay * (state.b.data + dt * nb.data))
    u = leray_project(u)
    return MhdState(state.t + dt, u - harmonic_part(u), exact_part(b))


def integrate_semi_implicit(u0: FormField, b0: FormField, times: TimeGrid) -> Trajectory:
    u0, b0 = project_initial_data(u0, b0)
    state = MhdState(times.t0, u0, b0)
    us, bs = [state.u], [state.b]
    for _ in range(times.M):
        state = step_semi_implicit(state, times.dt)
        us.append(state.u)
        bs.append(state.b)
    return Trajectory(times, FieldSeries.from_fields(us, times), FieldSeries.from_fields(bs, times))


# persistence --------------------------------------------------------------------

def save_trajectory(traj: Trajectory, directory, tol: float | None = None, iterations: int | None = None) -> None:
    """Write HMHD snapshots ``u_0000.hmhd``, ``b_0000.hmhd``, ... plus ``manifest.json``."""
    os.makedirs(directory, exist_ok=True)
    g = traj.grid
    for m in range(len(traj)):
        save_snapshot(traj.u[m], os.path.join(directory, f"u_{m:04d}.hmhd"))
        save_snapshot(traj.b[m], os.path.join(directory, f"b_{m:04d}.hmhd"))
    manifest = {
        "n": g.n,
        "N": g.N,
        "L": g.L,
        "t0": traj.times.t0,
        "T": traj.times.T,
        "M": traj.times.M,
        "tol": tol,
        "iterations": iterations,
    }
    with open(os.path.join(directory, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)


def load_trajectory(directory) -> Trajectory:
    with open(os.path.join(directory, "manifest.json")) as fh:
        manifest = json.load(fh)
    times = TimeGrid(manifest["T"], manifest["M"], manifest["t0"])
    us = [load_snapshot(os.path.join(directory, f"u_{m:04d}.hmhd")) for m in range(times.M + 1)]
    bs = [load_snapshot(os.path.join(directory, f"b_{m:04d}.hmhd")) for m in range(times.M + 1)]
    return Trajectory(times, FieldSeries.from_fields(us, times), FieldSeries.from_fields(bs, times))
