"""Scenario runners producing structured, hash-stamped measurement reports."""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .data import random_exact, random_solenoidal, scaled_to, taylor_green_mhd
from .fields import FormField, GridSpec, band_limit, dilate, random_field
from .norms import (
    CriticalExponents,
    _derivative,
    besov_norm,
    leibniz_ratio,
    maxreg_ratio,
    node_lp_norms,
    product_norm,
    time_lq,
)
from .oracle3d import (
    advective_rhs,
    form_to_vector,
    integrate_vector_semi_implicit,
    pressure_gradient_oracle,
    vector_rhs,
)
from .series import FieldSeries, TimeGrid
from .solver import (
    MhdState,
    PicardDivergenceError,
    Trajectory,
    bilinear,
    integrate_semi_implicit,
    linear_part,
    nonlinear_terms,
    nonlinear_u,
    picard_solve,
    pressure_gradient,
)

log = logging.getLogger(__name__)

SCENARIOS = ("contraction", "scaling", "uniqueness", "smallness_sweep", "oracle3d", "inequality_lab")
DATA_FAMILIES = ("random", "taylor_green")


@dataclass
class ScenarioConfig:
    scenario: str = "contraction"
    n: int = 3
    N: int = 16
    L: float = 2 * math.pi
    T: float = 0.1
    M: int = 32
    p: float | None = None
    q: float | None = None
    seed: int = 0
    epsilons: list = field(default_factory=lambda: [1e-1, 1e-2, 1e-3])
    tol: float = 1e-10
    out: str = "results"
    lam: int = 2
    r: float = 2.0
    samples: int = 20
    pairs: int = 4
    max_iter: int = 50
    data: str = "random"
    kmax: int = 4
    bisections: int = 6

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; choose from {SCENARIOS}")
        if self.data not in DATA_FAMILIES:
            raise ValueError(f"unknown data family {self.data!r}; choose from {DATA_FAMILIES}")
        if self.M < 1 or self.T <= 0:
            raise ValueError(f"need M >= 1 and T > 0, got M={self.M}, T={self.T}")
        if self.samples < 0:
            raise ValueError("samples must be nonnegative")
        self.epsilons = [float(e) for e in self.epsilons]
        GridSpec(self.n, self.N, self.L)
        self.exponents()

    @classmethod
    def from_dict(cls, d: dict) -> ScenarioConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> ScenarioConfig:
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @property
    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.n, self.N, self.L)

    @property
    def times(self) -> TimeGrid:
        return TimeGrid(self.T, self.M)

    def exponents(self) -> CriticalExponents:
        """Working-space exponents: ``p = 2n, q = 4`` unless overridden."""
        if self.p is None and self.q is None:
            return CriticalExponents.lqlp_default(self.n)
        if self.q is None:
            return CriticalExponents.from_p(self.n, self.p)
        if self.p is None:
            return CriticalExponents(self.n, self.n / (1 - 2 / self.q), self.q)
        return CriticalExponents(self.n, self.p, self.q)


@dataclass
class Report:
    scenario: str
    config: dict
    config_hash: str
    rows: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    trajectories: dict = field(default_factory=dict, repr=False)

    @classmethod
    def for_config(cls, cfg: ScenarioConfig) -> Report:
        return cls(cfg.scenario, cfg.to_dict(), cfg.hash)

    def add(self, name: str, value, n: int, N: int, p=None, q=None, **params) -> None:
        self.rows.append({
            "name": name,
            "n": n,
            "N": N,
            "p": p,
            "q": q,
            "value": float(value),
            "params": params,
            "config_hash": self.config_hash,
        })

    def check(self, name: str, ok) -> None:
        self.checks[name] = bool(ok)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def values(self, name: str) -> list[float]:
        return [r["value"] for r in self.rows if r["name"] == name]

    def as_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "config": self.config,
            "config_hash": self.config_hash,
            "passed": self.passed,
            "checks": self.checks,
            "rows": self.rows,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, default=_json_default)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "n", "N", "p", "q", "value", "params", "config_hash"])
        for r in self.rows:
            params = json.dumps(r["params"], sort_keys=True, default=_json_default)
            w.writerow([r["name"], r["n"], r["N"], r["p"], r["q"], repr(r["value"]), params, r["config_hash"]])
        return buf.getvalue()


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _seeds(seed: int, count: int) -> list[int]:
    ss = np.random.SeedSequence(seed)
    return [int(c.generate_state(1)[0]) for c in ss.spawn(count)]


def initial_data(cfg: ScenarioConfig, seed: int | None = None) -> tuple[FormField, FormField]:
    """Unnormalized initial pair from the configured family."""
    grid = cfg.grid
    seed = cfg.seed if seed is None else seed
    s_u, s_b = _seeds(seed, 2)
    if cfg.data == "taylor_green":
        return taylor_green_mhd(grid, s_b)
    return random_solenoidal(grid, s_u, kmax=cfg.kmax), random_exact(grid, s_b, kmax=cfg.kmax)


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


# contraction ------------------------------------------------------------------

def estimate_bilinear_bound(cfg: ScenarioConfig, pairs: int | None = None) -> float:
    """``max ||B(U, U')|| / (||U|| ||U'||)`` over linear evolutions of random data."""
    pairs = cfg.pairs if pairs is None else pairs
    exps = cfg.exponents()
    times = cfg.times
    seeds = _seeds(cfg.seed + 1, 2 * pairs)
    best = 0.0
    for i in range(pairs):
        U = linear_part(*initial_data(cfg, seeds[2 * i]), times)
        V = linear_part(*initial_data(cfg, seeds[2 * i + 1]), times)
        num = product_norm(*bilinear(U, V), exps)
        den = product_norm(*U, exps) * product_norm(*V, exps)
        if den > 0:
            best = max(best, num / den)
    return best


def run_contraction(cfg: ScenarioConfig) -> Report:
    rep = Report.for_config(cfg)
    exps = cfg.exponents()
    g = cfg.grid
    base = initial_data(cfg)
    first_ratios = {}
    for eps in cfg.epsilons:
        u0, b0 = scaled_to(*base, eps)
        try:
            traj, pr = picard_solve(u0, b0, cfg.times, cfg.tol, cfg.max_iter, exps, min_iter=3)
        except PicardDivergenceError as err:
            rep.add("diverged", 1.0, g.n, g.N, exps.p, exps.q, epsilon=eps, iterations=err.report.iterations)
            continue
        rep.trajectories[f"eps_{eps:.1e}"] = (traj, pr)
        for i, res in enumerate(pr.residuals, start=1):
            ratio = pr.residuals[i - 1] / pr.residuals[i - 2] if i > 1 and pr.residuals[i - 2] > 0 else None
            rep.add("residual", res, g.n, g.N, exps.p, exps.q, epsilon=eps, iteration=i, ratio=ratio)
        ratios = pr.contraction_ratios
        if eps > 0 and ratios:
            first_ratios[eps] = ratios[0]
            rep.check(f"ratios_below_half_eps_{eps:.1e}", max(ratios) < 0.5)
    K = estimate_bilinear_bound(cfg)
    rep.add("bilinear_bound", K, g.n, g.N, exps.p, exps.q, pairs=cfg.pairs)
    if len(first_ratios) >= 2:
        eps = sorted(first_ratios)
        r = [first_ratios[e] for e in eps]
        rep.check("first_ratio_monotone_in_eps", all(a < b for a, b in zip(r, r[1:])))
        slope = loglog_slope(eps, r)
        rep.add("first_ratio_slope", slope, g.n, g.N, exps.p, exps.q, epsilons=eps)
        rep.check("first_ratio_slope_near_one", abs(slope - 1) <= 0.2)
    return rep


# scaling ----------------------------------------------------------------------

def dilate_pair(u: FormField, b: FormField, lam: int) -> tuple[FormField, FormField]:
    """``(lam u(lam x), lam b(lam x))`` on the same grid."""
    return dilate(u, lam) * lam, dilate(b, lam) * lam


def scaling_discrepancy(u0: FormField, b0: FormField, times: TimeGrid, lam: int, tol: float = 1e-12,
                        max_iter: int = 50) -> tuple[float, Trajectory]:
    """Max relative mismatch between the dilated solution and the solution from dilated data.

    ``lam * band_limit < N/3`` is required. It is not sufficient on its own:
    the nonlinearity generates higher modes, which the dilated run truncates
    earlier, so the grid must resolve the cascade of the base run too.
    """
    g = u0.grid
    cutoff = g.N / 3
    bl = max(band_limit(u0), band_limit(b0))
    if lam * bl >= cutoff:
        raise ValueError(f"lambda * band limit = {lam * bl} must stay below N/3 = {cutoff:.2f}")
    base, _ = picard_solve(u0, b0, times, tol, max_iter)
    ul0, bl0 = dilate_pair(base.u[0], base.b[0], lam)
    fine, _ = picard_solve(ul0, bl0, times.scaled(1.0 / lam**2), tol, max_iter)
    worst = 0.0
    scale = 0.0
    for m in range(times.M + 1):
        eu, eb = dilate_pair(base.u[m], base.b[m], lam)
        diff = (fine.u[m] - eu).norm_l2() + (fine.b[m] - eb).norm_l2()
        worst = max(worst, diff)
        scale = max(scale, eu.norm_l2() + eb.norm_l2())
    return (worst / scale if scale > 0 else 0.0), base


def run_scaling(cfg: ScenarioConfig) -> Report:
    rep = Report.for_config(cfg)
    g = cfg.grid
    if cfg.lam < 2 or int(cfg.lam) != cfg.lam:
        raise ValueError(f"lambda must be an integer >= 2, got {cfg.lam}")
    u0, b0 = initial_data(cfg)
    eps = cfg.epsilons[0] if cfg.epsilons else 0.0
    u0, b0 = scaled_to(u0, b0, eps)
    disc, base = scaling_discrepancy(u0, b0, cfg.times, int(cfg.lam), cfg.tol, cfg.max_iter)
    rep.trajectories["base"] = (base, None)
    rep.add("scaling_discrepancy", disc, g.n, g.N, lam=int(cfg.lam), epsilon=eps)
    rep.check("scaling_discrepancy_below_1e-8", disc < 1e-8)
    return rep


# uniqueness -------------------------------------------------------------------

@dataclass
class MutualConvergence:
    """Picard versus semi-implicit discrepancies for a sequence of step counts."""

    steps: list
    du: list
    db: list
    state: list

    @staticmethod
    def _orders(d):
        return [math.log2(a / b) if a > 0 and b > 0 else float("nan") for a, b in zip(d, d[1:])]

    @property
    def du_orders(self):
        return self._orders(self.du)

    @property
    def db_orders(self):
        return self._orders(self.db)

    @property
    def state_orders(self):
        return self._orders(self.state)

    @staticmethod
    def extrapolate(d) -> float:
        """Richardson limit of the last three levels using their observed order."""
        if len(d) < 3:
            raise ValueError("extrapolation needs three levels")
        a, b, c = d[-3:]
        if b == c or a == b:
            return c
        p = math.log2((a - b) / (b - c)) if (a - b) / (b - c) > 0 else 1.0
        return c - (b - c) / (2**p - 1)


def mutual_convergence(u0, b0, T: float, steps, r: float = 2.0, tol: float = 1e-10, max_iter: int = 50,
                       return_trajectory: bool = False):
    """Discrepancies of ``du`` and ``delta b`` in ``L^r_t L^{n/2}_x`` plus the relative max-in-time state gap."""
    n = u0.grid.n
    out = MutualConvergence([], [], [], [])
    last = None
    for M in steps:
        times = TimeGrid(T, M)
        pic, _ = picard_solve(u0, b0, times, tol, max_iter)
        semi = integrate_semi_implicit(u0, b0, times)
        du = pic.u - semi.u
        db = pic.b - semi.b
        out.steps.append(M)
        out.du.append(time_lq(node_lp_norms(du, n / 2, _derivative), times.dt, r))
        out.db.append(time_lq(node_lp_norms(db, n / 2, _derivative), times.dt, r))
        gap = max(a.norm_l2() + b.norm_l2() for a, b in zip(du, db))
        scale = max(a.norm_l2() + b.norm_l2() for a, b in zip(pic.u, pic.b))
        out.state.append(gap / scale if scale > 0 else 0.0)
        last = pic
    if return_trajectory:
        return out, last
    return out


def run_uniqueness(cfg: ScenarioConfig) -> Report:
    rep = Report.for_config(cfg)
    g = cfg.grid
    u0, b0 = scaled_to(*initial_data(cfg), cfg.epsilons[0] if cfg.epsilons else 0.0)
    steps = [cfg.M, 2 * cfg.M, 4 * cfg.M]
    mc, traj = mutual_convergence(u0, b0, cfg.T, steps, cfg.r, cfg.tol, cfg.max_iter, return_trajectory=True)
    rep.trajectories["picard_finest"] = (traj, None)
    for i, M in enumerate(steps):
        rep.add("du_discrepancy", mc.du[i], g.n, g.N, g.n / 2, cfg.r, M=M)
        rep.add("delta_b_discrepancy", mc.db[i], g.n, g.N, g.n / 2, cfg.r, M=M)
        rep.add("state_discrepancy", mc.state[i], g.n, g.N, 2, None, M=M)
    for label, orders in (("du", mc.du_orders), ("delta_b", mc.db_orders)):
        for M, o in zip(steps, orders):
            rep.add(f"{label}_order", o, g.n, g.N, g.n / 2, cfg.r, M=M, M_next=2 * M)
        if all(d == 0 for d in getattr(mc, "du" if label == "du" else "db")):
            continue
        rep.check(f"{label}_order_at_least_one", min(orders) >= 1.0)
    for label, d in (("du", mc.du), ("delta_b", mc.db)):
        lim = MutualConvergence.extrapolate(d)
        rep.add(f"{label}_extrapolated", lim, g.n, g.N, g.n / 2, cfg.r)
        rep.check(f"{label}_extrapolated_below_1e-6", abs(lim) < 1e-6)
    return rep


# smallness sweep --------------------------------------------------------------

def run_smallness_sweep(cfg: ScenarioConfig) -> Report:
    """Largest horizon (by bisection on ``T``) at which Picard converges, per data size."""
    rep = Report.for_config(cfg)
    exps = cfg.exponents()
    g = cfg.grid
    base = initial_data(cfg)
    for eps in cfg.epsilons:
        u0, b0 = scaled_to(*base, eps)
        if eps > 0:
            rep.add("besov_lq_size", besov_norm(u0, -2 / exps.q, exps.p, exps.q) + besov_norm(b0, -2 / exps.q, exps.p, exps.q),
                    g.n, g.N, exps.p, exps.q, epsilon=eps)
        T = cfg.T
        achieved = 0.0
        for _ in range(cfg.bisections + 1):
            try:
                traj, pr = picard_solve(u0, b0, TimeGrid(T, cfg.M), cfg.tol, cfg.max_iter, exps)
            except PicardDivergenceError:
                T /= 2
                continue
            if pr.converged:
                achieved = T
                rep.trajectories[f"eps_{eps:.1e}"] = (traj, pr)
                rep.add("iterations", pr.iterations, g.n, g.N, exps.p, exps.q, epsilon=eps, T=T)
                break
            T /= 2
        rep.add("converged_horizon", achieved, g.n, g.N, exps.p, exps.q, epsilon=eps, T_requested=cfg.T)
        rep.check(f"converged_eps_{eps:.1e}", achieved > 0)
    return rep


# oracle -----------------------------------------------------------------------

def _rel(diff: np.ndarray, ref: np.ndarray) -> float:
    scale = np.abs(ref).max()
    d = np.abs(diff).max()
    if scale == 0:
        return float(d)
    return float(d / scale)


def oracle_rhs_discrepancy(u: FormField, b: FormField) -> float:
    """Relative mismatch between the forms right-hand sides and the vector-calculus ones."""
    g = u.grid
    nu, nb = nonlinear_terms(MhdState(0.0, u, b))
    ru, rB = vector_rhs(form_to_vector(u), form_to_vector(b), g)
    return max(_rel(form_to_vector(nu) - ru, ru), _rel(form_to_vector(nb) - rB, rB))


def run_oracle3d(cfg: ScenarioConfig) -> Report:
    rep = Report.for_config(cfg)
    g = cfg.grid
    if g.n != 3:
        raise ValueError(f"oracle3d needs n = 3, got n = {g.n}")
    worst = 0.0
    for s in _seeds(cfg.seed, cfg.samples):
        u0, b0 = scaled_to(*initial_data(cfg, s), 1.0)
        worst = max(worst, oracle_rhs_discrepancy(u0, b0))
    rep.add("rhs_discrepancy", worst, g.n, g.N, samples=cfg.samples)
    rep.check("rhs_discrepancy_below_1e-10", worst < 1e-10)

    tg = taylor_green_mhd(g, cfg.seed)[0]
    zero_b = FormField.zeros(g, 2).to_spectral()
    ref = advective_rhs(form_to_vector(tg), g)
    adv = _rel(form_to_vector(nonlinear_u(MhdState(0.0, tg, zero_b))) - ref, ref)
    rep.add("advection_discrepancy", adv, g.n, g.N)
    rep.check("advection_discrepancy_below_1e-10", adv < 1e-10)

    u0, b0 = scaled_to(*taylor_green_mhd(g, cfg.seed), 1.0)
    ref = pressure_gradient_oracle(form_to_vector(u0), form_to_vector(b0), g)
    pg = _rel(form_to_vector(pressure_gradient(MhdState(0.0, u0, b0))) - ref, ref)
    rep.add("pressure_discrepancy", pg, g.n, g.N)
    rep.check("pressure_discrepancy_below_1e-10", pg < 1e-10)

    u0, b0 = scaled_to(*initial_data(cfg), cfg.epsilons[0] if cfg.epsilons else 0.1)
    traj = integrate_semi_implicit(u0, b0, cfg.times)
    vu, vB = integrate_vector_semi_implicit(form_to_vector(u0), form_to_vector(b0), g, cfg.times)
    worst = 0.0
    for m in range(cfg.M + 1):
        st = traj.state(m)
        worst = max(worst, _rel(form_to_vector(st.u) - vu[m], vu[m]) if np.abs(vu[m]).max() > 0 else 0.0,
                    _rel(form_to_vector(st.b) - vB[m], vB[m]) if np.abs(vB[m]).max() > 0 else 0.0)
    rep.trajectories["semi_implicit"] = (traj, None)
    rep.add("trajectory_discrepancy", worst, g.n, g.N, T=cfg.T, M=cfg.M)
    rep.check("trajectory_discrepancy_below_1e-8", worst < 1e-8)
    return rep


# inequality lab ---------------------------------------------------------------

def _smooth_forcing(grid: GridSpec, times: TimeGrid, rng: np.random.Generator, seed: int) -> FieldSeries:
    """Mean-zero forcing ``sum_j c_j(t) F_j(x)`` with smooth random time profiles."""
    fields = [random_field(grid, 1, 2.0, s) for s in _seeds(seed, 3)]
    t = times.nodes / times.T
    freq = rng.uniform(0, 4 * np.pi, 3)
    phase = rng.uniform(0, 2 * np.pi, 3)
    extra = (1,) * fields[0].data.ndim
    data = sum(np.cos(freq[j] * t + phase[j]).reshape(-1, *extra) * fields[j].data[None] for j in range(3))
    return FieldSeries(grid, 1, times, data)


def leibniz_samples(grid: GridSpec, count: int, seed: int, decay: float = 3.0, exps=None) -> np.ndarray:
    n = grid.n
    exps = (2 * n, 2 * n, n) if exps is None else exps
    out = np.empty(count)
    for i, s in enumerate(_seeds(seed, count)):
        s1, s2 = _seeds(s, 2)
        out[i] = leibniz_ratio(random_field(grid, 1, decay, s1), random_field(grid, 2, decay, s2), exps)
    return out


def maxreg_samples(grid: GridSpec, times: TimeGrid, count: int, seed: int, q: float = 2, p: float = 2) -> np.ndarray:
    out = np.empty(count)
    for i, s in enumerate(_seeds(seed, count)):
        out[i] = maxreg_ratio(_smooth_forcing(grid, times, np.random.default_rng(s), s), q, p)
    return out


def run_inequality_lab(cfg: ScenarioConfig) -> Report:
    rep = Report.for_config(cfg)
    if cfg.samples == 0:
        return rep
    g = cfg.grid
    n = g.n
    exps = (2 * n, 2 * n, n)
    lb = leibniz_samples(g, 2 * cfg.samples, cfg.seed, exps=exps)
    small, large = lb[: cfg.samples].max(), lb.max()
    rep.add("leibniz_max", small, n, g.N, samples=cfg.samples, exponents=list(exps))
    rep.add("leibniz_max", large, n, g.N, samples=2 * cfg.samples, exponents=list(exps))
    rep.check("leibniz_finite", np.isfinite(lb).all())
    rep.check("leibniz_stable_under_doubling", abs(large / small - 1) <= 0.1)
    q = cfg.q if cfg.q is not None else 2.0
    p = cfg.p if cfg.p is not None else 2.0
    mr = maxreg_samples(g, cfg.times, cfg.samples, cfg.seed + 1, q, p)
    rep.add("maxreg_max", mr.max(), n, g.N, p, q, samples=cfg.samples)
    rep.check("maxreg_finite", np.isfinite(mr).all())
    if p == 2 and q == 2:
        rep.check("maxreg_l2_bound", mr.max() <= 1 + 1e-6)
    return rep


RUNNERS = {
    "contraction": run_contraction,
    "scaling": run_scaling,
    "uniqueness": run_uniqueness,
    "smallness_sweep": run_smallness_sweep,
    "oracle3d": run_oracle3d,
    "inequality_lab": run_inequality_lab,
}


def run_scenario(cfg: ScenarioConfig) -> Report:
    log.info("running %s (config %s)", cfg.scenario, cfg.hash[:12])
    return RUNNERS[cfg.scenario](cfg)
