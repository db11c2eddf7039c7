"""Critical-space norms and empirical inequality constants.

Time integrals over a trajectory use the trapezoidal rule on its nodes.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.fft
import scipy.integrate
import scipy.special

from .duhamel import duhamel
from .fields import FormField, _lp_of_pointwise, lp_norm, pointwise_contract
from .hodge import OperatorKind, codifferential, dirac, ext_deriv, heat_multiplier
from .series import FieldSeries

BESOV_POINTS_PER_DECADE = 64
BESOV_SHORT_TIME_NODES = 16


@dataclass(frozen=True)
class CriticalExponents:
    """Space-time exponents ``(p, q)`` on the scaling line ``n/p + 2/q = 1``."""

    n: int
    p: float
    q: float

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError(f"exponents must be >= 1, got p={self.p}, q={self.q}")
        if abs(self.n / self.p + 2 / self.q - 1) > 1e-12:
            raise ValueError(f"(n, p, q)=({self.n}, {self.p}, {self.q}) violates n/p + 2/q = 1")

    @classmethod
    def from_p(cls, n: int, p: float) -> CriticalExponents:
        if not p > n:
            raise ValueError(f"need p > n for a finite q, got p={p}, n={n}")
        return cls(n, float(p), 2.0 / (1.0 - n / p))

    @classmethod
    def lqlp_default(cls, n: int) -> CriticalExponents:
        """``p = 2n, q = 4``: the simplest point with ``p > n`` and ``q > 3``."""
        return cls.from_p(n, 2 * n)

    @classmethod
    def ctlp_default(cls, n: int) -> CriticalExponents:
        """``p = 3n/2`` so that ``alpha = 1/3``."""
        return cls.from_p(n, 1.5 * n)

    @property
    def alpha(self) -> float:
        return 1.0 - self.n / self.p

    def check_lqlp(self) -> None:
        if not (self.p > self.n and self.q > 3):
            raise ValueError(f"L^q L^p theory needs p > n and q > 3, got p={self.p}, q={self.q}")

    def check_ctlp(self) -> None:
        if not self.n < self.p < 2 * self.n:
            raise ValueError(f"weighted sup-norm theory needs n < p < 2n, got p={self.p}")


@dataclass
class NormReport:
    name: str
    value: float
    exponents: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.value = float(self.value)
        if not np.isfinite(self.value) or self.value < 0:
            raise ValueError(f"norm value must be finite and nonnegative, got {self.value}")

    def as_dict(self) -> dict:
        return asdict(self)


def _derivative(f: FormField) -> FormField:
    """``d`` on 1-forms and ``delta`` on 2-forms: the derivative entering the critical norms."""
    if f.grade == 1:
        return ext_deriv(f)
    if f.grade == 2:
        return codifferential(f)
    raise ValueError(f"critical norms are defined for 1-forms and 2-forms, got grade {f.grade}")


def node_lp_norms(series: FieldSeries, p: float, op=None) -> np.ndarray:
    """``||op(f(t_m))||_{L^p}`` for every node ``m``."""
    g = series.grid
    out = np.empty(len(series))
    for m in range(len(series)):
        f = series[m]
        if op is not None:
            f = op(f)
        x = scipy.fft.irfftn(f.data, s=g.shape, axes=g.axes, norm="forward")
        out[m] = _lp_of_pointwise(np.sqrt(np.sum(x * x, axis=0)), p, g.cell_volume)
    return out


def time_lq(values: np.ndarray, dt: float, q: float) -> float:
    """Trapezoidal ``(int |v|^q dt)^(1/q)``; ``q = inf`` gives the max."""
    v = np.abs(np.asarray(values, dtype=float))
    if v.size == 0:
        raise ValueError("empty trajectory")
    if np.isinf(q):
        return float(v.max())
    if v.size == 1:
        return 0.0
    w = np.full(v.size, dt)
    w[0] = w[-1] = dt / 2
    peak = v.max()
    if peak == 0:
        return 0.0
    return float(peak * np.sum(w * (v / peak) ** q) ** (1.0 / q))


def lq_lp_norm(series: FieldSeries, q: float, p: float) -> float:
    """``||f||_{L^q_t L^p_x}`` over the series' time interval."""
    if q < 1 or p < 1:
        raise ValueError(f"exponents must be >= 1, got q={q}, p={p}")
    if len(series) == 0:
        raise ValueError("empty trajectory")
    return time_lq(node_lp_norms(series, p), series.times.dt, q)


def lqlp_pair(series: FieldSeries, exps: CriticalExponents) -> tuple[float, float]:
    """``(||f||_{L^q L^p}, ||D f||_{L^{q/2} L^{p/2}})`` with ``D = d`` (grade 1) or ``delta`` (grade 2)."""
    dt = series.times.dt
    a = time_lq(node_lp_norms(series, exps.p), dt, exps.q)
    b = time_lq(node_lp_norms(series, exps.p / 2, _derivative), dt, exps.q / 2)
    return a, b


def lqlp_space_norm(series: FieldSeries, exps: CriticalExponents) -> float:
    """Norm of the L^q_t L^p_x working space: ``||f||_{L^q L^p} + ||D f||_{L^{q/2} L^{p/2}}``."""
    return sum(lqlp_pair(series, exps))


def product_norm(u: FieldSeries, b: FieldSeries, exps: CriticalExponents) -> float:
    """Norm on the product of the velocity and magnetic working spaces."""
    return lqlp_space_norm(u, exps) + lqlp_space_norm(b, exps)


def _weighted_sup(series: FieldSeries, exps: CriticalExponents) -> float:
    t = series.times.nodes[1:]
    a = exps.alpha
    f = node_lp_norms(series, exps.p)[1:]
    df = node_lp_norms(series, exps.p, _derivative)[1:]
    return float(np.max(t ** (a / 2) * f + t ** ((1 + a) / 2) * df))


def ut_norm(u: FieldSeries, exps: CriticalExponents) -> float:
    """``sup_t t^(alpha/2) ||u||_p + t^((1+alpha)/2) ||du||_p`` over nodes with ``t > 0``."""
    if u.grade != 1:
        raise ValueError(f"velocity norm needs a 1-form series, got grade {u.grade}")
    return _weighted_sup(u, exps)


def bt_norm(b: FieldSeries, exps: CriticalExponents) -> float:
    """``sup_t t^(alpha/2) ||b||_p + t^((1+alpha)/2) ||delta b||_p`` over nodes with ``t > 0``."""
    if b.grade != 2:
        raise ValueError(f"magnetic norm needs a 2-form series, got grade {b.grade}")
    return _weighted_sup(b, exps)


def _heat_lp(f0: FormField, t: float, p: float) -> float:
    return lp_norm(f0._wrap(f0.data * heat_multiplier(f0.grid, t)).to_physical(), p)


def besov_norm(
    f0: FormField,
    s: float,
    p: float,
    q: float,
    points_per_decade: int = BESOV_POINTS_PER_DECADE,
    tmin: float | None = None,
    tmax: float | None = None,
) -> float:
    """Homogeneous Besov norm of negative order ``s`` via the heat flow.

    Evaluates ``(int_0^inf (t^(-s/2) ||e^{t Delta} f0||_p)^q dt/t)^(1/q)``.
    The range ``[tmin, tmax]`` is integrated by Simpson's rule on a log-spaced
    grid. The short-time piece ``[0, tmin]``, with ``tmin = (L / (pi N))^2`` by
    default, uses Gauss-Jacobi nodes that absorb the ``t^(-s q/2 - 1)`` weight
    exactly. Above ``tmax = 50 / lambda_min`` the integrand is negligible.
    """
    if not s < 0:
        raise ValueError(f"heat characterization needs s < 0, got {s}")
    f0 = f0.spectral_rep()
    g = f0.grid
    t = g.tables
    if np.abs(f0.data[:, t.zero_modes]).max(initial=0.0) > 1e-12 * max(np.abs(f0.data).max(), 1e-300):
        raise ValueError("besov_norm needs a mean-zero field")
    mag = np.abs(f0.data).max(axis=0)
    active = (mag > 1e-12 * mag.max()) & ~t.zero_modes
    if not active.any():
        return 0.0
    lam_min = float(t.ksq[active].min())
    if tmin is None:
        tmin = (g.L / (np.pi * g.N)) ** 2
    if tmax is None:
        tmax = 50.0 / lam_min
    a = -s * q / 2.0
    decades = np.log10(tmax / tmin)
    npts = max(int(np.ceil(decades * points_per_decade)) + 1, 3)
    ts = np.geomspace(tmin, tmax, npts)
    integrand = ts**a * np.array([_heat_lp(f0, ti, p) for ti in ts]) ** q
    body = scipy.integrate.simpson(integrand, x=np.log(ts))
    x, w = scipy.special.roots_jacobi(BESOV_SHORT_TIME_NODES, 0.0, a - 1.0)
    short = np.array([_heat_lp(f0, ti, p) for ti in tmin * (1 + x) / 2]) ** q
    head = (tmin / 2) ** a * np.sum(w * short)
    return float((body + head) ** (1.0 / q))


def _pointwise_dirac_norm(f: FormField) -> np.ndarray:
    sq = 0.0
    for part in dirac(f.spectral_rep()):
        sq = sq + part.to_physical().pointwise_norm() ** 2
    return np.sqrt(sq)


def _check_holder_triple(a: float, b: float, c: float) -> None:
    if abs(1 / a + 1 / b - 1 / c) > 1e-12:
        raise ValueError(f"exponents violate 1/{a} + 1/{b} = 1/{c}")


def leibniz_ratio(w1: FormField, w2: FormField, exps) -> float:
    """``||d(w1 _| w2)||_gamma / (||D w1||_alpha ||w2||_beta + ||w1||_alpha' ||D w2||_beta')``.

    ``exps`` is ``(alpha, beta, alpha', beta', gamma)`` or the shorthand
    ``(alpha, beta, gamma)`` with primed exponents equal to unprimed ones.
    ``D = d + delta`` is the Dirac operator.
    """
    if len(exps) == 3:
        al, be, ga = exps
        alp, bep = al, be
    else:
        al, be, alp, bep, ga = exps
    _check_holder_triple(al, be, ga)
    _check_holder_triple(alp, bep, ga)
    if w1.grade != 1 or w2.grade != 2:
        raise ValueError("leibniz_ratio expects a 1-form and a 2-form")
    g = w1.grid
    p1 = w1.physical_rep()
    p2 = w2.physical_rep()
    num = lp_norm(ext_deriv(pointwise_contract(p1, p2).to_spectral()).to_physical(), ga)
    d1 = _lp_of_pointwise(_pointwise_dirac_norm(w1), al, g.cell_volume)
    d2 = _lp_of_pointwise(_pointwise_dirac_norm(w2), bep, g.cell_volume)
    den = d1 * lp_norm(p2, be) + lp_norm(p1, alp) * d2
    if den == 0.0:
        if num == 0.0:
            return 0.0
        return float("inf")
    return num / den


def maxreg_ratio(f: FieldSeries, q: float, p: float) -> float:
    """``||L R f||_{L^q L^p} / ||f||_{L^q L^p}`` with ``R f`` the heat Duhamel integral."""
    t = f.grid.tables
    if np.abs(f.data[:, :, t.zero_modes]).max(initial=0.0) > 1e-12 * max(np.abs(f.data).max(), 1e-300):
        raise ValueError("maxreg_ratio needs mean-zero forcing")
    den = lq_lp_norm(f, q, p)
    if den == 0.0:
        raise ValueError("maxreg_ratio of a zero forcing is undefined")
    rf = duhamel(OperatorKind.LAPLACIAN, f)
    lrf = rf.with_data(rf.data * t.ksq)
    return lq_lp_norm(lrf, q, p) / den

