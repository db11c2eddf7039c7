"""Pseudo-spectral differential-form calculus and mild solutions of incompressible MHD on the torus."""
from .duhamel import duhamel, phi1, phi2
from .estimator import HodgeProjector, MildMHDSolver
from .experiments import Report, ScenarioConfig, run_scenario
from .exterior import Multivector
from .fields import FormField, GridSpec, dealias, lp_norm, pointwise_contract, pointwise_wedge, random_field
from .hodge import (
    OperatorKind,
    codifferential,
    coexact_part,
    exact_part,
    ext_deriv,
    frac_power,
    harmonic_part,
    heat_semigroup,
    hodge_decompose,
    laplacian,
    leray_project,
)
from .norms import CriticalExponents, besov_norm, bt_norm, leibniz_ratio, lq_lp_norm, maxreg_ratio, ut_norm
from .series import FieldSeries, TimeGrid
from .solver import (
    MhdState,
    PicardDivergenceError,
    PicardReport,
    Trajectory,
    integrate_semi_implicit,
    nonlinear_b,
    nonlinear_u,
    picard_solve,
    pressure_gradient,
    step_semi_implicit,
)

__version__ = "0.1.0"
