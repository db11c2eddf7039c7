"""Initial-data families for experiments and tests."""
from __future__ import annotations

import numpy as np

from .fields import FormField, GridSpec, lp_norm, random_field
from .hodge import exact_part, ext_deriv, harmonic_part, leray_project


def random_solenoidal(grid: GridSpec, seed=None, decay: float = 3.0, kmax=None) -> FormField:
    """Mean-zero divergence-free random 1-form (spectral)."""
    f = leray_project(random_field(grid, 1, decay, seed, kmax))
    return f - harmonic_part(f)


def random_exact(grid: GridSpec, seed=None, decay: float = 3.0, kmax=None) -> FormField:
    """Random exact 2-form ``d a`` for a random 1-form ``a`` (spectral)."""
    return exact_part(ext_deriv(random_field(grid, 1, decay, seed, kmax)))


def taylor_green(grid: GridSpec, amplitude: float = 1.0) -> FormField:
    """Taylor-Green velocity ``(sin x cos y cos z, -cos x sin y cos z, 0, ...)`` as a 1-form."""
    if grid.n < 3:
        raise ValueError("Taylor-Green data needs n >= 3")
    x = [grid.k0 * c for c in grid.coordinates()]
    comps = {
        (1,): amplitude * np.sin(x[0]) * np.cos(x[1]) * np.cos(x[2]),
        (2,): -amplitude * np.cos(x[0]) * np.sin(x[1]) * np.cos(x[2]),
    }
    return FormField.from_components(grid, 1, comps).to_spectral()


def low_mode_exact(grid: GridSpec, amplitude: float = 1.0) -> FormField:
    """Exact 2-form ``d a`` with ``a`` built from ``|k_j| <= 1`` modes."""
    x = [grid.k0 * c for c in grid.coordinates()]
    comps = {
        (1,): np.cos(x[1]) + 0.5 * np.sin(x[2]),
        (2,): np.sin(x[2]) + 0.3 * np.cos(x[0]),
        (3,): np.cos(x[0] + x[1]),
    }
    a = FormField.from_components(grid, 1, comps).to_spectral()
    b = exact_part(ext_deriv(a))
    scale = np.abs(b.to_physical().data).max()
    return b * (amplitude / scale)


def ln_size(u: FormField, b: FormField) -> float:
    """``||u||_{L^n} + ||b||_{L^n}``, the smallness quantity of the continuous-in-time theory."""
    n = u.grid.n
    return lp_norm(u.physical_rep(), n) + lp_norm(b.physical_rep(), n)


def scaled_to(u: FormField, b: FormField, eps: float) -> tuple[FormField, FormField]:
    """Rescale ``(u, b)`` jointly so that ``||u||_n + ||b||_n = eps``."""
    size = ln_size(u, b)
    if size == 0:
        return u, b
    return u * (eps / size), b * (eps / size)


def taylor_green_mhd(grid: GridSpec, seed=None, b_amplitude: float = 0.5, kmax: int = 2) -> tuple[FormField, FormField]:
    """Taylor-Green velocity paired with ``b = d a`` for a small band-limited random 1-form ``a``."""
    u = taylor_green(grid)
    b = random_exact(grid, seed, kmax=kmax)
    peak = np.abs(b.to_physical().data).max()
    return u, b * (b_amplitude / peak) if peak > 0 else b
