"""Differential operators on form fields as exact Fourier multipliers.

Every operator here acts mode by mode on spectral fields, so identities such
as ``d d = 0`` or ``d delta + delta d = -Laplacian`` hold to rounding error.
Harmonic forms on the torus are the modes with zero derivative wavenumber
(the constants); they play the role of the trivial kernel of the Dirac
operator on R^n.
"""
from __future__ import annotations

from enum import Enum
from math import comb

import numpy as np

from .exterior import contract_table, wedge_table
from .fields import FormField, _require_spectral

CONSTRAINT_RTOL = 1e-10


class OperatorKind(str, Enum):
    LAPLACIAN = "laplacian"
    STOKES = "stokes"
    MAXWELL = "maxwell"


def _apply_table(f: FormField, table, ncomp: int) -> np.ndarray:
    """``out[o] = sum s k[i] f[j]`` over the table entries, one output blade at a time."""
    k = f.grid.tables.k
    out = np.zeros((ncomp,) + f.grid.spectral_shape, dtype=complex)
    for o in range(ncomp):
        terms = [(i, j, s) for i, j, oo, s in table if oo == o]
        if not terms:
            continue
        acc = f.data[terms[0][1]] * (terms[0][2] * k[terms[0][0]])
        for i, j, s in terms[1:]:
            acc += f.data[j] * (s * k[i])
        out[o] = acc
    return out


def _k_wedge(f: FormField) -> np.ndarray:
    """Per-mode ``k ^ f`` (no factor of i)."""
    g = f.grid
    return _apply_table(f, wedge_table(g.n, 1, f.grade), comb(g.n, f.grade + 1))


def _k_contract(f: FormField) -> np.ndarray:
    """Per-mode ``k _| f`` (no factor of i)."""
    g = f.grid
    return _apply_table(f, contract_table(g.n, 1, f.grade), comb(g.n, f.grade - 1))


def ext_deriv(f: FormField) -> FormField:
    """Exterior derivative ``d = grad ^``: per mode ``i k ^ f(k)``."""
    _require_spectral(f)
    if f.grade >= f.grid.n:
        raise ValueError(f"exterior derivative of a top-degree (grade {f.grade}) form is not defined here")
    return FormField._owned(f.grid, f.grade + 1, 1j * _k_wedge(f), spectral=True)


def codifferential(f: FormField) -> FormField:
    """Codifferential ``delta = -grad _|``: per mode ``-i k _| f(k)``."""
    _require_spectral(f)
    if f.grade == 0:
        raise ValueError("codifferential of a 0-form is not defined")
    return FormField._owned(f.grid, f.grade - 1, -1j * _k_contract(f), spectral=True)


def dirac(f: FormField) -> list[FormField]:
    """Homogeneous parts ``[delta f, d f]`` of ``(d + delta) f``; absent grades are skipped."""
    parts = []
    if f.grade > 0:
        parts.append(codifferential(f))
    if f.grade < f.grid.n:
        parts.append(ext_deriv(f))
    return parts


def laplacian(f: FormField) -> FormField:
    """Positive Hodge Laplacian ``-L = d delta + delta d``: multiplier ``|k|^2``."""
    _require_spectral(f)
    return f._wrap(f.data * f.grid.tables.ksq)


def _has_harmonic(f: FormField, rtol: float = 1e-12) -> bool:
    zero = f.grid.tables.zero_modes
    harm = np.abs(f.data[:, zero])
    scale = np.abs(f.data).max() if f.data.size else 0.0
    return bool(harm.size and harm.max() > rtol * max(scale, 1e-300))


def frac_power(f: FormField, theta: float) -> FormField:
    """``(-L)^theta``: multiplier ``|k|^(2 theta)``, zero on harmonic modes.

    Negative powers require a field without harmonic (mean) component.
    """
    _require_spectral(f)
    t = f.grid.tables
    if theta < 0 and _has_harmonic(f):
        raise ValueError("harmonic component: negative fractional power needs a mean-zero field")
    mult = np.zeros_like(t.ksq)
    nz = ~t.zero_modes
    mult[nz] = t.ksq[nz] ** theta
    return f._wrap(f.data * mult)


def _inv_ksq(f: FormField) -> np.ndarray:
    t = f.grid.tables
    inv = np.zeros_like(t.ksq)
    nz = ~t.zero_modes
    inv[nz] = 1.0 / t.ksq[nz]
    return inv


def exact_part(f: FormField) -> FormField:
    """Projection onto the range of ``d``: per mode ``k ^ (k _| f) / |k|^2``."""
    _require_spectral(f)
    if f.grade == 0:
        return f._wrap(np.zeros_like(f.data))
    c = FormField._owned(f.grid, f.grade - 1, _k_contract(f), spectral=True)
    return f._wrap(_k_wedge(c) * _inv_ksq(f))


def coexact_part(f: FormField) -> FormField:
    """Projection onto the range of ``delta``: per mode ``k _| (k ^ f) / |k|^2``."""
    _require_spectral(f)
    if f.grade == f.grid.n:
        return f._wrap(np.zeros_like(f.data))
    w = FormField._owned(f.grid, f.grade + 1, _k_wedge(f), spectral=True)
    return f._wrap(_k_contract(w) * _inv_ksq(f))


def harmonic_part(f: FormField) -> FormField:
    _require_spectral(f)
    return f._wrap(f.data * f.grid.tables.zero_modes)


def hodge_decompose(f: FormField) -> tuple[FormField, FormField, FormField]:
    """Orthogonal split ``f = exact + coexact + harmonic``."""
    return exact_part(f), coexact_part(f), harmonic_part(f)


def leray_project(f: FormField) -> FormField:
    """Helmholtz-Leray projection of a 1-form onto the kernel of ``delta``."""
    _require_spectral(f)
    if f.grade != 1:
        raise ValueError(f"Leray projection acts on 1-forms, got grade {f.grade}")
    return f - exact_part(f)


def _relative_defect(defect: FormField, f: FormField) -> float:
    scale = frac_power(f, 0.5).norm_l2()
    num = defect.norm_l2()
    if scale == 0.0:
        return 0.0 if num == 0.0 else np.inf
    return num / scale


def constraint_defect(f: FormField, kind: OperatorKind) -> float:
    """Relative size of ``delta f`` (Stokes) or ``d f`` (Maxwell) against ``|| |k| f ||``."""
    kind = OperatorKind(kind)
    if kind is OperatorKind.STOKES:
        if f.grade != 1:
            raise ValueError(f"Stokes operator acts on 1-forms, got grade {f.grade}")
        return _relative_defect(codifferential(f), f)
    if kind is OperatorKind.MAXWELL:
        if f.grade != 2:
            raise ValueError(f"Maxwell operator acts on 2-forms, got grade {f.grade}")
        if f.grade == f.grid.n:
            return 0.0
        return _relative_defect(ext_deriv(f), f)
    return 0.0


def check_constraint(f: FormField, kind: OperatorKind, rtol: float = CONSTRAINT_RTOL) -> None:
    defect = constraint_defect(f, kind)
    if defect > rtol:
        raise ValueError(f"{OperatorKind(kind).value} constraint violated: relative defect {defect:.3e} > {rtol:.1e}")


def heat_multiplier(grid, t: float) -> np.ndarray:
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    return np.exp(-t * grid.tables.ksq)


def heat_semigroup(f: FormField, t: float, kind: OperatorKind = OperatorKind.LAPLACIAN) -> FormField:
    """``exp(-t A) f`` for ``A`` the Laplacian, Stokes or Maxwell operator.

    All three share the multiplier ``exp(-t |k|^2)``; Stokes and Maxwell check
    that ``f`` lies in their constraint subspace first.
    """
    _require_spectral(f)
    mult = heat_multiplier(f.grid, t)
    check_constraint(f, kind)
    return f._wrap(f.data * mult)
