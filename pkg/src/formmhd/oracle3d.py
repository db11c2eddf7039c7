"""Classical vector-calculus MHD right-hand sides in three dimensions.

Independent of the exterior-algebra tables: uses explicit cross products,
curl and divergence on 3-vector arrays of shape ``(3, N, N, N)``. A 2-form
``b`` corresponds to the vector ``B = *b = (b23, b31, b12)``.
"""
from __future__ import annotations

import numpy as np
import scipy.fft

from .fields import FormField, GridSpec


def _check(grid: GridSpec) -> None:
    if grid.n != 3:
        raise ValueError(f"vector oracle needs n = 3, got n = {grid.n}")


def form_to_vector(f: FormField) -> np.ndarray:
    """Physical 3-vector of a 1-form, or of a 2-form through the Hodge star."""
    _check(f.grid)
    x = f.physical_rep().data
    if f.grade == 1:
        return x.copy()
    if f.grade == 2:
        # blade order e12, e13, e23
        return np.stack([x[2], -x[1], x[0]])
    raise ValueError(f"only 1-forms and 2-forms map to vectors, got grade {f.grade}")


def vector_to_form(v: np.ndarray, grid: GridSpec, grade: int) -> FormField:
    _check(grid)
    v = np.asarray(v, dtype=float)
    if grade == 1:
        return FormField(grid, 1, v)
    if grade == 2:
        return FormField(grid, 2, np.stack([v[2], -v[1], v[0]]))
    raise ValueError(f"only 1-forms and 2-forms map to vectors, got grade {grade}")


class VectorCalculus:
    """Spectral grad/div/curl with the same wavenumber and dealiasing conventions as the form code."""

    def __init__(self, grid: GridSpec):
        _check(grid)
        self.grid = grid
        t = grid.tables
        self.k = [np.broadcast_to(kj, grid.spectral_shape) for kj in t.k]
        self.ksq = t.ksq
        self.inv_ksq = np.where(t.zero_modes, 0.0, 1.0 / np.where(t.zero_modes, 1.0, t.ksq))
        self.mask = t.dealias_mask

    def fft(self, x):
        return scipy.fft.rfftn(x, axes=(-3, -2, -1), norm="forward")

    def ifft(self, x):
        return scipy.fft.irfftn(x, s=self.grid.shape, axes=(-3, -2, -1), norm="forward")

    def curl_hat(self, vh):
        k = self.k
        return 1j * np.stack([
            k[1] * vh[2] - k[2] * vh[1],
            k[2] * vh[0] - k[0] * vh[2],
            k[0] * vh[1] - k[1] * vh[0],
        ])

    def div_hat(self, vh):
        return 1j * sum(self.k[j] * vh[j] for j in range(3))

    def grad_hat(self, sh):
        return 1j * np.stack([kj * sh for kj in self.k])

    def leray_hat(self, vh):
        kdotv = sum(self.k[j] * vh[j] for j in range(3))
        return vh - np.stack([kj * kdotv for kj in self.k]) * self.inv_ksq

    def curl(self, v):
        return self.ifft(self.curl_hat(self.fft(v)))

    def grad_tensor(self, v):
        """``(dv_i / dx_j)`` as an array of shape ``(3, 3, N, N, N)``."""
        vh = self.fft(v)
        return np.stack([self.ifft(self.grad_hat(vh[i])) for i in range(3)])

    def dealiased(self, v):
        return self.ifft(self.fft(v) * self.mask)


def cross(a, b):
    return np.stack([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])


def vector_rhs(u: np.ndarray, B: np.ndarray, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """``(P[u x curl u + (curl B) x B], curl(u x B))`` with 2/3 dealiasing of each product."""
    vc = VectorCalculus(grid)
    cu = vc.curl(u)
    cB = vc.curl(B)
    lorentz = cross(u, cu) + cross(cB, B)
    ru = vc.ifft(vc.leray_hat(vc.fft(lorentz) * vc.mask))
    rB = vc.ifft(vc.curl_hat(vc.fft(cross(u, B)) * vc.mask))
    return ru, rB


def advective_rhs(u: np.ndarray, grid: GridSpec) -> np.ndarray:
    """``P[-(u . grad) u]`` for a velocity alone."""
    vc = VectorCalculus(grid)
    g = vc.grad_tensor(u)
    adv = np.einsum("jxyz,ijxyz->ixyz", u, g)
    return vc.ifft(vc.leray_hat(-vc.fft(adv) * vc.mask))


def pressure_gradient_oracle(u: np.ndarray, B: np.ndarray, grid: GridSpec) -> np.ndarray:
    """``grad pi`` from the Poisson problem ``Lap pi = -div F`` with ``F = -u x curl u - (curl B) x B``."""
    vc = VectorCalculus(grid)
    F = -cross(u, vc.curl(u)) - cross(vc.curl(B), B)
    Fh = vc.fft(F) * vc.mask
    # -|k|^2 pi = -div F
    pi_hat = vc.div_hat(Fh) * vc.inv_ksq
    return vc.ifft(vc.grad_hat(pi_hat))


def integrate_vector_semi_implicit(u0: np.ndarray, B0: np.ndarray, grid: GridSpec, times):
    """Integrating-factor Euler on the vector form of the equations; returns per-node ``(u, B)`` lists."""
    vc = VectorCalculus(grid)
    decay = np.exp(-times.dt * vc.ksq)
    uh, Bh = vc.fft(u0), vc.fft(B0)
    us, Bs = [vc.ifft(uh)], [vc.ifft(Bh)]
    for _ in range(times.M):
        ru, rB = vector_rhs(vc.ifft(uh), vc.ifft(Bh), grid)
        uh = vc.leray_hat(decay * (uh + times.dt * vc.fft(ru)))
        Bh = vc.leray_hat(decay * (Bh + times.dt * vc.fft(rB)))
        uh[:, vc.grid.tables.zero_modes] = 0
        Bh[:, vc.grid.tables.zero_modes] = 0
        us.append(vc.ifft(uh))
        Bs.append(vc.ifft(Bh))
    return us, Bs
