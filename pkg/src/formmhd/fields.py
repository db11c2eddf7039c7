"""Form-valued fields on the periodic torus ``[0, L)^n``.

Spectral coefficients are stored on the real-FFT half spectrum (last axis
``0..N/2``) with forward normalization, so a constant field ``c`` has
``k = 0`` coefficient ``c`` and ``sin(x1)`` has coefficients ``-i/2`` and
``+i/2`` at ``k = +-e1``. Conjugate symmetry of the full spectrum is implied
by the storage.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache
from math import comb, pi

import numpy as np
import scipy.fft

from .exterior import contract_table, grade_blades, wedge_table

SNAPSHOT_MAGIC = b"HMHD"
SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid with ``N`` points per axis on the torus of period ``L``."""

    n: int
    N: int
    L: float = 2 * pi

    def __post_init__(self):
        if not 2 <= self.n <= 6:
            raise ValueError(f"dimension n must be in [2, 6], got {self.n}")
        if self.N < 4 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two >= 4, got {self.N}")
        if not self.L > 0:
            raise ValueError(f"period L must be positive, got {self.L}")
        object.__setattr__(self, "L", float(self.L))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def spectral_shape(self) -> tuple[int, ...]:
        return (self.N,) * (self.n - 1) + (self.N // 2 + 1,)

    @property
    def axes(self) -> tuple[int, ...]:
        return tuple(range(-self.n, 0))

    @property
    def cell_volume(self) -> float:
        return (self.L / self.N) ** self.n

    @property
    def volume(self) -> float:
        return self.L**self.n

    @property
    def k0(self) -> float:
        """Fundamental wavenumber ``2 pi / L``."""
        return 2 * pi / self.L

    def coordinates(self) -> list[np.ndarray]:
        """Broadcastable coordinate arrays ``x_1 .. x_n``."""
        x = np.arange(self.N) * (self.L / self.N)
        return [x.reshape(_axis_shape(self.n, j, self.N)) for j in range(self.n)]

    @property
    def tables(self) -> SpectralTables:
        return _tables(self.n, self.N, self.L)


def _axis_shape(n: int, j: int, size: int) -> tuple[int, ...]:
    s = [1] * n
    s[j] = size
    return tuple(s)


class SpectralTables:
    """Wavenumber arrays for a grid, shared by every field on it.

    ``k`` is the derivative wavenumber: integer index times ``2 pi / L`` with
    the Nyquist index mapped to 0, so odd multipliers keep real fields real.
    ``index`` holds the signed integer mode indices (Nyquist as ``+-N/2``).
    """

    def __init__(self, n: int, N: int, L: float):
        k0 = 2 * pi / L
        full = np.fft.fftfreq(N, 1.0 / N)
        half = np.fft.rfftfreq(N, 1.0 / N)
        self.index = []
        self.k = []
        for j in range(n):
            idx = half if j == n - 1 else full
            size = idx.size
            shp = _axis_shape(n, j, size)
            signed = idx.copy()
            if j == n - 1:
                signed[-1] = N // 2
            self.index.append(signed.reshape(shp))
            kd = idx.copy()
            kd[np.abs(kd) == N // 2] = 0.0
            self.k.append((k0 * kd).reshape(shp))
        spec_shape = (N,) * (n - 1) + (N // 2 + 1,)
        ksq = np.zeros(spec_shape)
        for kj in self.k:
            ksq = ksq + kj**2
        self.ksq = ksq
        self.kmag = np.sqrt(ksq)
        self.zero_modes = ksq == 0.0
        # 2/3 rule on the true (signed) wavenumbers: keep |k_j| <= (2/3) * (pi N / L)
        cutoff = (2.0 / 3.0) * (N / 2)
        keep = np.ones(spec_shape, dtype=bool)
        for idx in self.index:
            keep = keep & (np.abs(idx) <= cutoff)
        self.dealias_mask = keep
        # Hermitian multiplicity of each stored mode in the full spectrum
        w = np.full(N // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        self.weights = np.broadcast_to(w.reshape(_axis_shape(n, n - 1, N // 2 + 1)), spec_shape)
        # the same weights interleaved for a float view of complex data
        self.float_weights = np.repeat(w, 2).reshape(_axis_shape(n, n - 1, N + 2))


@lru_cache(maxsize=16)
def _tables(n: int, N: int, L: float) -> SpectralTables:
    return SpectralTables(n, N, L)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FormField:
    """Grade-``grade`` form field; ``data`` has one leading axis over blades.

    Physical data is real with shape ``(C(n, grade),) + grid.shape``; spectral
    data is complex with shape ``(C(n, grade),) + grid.spectral_shape``.
    """

    grid: GridSpec
    grade: int
    data: np.ndarray
    spectral: bool = False

    def __post_init__(self):
        g = self.grid
        if not 0 <= self.grade <= g.n:
            raise ValueError(f"grade {self.grade} outside 0..{g.n}")
        ncomp = comb(g.n, self.grade)
        expected = (ncomp,) + (g.spectral_shape if self.spectral else g.shape)
        data = np.asarray(self.data, dtype=complex if self.spectral else float)
        if data.shape != expected:
            raise ValueError(f"data shape {data.shape} does not match {expected}")
        if data is self.data and data.flags.writeable:
            data = data.copy()
        object.__setattr__(self, "data", _readonly(data))

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, grid: GridSpec, grade: int, spectral: bool = False) -> FormField:
        shape = (comb(grid.n, grade),) + (grid.spectral_shape if spectral else grid.shape)
        return cls(grid, grade, np.zeros(shape, dtype=complex if spectral else float), spectral)

    @classmethod
    def from_components(cls, grid: GridSpec, grade: int, components: dict) -> FormField:
        """Physical field from ``{blade_index_tuple: array_or_scalar}``; missing blades are zero."""
        blades = grade_blades(grid.n, grade)
        pos = {m: i for i, m in enumerate(blades)}
        data = np.zeros((len(blades),) + grid.shape)
        for idx, values in components.items():
            idx = tuple(idx)
            mask = 0
            for j in idx:
                mask |= 1 << (j - 1)
            if len(idx) != grade or mask not in pos or len(set(idx)) != grade:
                raise ValueError(f"{idx} is not a grade-{grade} blade in n={grid.n}")
            sign = 1
            for a in range(len(idx)):
                for b in range(a + 1, len(idx)):
                    if idx[a] > idx[b]:
                        sign = -sign
            data[pos[mask]] += sign * np.broadcast_to(values, grid.shape)
        return cls(grid, grade, data)

    @property
    def ncomp(self) -> int:
        return self.data.shape[0]

    @property
    def blades(self) -> tuple[int, ...]:
        return grade_blades(self.grid.n, self.grade)

    # representation -----------------------------------------------------
    def to_spectral(self) -> FormField:
        if self.spectral:
            raise ValueError("field is already in spectral representation")
        g = self.grid
        hat = scipy.fft.rfftn(self.data, axes=g.axes, norm="forward")
        return FormField._owned(g, self.grade, hat, spectral=True)

    def to_physical(self) -> FormField:
        if not self.spectral:
            raise ValueError("field is already in physical representation")
        g = self.grid
        x = scipy.fft.irfftn(self.data, s=g.shape, axes=g.axes, norm="forward")
        return FormField._owned(g, self.grade, x, spectral=False)

    def spectral_rep(self) -> FormField:
        return self if self.spectral else self.to_spectral()

    def physical_rep(self) -> FormField:
        return self.to_physical() if self.spectral else self

    def with_data(self, data: np.ndarray) -> FormField:
        return FormField(self.grid, self.grade, data, self.spectral)

    @classmethod
    def _owned(cls, grid: GridSpec, grade: int, data: np.ndarray, spectral: bool = False) -> FormField:
        # freshly allocated buffers are frozen in place instead of copied
        return cls(grid, grade, _readonly(data), spectral)

    def _wrap(self, data: np.ndarray) -> FormField:
        return FormField._owned(self.grid, self.grade, data, self.spectral)

    # arithmetic ---------------------------------------------------------
    def _compatible(self, other: FormField) -> None:
        if not isinstance(other, FormField):
            raise TypeError(f"expected FormField, got {type(other).__name__}")
        if other.grid != self.grid:
            raise ValueError(f"grid mismatch: {self.grid} vs {other.grid}")
        if other.grade != self.grade:
            raise ValueError(f"grade mismatch: {self.grade} vs {other.grade}")
        if other.spectral != self.spectral:
            raise ValueError("representation mismatch (physical vs spectral)")

    def __add__(self, other: FormField) -> FormField:
        self._compatible(other)
        return self._wrap(self.data + other.data)

    def __sub__(self, other: FormField) -> FormField:
        self._compatible(other)
        return self._wrap(self.data - other.data)

    def __neg__(self) -> FormField:
        return self._wrap(-self.data)

    def __mul__(self, scalar) -> FormField:
        if not np.isscalar(scalar):
            return NotImplemented
        return self._wrap(self.data * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> FormField:
        return self._wrap(self.data / scalar)

    def mean(self) -> np.ndarray:
        """Spatial mean of each component (the ``k = 0`` coefficients)."""
        if self.spectral:
            return self.data[(slice(None),) + (0,) * self.grid.n].real.copy()
        return self.data.mean(axis=self.grid.axes)

    def pointwise_norm(self) -> np.ndarray:
        """Euclidean norm over the blade basis at every grid point."""
        if self.spectral:
            raise ValueError("pointwise norm requires physical representation")
        return np.sqrt(np.sum(self.data**2, axis=0))

    def inner_l2(self, other: FormField) -> float:
        """``L^2`` inner product, evaluated in whichever representation both share."""
        self._compatible(other)
        g = self.grid
        if self.spectral:
            # Re(a conj b) = a.re b.re + a.im b.im, so a real dot product of the float views suffices
            a = np.ascontiguousarray(self.data).view(float)
            b = np.ascontiguousarray(other.data).view(float)
            return float(g.volume * np.vdot(b, a * g.tables.float_weights))
        return float(g.cell_volume * np.vdot(self.data, other.data))

    def norm_l2(self) -> float:
        return float(np.sqrt(max(self.inner_l2(self), 0.0)))

    def __repr__(self) -> str:
        rep = "spectral" if self.spectral else "physical"
        return f"FormField(n={self.grid.n}, N={self.grid.N}, grade={self.grade}, {rep})"


def _require_physical(*fields: FormField) -> None:
    for f in fields:
        if f.spectral:
            raise ValueError("operation requires physical representation")
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise ValueError(f"grid mismatch: {g} vs {f.grid}")


def _require_spectral(f: FormField) -> None:
    if not f.spectral:
        raise ValueError("operation requires spectral representation")


def pointwise_contract(u: FormField, w: FormField) -> FormField:
    """Interior product ``u _| w`` evaluated at every grid point (physical rep)."""
    _require_physical(u, w)
    n = u.grid.n
    out_grade = w.grade - u.grade
    if out_grade < 0:
        raise ValueError(f"contraction of grade {u.grade} into grade {w.grade} has negative grade")
    out = np.zeros((comb(n, out_grade),) + u.grid.shape)
    for i, j, o, s in contract_table(n, u.grade, w.grade):
        if s > 0:
            out[o] += u.data[i] * w.data[j]
        else:
            out[o] -= u.data[i] * w.data[j]
    return FormField(u.grid, out_grade, out)


def pointwise_wedge(u: FormField, w: FormField) -> FormField:
    """Exterior product ``u ^ w`` at every grid point (physical rep)."""
    _require_physical(u, w)
    n = u.grid.n
    out_grade = u.grade + w.grade
    if out_grade > n:
        raise ValueError(f"wedge of grades {u.grade} and {w.grade} exceeds n={n}")
    out = np.zeros((comb(n, out_grade),) + u.grid.shape)
    for i, j, o, s in wedge_table(n, u.grade, w.grade):
        if s > 0:
            out[o] += u.data[i] * w.data[j]
        else:
            out[o] -= u.data[i] * w.data[j]
    return FormField(u.grid, out_grade, out)


def dealias(f: FormField) -> FormField:
    """Zero every mode with some ``|k_j|`` above two thirds of the Nyquist wavenumber."""
    _require_spectral(f)
    return f._wrap(f.data * f.grid.tables.dealias_mask)


def lp_norm(f: FormField, p: float) -> float:
    """``(sum |f(x)|^p (L/N)^n)^(1/p)``; ``p = inf`` gives the max of the pointwise norm."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if f.spectral:
        raise ValueError("lp_norm requires physical representation")
    return _lp_of_pointwise(f.pointwise_norm(), p, f.grid.cell_volume)


def _lp_of_pointwise(mag: np.ndarray, p: float, cell: float) -> float:
    if np.isinf(p):
        return float(mag.max())
    peak = float(mag.max())
    if peak == 0.0:
        return 0.0
    # scaled to avoid overflow for large p
    return float(peak * (cell * np.sum((mag / peak) ** p)) ** (1.0 / p))


def random_field(
    grid: GridSpec,
    grade: int,
    decay: float = 2.0,
    seed=None,
    kmax: float | None = None,
) -> FormField:
    """Seeded random field with spectral magnitude ``~ (1 + |k|)^(-decay)``.

    The field is real (white noise filtered in Fourier space), has zero mean
    and no Nyquist content. ``kmax`` optionally band-limits to integer mode
    indices ``|k_j| <= kmax``. Returned in spectral representation.
    """
    if not decay > 0:
        raise ValueError(f"spectrum decay must be positive, got {decay}")
    rng = np.random.default_rng(seed)
    ncomp = comb(grid.n, grade)
    noise = rng.standard_normal((ncomp,) + grid.shape)
    hat = scipy.fft.rfftn(noise, axes=grid.axes, norm="forward")
    t = grid.tables
    filt = (1.0 + t.kmag / grid.k0) ** (-decay)
    keep = ~t.zero_modes
    for idx in t.index:
        keep &= np.abs(idx) < grid.N // 2
        if kmax is not None:
            keep &= np.abs(idx) <= kmax
    hat = hat * np.where(keep, filt, 0.0)
    # unit-variance normalization independent of N
    hat *= grid.N ** (grid.n / 2)
    return FormField(grid, grade, hat, spectral=True)


def band_limit(f: FormField, rtol: float = 1e-12) -> int:
    """Largest integer mode index ``max_j |k_j|`` carrying non-negligible energy."""
    f = f.spectral_rep()
    mag = np.abs(f.data).max(axis=0)
    peak = mag.max()
    if peak == 0:
        return 0
    active = mag > rtol * peak
    lim = 0
    for idx in f.grid.tables.index:
        lim = max(lim, int(np.abs(np.broadcast_to(idx, active.shape)[active]).max()))
    return lim


def dilate(f: FormField, lam: int) -> FormField:
    """``x -> f(lam * x mod L)`` for integer ``lam``, sampled exactly on the grid."""
    if int(lam) != lam or lam < 1:
        raise ValueError(f"dilation factor must be a positive integer, got {lam}")
    lam = int(lam)
    g = f.grid
    was_spectral = f.spectral
    x = f.physical_rep().data
    idx = (lam * np.arange(g.N)) % g.N
    for axis in range(1, g.n + 1):
        x = np.take(x, idx, axis=axis)
    out = FormField(g, f.grade, x)
    return out.to_spectral() if was_spectral else out


# binary snapshots ----------------------------------------------------------

def write_snapshot(f: FormField, fh) -> None:
    """Write ``f`` (physical values) in the HMHD little-endian snapshot format."""
    phys = f.physical_rep()
    g = phys.grid
    fh.write(SNAPSHOT_MAGIC)
    fh.write(struct.pack("<IIIId", SNAPSHOT_VERSION, g.n, phys.grade, g.N, g.L))
    fh.write(np.ascontiguousarray(phys.data, dtype="<f8").tobytes(order="C"))


def read_snapshot(fh) -> FormField:
    magic = fh.read(4)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"bad snapshot magic {magic!r}")
    header = fh.read(struct.calcsize("<IIIId"))
    version, n, grade, N, L = struct.unpack("<IIIId", header)
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    g = GridSpec(n, N, L)
    count = comb(n, grade) * N**n
    raw = fh.read(8 * count)
    if len(raw) != 8 * count:
        raise ValueError("truncated snapshot")
    data = np.frombuffer(raw, dtype="<f8").reshape((comb(n, grade),) + g.shape)
    return FormField(g, grade, data.astype(float))


def save_snapshot(f: FormField, path) -> None:
    with open(path, "wb") as fh:
        write_snapshot(f, fh)


def load_snapshot(path) -> FormField:
    with open(path, "rb") as fh:
        return read_snapshot(fh)
