"""Time grids and time-indexed spectral form fields."""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .fields import FormField, GridSpec


@dataclass(frozen=True)
class TimeGrid:
    """Uniform nodes ``t_m = t0 + m (T - t0) / M`` for ``m = 0..M``."""

    T: float
    M: int
    t0: float = 0.0

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise ValueError(f"number of steps M must be a positive integer, got {self.M}")
        if not self.T > self.t0:
            raise ValueError(f"horizon T={self.T} must exceed t0={self.t0}")
        object.__setattr__(self, "M", int(self.M))

    @property
    def dt(self) -> float:
        return (self.T - self.t0) / self.M

    @property
    def nodes(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.M + 1)

    def refine(self, factor: int = 2) -> TimeGrid:
        return TimeGrid(self.T, self.M * factor, self.t0)

    def scaled(self, factor: float) -> TimeGrid:
        """Grid with every node multiplied by ``factor``."""
        return TimeGrid(self.T * factor, self.M, self.t0 * factor)


@dataclass(frozen=True, eq=False)
class FieldSeries:
    """Spectral grade-``grade`` field sampled at every node of ``times``.

    ``data`` has shape ``(M + 1, C(n, grade)) + grid.spectral_shape``.
    """

    grid: GridSpec
    grade: int
    times: TimeGrid
    data: np.ndarray

    def __post_init__(self):
        expected = (self.times.M + 1, comb(self.grid.n, self.grade)) + self.grid.spectral_shape
        data = np.asarray(self.data, dtype=complex)
        if data.shape != expected:
            raise ValueError(f"series data shape {data.shape} does not match {expected}")
        if data is self.data and data.flags.writeable:
            data = data.copy()
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def zeros(cls, grid: GridSpec, grade: int, times: TimeGrid) -> FieldSeries:
        shape = (times.M + 1, comb(grid.n, grade)) + grid.spectral_shape
        return cls(grid, grade, times, np.zeros(shape, dtype=complex))

    @classmethod
    def from_fields(cls, fields, times: TimeGrid) -> FieldSeries:
        fields = [f.spectral_rep() for f in fields]
        if len(fields) != times.M + 1:
            raise ValueError(f"expected {times.M + 1} fields, got {len(fields)}")
        f0 = fields[0]
        for f in fields[1:]:
            if f.grid != f0.grid or f.grade != f0.grade:
                raise ValueError("all fields in a series must share grid and grade")
        return cls(f0.grid, f0.grade, times, np.stack([f.data for f in fields]))

    @classmethod
    def from_function(cls, fn, times: TimeGrid) -> FieldSeries:
        """Series from ``fn(t) -> FormField`` evaluated on every node."""
        return cls.from_fields([fn(t) for t in times.nodes], times)

    def __len__(self) -> int:
        return self.times.M + 1

    def __getitem__(self, m: int) -> FormField:
        return FormField(self.grid, self.grade, self.data[m], spectral=True)

    def __iter__(self):
        for m in range(len(self)):
            yield self[m]

    def map(self, fn) -> FieldSeries:
        """Apply a field-to-field function node by node."""
        return FieldSeries.from_fields([fn(f) for f in self], self.times)

    def with_data(self, data) -> FieldSeries:
        return FieldSeries(self.grid, self.grade, self.times, data)

    def _compatible(self, other: FieldSeries) -> None:
        if not isinstance(other, FieldSeries):
            raise TypeError(f"expected FieldSeries, got {type(other).__name__}")
        if other.grid != self.grid or other.grade != self.grade:
            raise ValueError("series grid/grade mismatch")
        if other.times != self.times:
            raise ValueError(f"time grid mismatch: {self.times} vs {other.times}")

    def __add__(self, other: FieldSeries) -> FieldSeries:
        self._compatible(other)
        return self.with_data(self.data + other.data)

    def __sub__(self, other: FieldSeries) -> FieldSeries:
        self._compatible(other)
        return self.with_data(self.data - other.data)

    def __neg__(self) -> FieldSeries:
        return self.with_data(-self.data)

    def __mul__(self, scalar) -> FieldSeries:
        if not np.isscalar(scalar):
            return NotImplemented
        return self.with_data(self.data * scalar)

    __rmul__ = __mul__

    def subsample(self, stride: int) -> FieldSeries:
        """Every ``stride``-th node, on the correspondingly coarser grid."""
        if self.times.M % stride:
            raise ValueError(f"stride {stride} does not divide M={self.times.M}")
        coarse = TimeGrid(self.times.T, self.times.M // stride, self.times.t0)
        return FieldSeries(self.grid, self.grade, coarse, self.data[::stride])
