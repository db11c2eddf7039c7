"""Exterior algebra of R^n on bitmask-encoded basis blades.

A blade ``e_I`` with ``I = {j1 < ... < jl}`` (1-based) is stored as the
integer with bits ``j1-1, ..., jl-1`` set. A :class:`Multivector` holds a
dense vector of ``2**n`` real coefficients indexed by that bitmask.

The interior product is the left adjoint of the wedge product::

    <a _| b, c> = <b, a ^ c>

which in R^3 reproduces ``u _| v = u . v`` for two vectors and
``u _| v = -u x v`` when ``v`` is a 2-form identified with a vector via the
Hodge star.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import numpy as np

MAX_DIM = 16


def popcount(x: int) -> int:
    return bin(x).count("1")


def reorder_sign(a: int, b: int) -> int:
    """Sign of the permutation sorting the concatenation of blades ``a`` then ``b``.

    Counts pairs ``(i in a, j in b)`` with ``i > j``; each is one transposition.
    """
    a >>= 1
    swaps = 0
    while a:
        swaps += popcount(a & b)
        a >>= 1
    return -1 if swaps & 1 else 1


def blade_mask(indices) -> int:
    """Bitmask of a 1-based index collection, e.g. ``(1, 3) -> 0b101``."""
    mask = 0
    for j in indices:
        if j < 1:
            raise ValueError(f"blade indices are 1-based, got {j}")
        bit = 1 << (j - 1)
        if mask & bit:
            raise ValueError(f"repeated index {j} in blade {tuple(indices)}")
        mask |= bit
    return mask


def blade_indices(mask: int) -> tuple[int, ...]:
    out = []
    j = 1
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return tuple(out)


def _check_dim(n: int) -> None:
    if not 0 <= n <= MAX_DIM:
        raise ValueError(f"dimension must be in [0, {MAX_DIM}], got {n}")


@lru_cache(maxsize=None)
def grade_blades(n: int, grade: int) -> tuple[int, ...]:
    """Bitmasks of the grade-``grade`` blades in canonical (lexicographic) order."""
    _check_dim(n)
    if grade < 0 or grade > n:
        return ()
    return tuple(sum(1 << j for j in c) for c in combinations(range(n), grade))


@lru_cache(maxsize=None)
def _blade_position(n: int, grade: int) -> dict[int, int]:
    return {m: i for i, m in enumerate(grade_blades(n, grade))}


def wedge_blades(a: int, b: int) -> tuple[int, int]:
    """``e_a ^ e_b = sign * e_out``; sign is 0 when the blades overlap."""
    if a & b:
        return 0, 0
    return reorder_sign(a, b), a | b


def contract_blades(a: int, b: int) -> tuple[int, int]:
    """``e_a _| e_b = sign * e_out`` with ``out = b \\ a``; sign 0 unless ``a`` is a subset of ``b``."""
    if a & ~b:
        return 0, 0
    rest = b & ~a
    return reorder_sign(a, rest), rest


def hodge_blade(n: int, a: int) -> tuple[int, int]:
    """``*e_a = sign * e_{a^c}`` fixed by ``e_a ^ *e_a = e_{1..n}``."""
    comp = ((1 << n) - 1) & ~a
    return reorder_sign(a, comp), comp


@lru_cache(maxsize=None)
def wedge_table(n: int, k: int, l: int) -> tuple[tuple[int, int, int, int], ...]:
    """Entries ``(i, j, o, sign)`` with ``blade_k[i] ^ blade_l[j] = sign * blade_{k+l}[o]``."""
    pos = _blade_position(n, k + l)
    table = []
    for i, a in enumerate(grade_blades(n, k)):
        for j, b in enumerate(grade_blades(n, l)):
            s, m = wedge_blades(a, b)
            if s:
                table.append((i, j, pos[m], s))
    return tuple(table)


@lru_cache(maxsize=None)
def contract_table(n: int, k: int, l: int) -> tuple[tuple[int, int, int, int], ...]:
    """Entries ``(i, j, o, sign)`` with ``blade_k[i] _| blade_l[j] = sign * blade_{l-k}[o]``."""
    pos = _blade_position(n, l - k)
    table = []
    for i, a in enumerate(grade_blades(n, k)):
        for j, b in enumerate(grade_blades(n, l)):
            s, m = contract_blades(a, b)
            if s:
                table.append((i, j, pos[m], s))
    return tuple(table)


@lru_cache(maxsize=None)
def hodge_table(n: int, k: int) -> tuple[tuple[int, int, int], ...]:
    """Entries ``(i, o, sign)`` with ``*blade_k[i] = sign * blade_{n-k}[o]``."""
    pos = _blade_position(n, n - k)
    return tuple(
        (i, pos[hodge_blade(n, a)[1]], hodge_blade(n, a)[0])
        for i, a in enumerate(grade_blades(n, k))
    )


class Multivector:
    """Element of the exterior algebra of R^n with dense ``2**n`` storage."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs=None):
        _check_dim(n)
        self.n = n
        if coeffs is None:
            coeffs = np.zeros(1 << n)
        coeffs = np.array(coeffs, dtype=float)
        if coeffs.shape != (1 << n,):
            raise ValueError(f"expected {1 << n} coefficients, got shape {coeffs.shape}")
        coeffs.setflags(write=False)
        self.coeffs = coeffs

    @classmethod
    def blade(cls, n: int, indices=(), value: float = 1.0) -> Multivector:
        """``value * e_I`` for a 1-based index tuple; indices are sorted with the permutation sign."""
        indices = tuple(indices)
        mask = blade_mask(indices)
        # sign of the sorting permutation
        sign = 1
        for i in range(len(indices)):
            for j in range(i + 1, len(indices)):
                if indices[i] > indices[j]:
                    sign = -sign
        if mask >= 1 << n:
            raise ValueError(f"blade {indices} out of range for n={n}")
        c = np.zeros(1 << n)
        c[mask] = sign * value
        return cls(n, c)

    @classmethod
    def from_grade(cls, n: int, grade: int, values) -> Multivector:
        """Homogeneous multivector from coefficients in canonical blade order."""
        blades = grade_blades(n, grade)
        values = np.asarray(values, dtype=float)
        if values.shape != (len(blades),):
            raise ValueError(f"grade {grade} in n={n} has {len(blades)} blades, got {values.shape}")
        c = np.zeros(1 << n)
        c[list(blades)] = values
        return cls(n, c)

    def grade_part(self, grade: int) -> np.ndarray:
        """Coefficients of grade ``grade`` in canonical blade order (empty outside ``0..n``)."""
        return self.coeffs[list(grade_blades(self.n, grade))].copy()

    def project(self, grade: int) -> Multivector:
        c = np.zeros_like(self.coeffs)
        idx = list(grade_blades(self.n, grade))
        c[idx] = self.coeffs[idx]
        return Multivector(self.n, c)

    def _check(self, other: Multivector) -> None:
        if not isinstance(other, Multivector):
            raise TypeError(f"expected Multivector, got {type(other).__name__}")
        if other.n != self.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")

    def _bilinear(self, other: Multivector, rule) -> Multivector:
        self._check(other)
        out = np.zeros(1 << self.n)
        ia = np.flatnonzero(self.coeffs)
        ib = np.flatnonzero(other.coeffs)
        for a in ia:
            ca = self.coeffs[a]
            for b in ib:
                s, m = rule(int(a), int(b))
                if s:
                    out[m] += s * ca * other.coeffs[b]
        return Multivector(self.n, out)

    def wedge(self, other: Multivector) -> Multivector:
        return self._bilinear(other, wedge_blades)

    def contract(self, other: Multivector) -> Multivector:
        """Interior product ``self _| other``."""
        return self._bilinear(other, contract_blades)

    def inner(self, other: Multivector) -> float:
        self._check(other)
        return float(self.coeffs @ other.coeffs)

    def hodge_star(self) -> Multivector:
        out = np.zeros(1 << self.n)
        for a in np.flatnonzero(self.coeffs):
            s, m = hodge_blade(self.n, int(a))
            out[m] += s * self.coeffs[a]
        return Multivector(self.n, out)

    __xor__ = wedge

    def __or__(self, other):
        return self.contract(other)

    def __add__(self, other: Multivector) -> Multivector:
        self._check(other)
        return Multivector(self.n, self.coeffs + other.coeffs)

    def __sub__(self, other: Multivector) -> Multivector:
        self._check(other)
        return Multivector(self.n, self.coeffs - other.coeffs)

    def __neg__(self) -> Multivector:
        return Multivector(self.n, -self.coeffs)

    def __mul__(self, scalar: float) -> Multivector:
        return Multivector(self.n, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, Multivector) and other.n == self.n and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash((self.n, self.coeffs.tobytes()))

    def allclose(self, other: Multivector, atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.allclose(self.coeffs, other.coeffs, rtol=0, atol=atol))

    def __repr__(self) -> str:
        terms = []
        for m in np.flatnonzero(self.coeffs):
            idx = "".join(str(j) for j in blade_indices(int(m))) or "0"
            terms.append(f"{self.coeffs[m]:+g}*e{idx}")
        return f"Multivector(n={self.n}, " + (" ".join(terms) or "0") + ")"
