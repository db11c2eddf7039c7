import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from formmhd.exterior import (
    Multivector,
    blade_indices,
    blade_mask,
    grade_blades,
    hodge_table,
    reorder_sign,
)


def inversions(seq):
    return sum(1 for i, j in itertools.combinations(range(len(seq)), 2) if seq[i] > seq[j])


def mv(n, *indices, value=1.0):
    return Multivector.blade(n, indices, value)


def random_mv(n, rng, grade=None):
    c = rng.standard_normal(1 << n)
    m = Multivector(n, c)
    return m if grade is None else m.project(grade)


dims = st.integers(min_value=2, max_value=6)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_basic_wedge():
    assert (mv(3, 1) ^ mv(3, 2)) == mv(3, 1, 2)
    assert (mv(3, 1) ^ mv(3, 1)) == Multivector(3)


def test_four_dim_signs():
    assert (mv(4, 1, 2) ^ mv(4, 3, 4)) == mv(4, 1, 2, 3, 4)
    assert (mv(4, 1, 3) ^ mv(4, 2, 4)) == mv(4, 1, 2, 3, 4, value=-1.0)


def test_wedge_sign_matches_inversion_count():
    for I in itertools.combinations(range(1, 7), 2):
        for J in itertools.combinations(range(1, 7), 3):
            if set(I) & set(J):
                continue
            expected = (-1) ** inversions(I + J)
            assert reorder_sign(blade_mask(I), blade_mask(J)) == expected


def test_contract_examples():
    assert (mv(3, 1) | mv(3, 1, 2)) == mv(3, 2)
    assert (mv(3, 3) | mv(3, 1, 2)) == Multivector(3)


def test_contract_from_adjoint_oracle():
    # solve <e1 _| e12, c> = <e12, e1 ^ c> over every basis blade c
    n = 3
    a, b = mv(n, 1), mv(n, 1, 2)
    coeffs = np.zeros(1 << n)
    for m in range(1 << n):
        c = Multivector(n, np.eye(1 << n)[m])
        coeffs[m] = b.inner(a ^ c)
    assert (a | b).allclose(Multivector(n, coeffs))


def test_blade_index_roundtrip():
    for n in range(1, 7):
        for g in range(n + 1):
            for m in grade_blades(n, g):
                assert blade_mask(blade_indices(m)) == m
                assert len(blade_indices(m)) == g


def test_blade_unsorted_indices_carry_sign():
    assert mv(3, 2, 1) == mv(3, 1, 2, value=-1.0)
    with pytest.raises(ValueError):
        mv(3, 1, 1)


def test_inner_orthonormal():
    assert mv(3, 1, 2).inner(mv(3, 1, 2)) == 1.0
    assert mv(3, 1, 2).inner(mv(3, 1, 3)) == 0.0
    a = random_mv(4, np.random.default_rng(0))
    assert a.inner(a) == pytest.approx(np.sum(a.coeffs**2))


def test_hodge_examples():
    assert mv(3, 1).hodge_star() == mv(3, 2, 3)
    assert mv(3, 1, 2).hodge_star() == mv(3, 3)
    for idx in itertools.combinations(range(1, 5), 2):
        e = mv(4, *idx)
        assert e.hodge_star().hodge_star() == e


def test_hodge_defining_relation():
    for n in range(2, 7):
        top = mv(n, *range(1, n + 1))
        for g in range(n + 1):
            for m in grade_blades(n, g):
                e = Multivector(n, np.eye(1 << n)[m])
                assert (e ^ e.hodge_star()) == top
        assert len(hodge_table(n, 1)) == n


def test_r3_dictionary():
    rng = np.random.default_rng(3)
    u, v = rng.standard_normal(3), rng.standard_normal(3)
    U, V = Multivector.from_grade(3, 1, u), Multivector.from_grade(3, 1, v)
    w = (U ^ V).grade_part(2)  # (e12, e13, e23)
    assert np.allclose([w[2], -w[1], w[0]], np.cross(u, v))
    assert (U | V).grade_part(0)[0] == pytest.approx(u @ v)
    # 2-form with vector B = (b23, -b13, b12)
    B = rng.standard_normal(3)
    b = Multivector.from_grade(3, 2, [B[2], -B[1], B[0]])
    assert np.allclose((U | b).grade_part(1), -np.cross(u, B))
    # u ^ b is the 3-form (u . B) e123
    assert (U ^ b).grade_part(3)[0] == pytest.approx(u @ B)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        mv(3, 1) ^ mv(4, 1)
    with pytest.raises(ValueError):
        mv(3, 1) | mv(4, 1)
    with pytest.raises(ValueError):
        mv(3, 1).inner(mv(4, 1))


@settings(max_examples=60, deadline=None)
@given(dims, st.integers(0, 6), st.integers(0, 6), seeds)
def test_graded_antisymmetry(n, k, l, seed):
    k, l = k % (n + 1), l % (n + 1)
    rng = np.random.default_rng(seed)
    a, b = random_mv(n, rng, k), random_mv(n, rng, l)
    assert (a ^ b).allclose((b ^ a) * (-1) ** (k * l), atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(dims, seeds)
def test_adjointness(n, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_mv(n, rng) for _ in range(3))
    lhs = (a | b).inner(c)
    rhs = b.inner(a ^ c)
    assert abs(lhs - rhs) <= 1e-13 * max(1.0, abs(lhs), abs(rhs)) * (1 << n)


@settings(max_examples=40, deadline=None)
@given(dims, seeds)
def test_wedge_associative_and_bilinear(n, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_mv(n, rng) for _ in range(3))
    assert ((a ^ b) ^ c).allclose(a ^ (b ^ c), atol=1e-9)
    assert ((a + b) ^ c).allclose((a ^ c) + (b ^ c), atol=1e-9)
    assert ((2.5 * a) ^ c).allclose((a ^ c) * 2.5, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(dims, st.integers(0, 6), seeds)
def test_double_star_sign(n, g, seed):
    g = g % (n + 1)
    a = random_mv(n, np.random.default_rng(seed), g)
    assert a.hodge_star().hodge_star().allclose(a * (-1) ** (g * (n - g)))
