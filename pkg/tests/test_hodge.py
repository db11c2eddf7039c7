import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from formmhd.fields import FormField, GridSpec, random_field
from formmhd.hodge import (
    OperatorKind,
    check_constraint,
    codifferential,
    coexact_part,
    constraint_defect,
    dirac,
    exact_part,
    ext_deriv,
    frac_power,
    harmonic_part,
    heat_semigroup,
    hodge_decompose,
    laplacian,
    leray_project,
)

from conftest import rel

# 8th-order central difference weights for offsets 1..4
FD8 = np.array([4 / 5, -1 / 5, 4 / 105, -1 / 280])


def fd_derivative(x, axis, h):
    return sum(w * (np.roll(x, -j, axis) - np.roll(x, j, axis)) for j, w in enumerate(FD8, start=1)) / h


def l2(f):
    return f.norm_l2()


def test_d_of_sine_against_finite_differences():
    g = GridSpec(3, 64)
    x = g.coordinates()
    f = FormField.from_components(g, 1, {(2,): np.sin(x[0])})
    df = ext_deriv(f.to_spectral()).to_physical()
    h = g.L / g.N
    fd = fd_derivative(f.data[1], 0, h)  # d(f2 e2) = d_1 f2 e12
    assert np.abs(df.data[0] - fd).max() < 1e-8
    assert np.abs(df.data[0] - np.cos(x[0])).max() < 1e-12
    assert np.abs(df.data[1:]).max() < 1e-12


def test_codifferential_is_minus_divergence():
    g = GridSpec(3, 64)
    x = g.coordinates()
    f = FormField.from_components(g, 1, {(1,): np.sin(x[0])})
    df = codifferential(f.to_spectral()).to_physical()
    fd = -fd_derivative(f.data[0], 0, g.L / g.N)
    assert np.abs(df.data[0] - fd).max() < 1e-8
    assert np.abs(df.data[0] + np.cos(x[0])).max() < 1e-12


def test_constant_fields(grid3):
    c = FormField.from_components(grid3, 1, {(1,): 2.0, (3,): -1.0}).to_spectral()
    assert np.abs(ext_deriv(c).data).max() == 0
    ex, co, ha = hodge_decompose(c)
    assert np.abs(ex.data).max() == 0 and np.abs(co.data).max() == 0
    assert np.array_equal(ha.data, c.data)


def test_grade_errors(grid3):
    top = random_field(grid3, 3, seed=0)
    with pytest.raises(ValueError):
        ext_deriv(top)
    with pytest.raises(ValueError):
        codifferential(random_field(grid3, 0, seed=0))
    with pytest.raises(ValueError):
        leray_project(random_field(grid3, 2, seed=0))
    with pytest.raises(ValueError):
        ext_deriv(random_field(grid3, 1, seed=0).to_physical())


@pytest.mark.parametrize("n,N", [(3, 16), (4, 8), (5, 8)])
def test_nilpotency_and_dirac_square(n, N):
    g = GridSpec(n, N)
    for grade in range(n + 1):
        f = random_field(g, grade, seed=grade)
        scale = l2(laplacian(f))
        if grade <= n - 2:
            assert l2(ext_deriv(ext_deriv(f))) <= 1e-13 * scale
        if grade >= 2:
            assert l2(codifferential(codifferential(f))) <= 1e-13 * scale
        sq = f.with_data(np.zeros_like(f.data))
        for part in dirac(f):
            for piece in dirac(part):
                if piece.grade == grade:
                    sq = sq + piece
        assert l2(sq - laplacian(f)) <= 1e-12 * scale


def test_adjointness_of_d_and_delta(grid4):
    for seed in range(5):
        u = random_field(grid4, 1, seed=seed)
        v = random_field(grid4, 2, seed=seed + 10)
        lhs = ext_deriv(u).inner_l2(v)
        rhs = u.inner_l2(codifferential(v))
        assert lhs == pytest.approx(rhs, rel=1e-10)


def test_laplacian_and_fractional_powers(grid3):
    x = grid3.coordinates()
    s = FormField.from_components(grid3, 1, {(2,): np.sin(x[0])}).to_spectral()
    assert rel(laplacian(s).data, s.data) < 1e-14
    f = random_field(grid3, 2, seed=4)
    assert rel(frac_power(frac_power(f, 0.5), 0.5).data, laplacian(f).data) < 1e-13
    dirac_sq = sum(l2(p) ** 2 for p in dirac(f))
    assert np.sqrt(dirac_sq) == pytest.approx(l2(frac_power(f, 0.5)), rel=1e-12)
    with_mean = f + FormField.from_components(grid3, 2, {(1, 2): 1.0}).to_spectral()
    with pytest.raises(ValueError, match="harmonic"):
        frac_power(with_mean, -0.5)
    assert rel(frac_power(frac_power(f, -0.5), 0.5).data, f.data) < 1e-13


def test_leray(grid3):
    phi = random_field(grid3, 0, seed=1)
    assert l2(leray_project(ext_deriv(phi))) < 1e-13 * l2(ext_deriv(phi))
    f = random_field(grid3, 1, seed=2)
    pf = leray_project(f)
    assert rel(leray_project(pf).data, pf.data) < 1e-14
    assert l2(codifferential(pf)) < 1e-12 * l2(f)
    assert abs(pf.inner_l2(f - pf)) < 1e-12 * l2(f) ** 2


@pytest.mark.parametrize("grade", [1, 2])
def test_hodge_decomposition(grid4, grade):
    f = random_field(grid4, grade, seed=grade)
    g = FormField.from_components(grid4, grade, {tuple(range(1, grade + 1)): 0.7}).to_spectral()
    f = f + g
    ex, co, ha = hodge_decompose(f)
    assert l2(ex + co + ha - f) < 1e-12 * l2(f)
    for a, b in ((ex, co), (ex, ha), (co, ha)):
        assert abs(a.inner_l2(b)) < 1e-12 * l2(f) ** 2
    exact = ext_deriv(random_field(grid4, grade - 1, seed=9))
    e2, c2, h2 = hodge_decompose(exact)
    assert rel(e2.data, exact.data) < 1e-12
    assert l2(c2) < 1e-12 * l2(exact) and l2(h2) == 0


def test_heat_semigroup(grid3):
    f = leray_project(random_field(grid3, 1, seed=5))
    assert np.array_equal(heat_semigroup(f, 0.0, OperatorKind.STOKES).data, f.data)
    x = grid3.coordinates()
    s = FormField.from_components(grid3, 1, {(2,): np.sin(x[0])}).to_spectral()
    assert rel(heat_semigroup(s, 0.3).data, np.exp(-0.3) * s.data) < 1e-14
    a = heat_semigroup(heat_semigroup(f, 0.1, "stokes"), 0.2, "stokes")
    b = heat_semigroup(f, 0.3, "stokes")
    assert rel(a.data, b.data) < 1e-12
    norms = [l2(heat_semigroup(f, t)) for t in np.linspace(0, 2, 9)]
    assert all(x >= y for x, y in zip(norms, norms[1:]))
    with pytest.raises(ValueError):
        heat_semigroup(f, -1.0)
    with pytest.raises(ValueError):
        heat_semigroup(random_field(grid3, 1, seed=6), 0.1, OperatorKind.STOKES)
    b2 = random_field(grid3, 2, seed=7)
    with pytest.raises(ValueError):
        heat_semigroup(b2, 0.1, OperatorKind.MAXWELL)
    heat_semigroup(exact_part(b2), 0.1, OperatorKind.MAXWELL)


def test_constraint_defect(grid3):
    u = leray_project(random_field(grid3, 1, seed=1))
    assert constraint_defect(u, "stokes") < 1e-14
    check_constraint(u, OperatorKind.STOKES)
    assert constraint_defect(random_field(grid3, 1, seed=1), "stokes") > 0.1
    with pytest.raises(ValueError):
        constraint_defect(u, "maxwell")


@pytest.mark.parametrize("t", [0.01, 0.1, 1.0])
def test_commutation_identities(grid4, t):
    u = leray_project(random_field(grid4, 1, seed=3))
    # M d = d S
    lhs = laplacian(ext_deriv(u))
    rhs = ext_deriv(laplacian(u))
    assert rel(lhs.data, rhs.data) < 1e-12
    # d* e^{-tM} d = S e^{-tS}
    lhs = codifferential(heat_semigroup(ext_deriv(u), t, "maxwell"))
    rhs = laplacian(heat_semigroup(u, t, "stokes"))
    assert rel(lhs.data, rhs.data) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.integers(0, 3), st.floats(0.25, 4.0))
def test_projection_properties(seed, grade, decay):
    g = GridSpec(3, 8)
    f = random_field(g, grade, decay, seed)
    ex, co = exact_part(f), coexact_part(f)
    assert l2(exact_part(ex) - ex) <= 1e-12 * l2(f)
    assert l2(coexact_part(co) - co) <= 1e-12 * l2(f)
    assert l2(exact_part(co)) <= 1e-12 * l2(f)
    assert l2(harmonic_part(f)) == 0
