import io
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from formmhd.fields import (
    FormField,
    GridSpec,
    band_limit,
    dealias,
    dilate,
    load_snapshot,
    lp_norm,
    pointwise_contract,
    pointwise_wedge,
    random_field,
    read_snapshot,
    save_snapshot,
    write_snapshot,
)
from formmhd.hodge import ext_deriv

from conftest import rel


def sine_e2(grid):
    x = grid.coordinates()
    return FormField.from_components(grid, 1, {(2,): np.sin(grid.k0 * x[0])})


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(3, 12)
    with pytest.raises(ValueError):
        GridSpec(1, 16)
    g = GridSpec(3, 8)
    assert g.shape == (8, 8, 8)
    assert g.spectral_shape == (8, 8, 5)


def test_constant_field_transform(grid3):
    f = FormField(grid3, 0, np.full((1, *grid3.shape), 2.5)).to_spectral()
    assert f.data[0, 0, 0, 0] == pytest.approx(2.5)
    f.data.flags.writeable  # read-only view
    rest = f.data.copy()
    rest[0, 0, 0, 0] = 0
    assert np.abs(rest).max() < 1e-14


def test_sine_transform(grid3):
    f = sine_e2(grid3).to_spectral()
    comp = f.data[1]
    nz = np.argwhere(np.abs(comp) > 1e-12)
    # half spectrum keeps the +k0 and -k0 modes on axis 0
    assert sorted(tuple(i) for i in nz) == [(1, 0, 0), (15, 0, 0)]
    assert comp[1, 0, 0] == pytest.approx(-0.5j)
    assert comp[15, 0, 0] == pytest.approx(0.5j)
    assert np.abs(f.data[[0, 2]]).max() < 1e-14


def test_roundtrip_and_representation_errors(grid3):
    f = random_field(grid3, 2, seed=1).to_physical()
    back = f.to_spectral().to_physical()
    assert np.abs(back.data - f.data).max() < 1e-12 * np.abs(f.data).max()
    with pytest.raises(ValueError):
        f.to_physical()
    with pytest.raises(ValueError):
        f.to_spectral().to_spectral()


def test_data_is_read_only(grid3):
    f = random_field(grid3, 1, seed=0)
    with pytest.raises(ValueError):
        f.data[0, 0, 0, 0] = 1.0


def test_shape_validation(grid3):
    with pytest.raises(ValueError):
        FormField(grid3, 1, np.zeros((2, *grid3.shape)))


def test_pointwise_contract_constant_blades(grid3):
    one = np.ones(grid3.shape)
    e1 = FormField.from_components(grid3, 1, {(1,): one})
    e12 = FormField.from_components(grid3, 2, {(1, 2): one})
    out = pointwise_contract(e1, e12)
    expected = FormField.from_components(grid3, 1, {(2,): one})
    assert np.array_equal(out.data, expected.data)


def test_self_contraction_is_squared_norm(grid3):
    u = random_field(grid3, 1, seed=2).to_physical()
    s = pointwise_contract(u, u)
    assert s.grade == 0
    assert np.allclose(s.data[0], u.pointwise_norm() ** 2)


def test_contract_with_two_form_is_minus_cross(grid3):
    u = random_field(grid3, 1, seed=3).to_physical().data
    b = random_field(grid3, 2, seed=4).to_physical()
    B = np.stack([b.data[2], -b.data[1], b.data[0]])
    out = pointwise_contract(FormField(grid3, 1, u), b)
    assert np.allclose(out.data, -np.cross(u, B, axis=0))


def test_contract_errors(grid3):
    u = random_field(grid3, 1, seed=0).to_physical()
    b = random_field(grid3, 2, seed=0).to_physical()
    with pytest.raises(ValueError):
        pointwise_contract(b, u)
    with pytest.raises(ValueError):
        pointwise_contract(u.to_spectral(), b)
    with pytest.raises(ValueError):
        pointwise_contract(u, random_field(GridSpec(3, 8), 2, seed=0).to_physical())
    with pytest.raises(ValueError):
        pointwise_wedge(b, b)  # grade 4 in n = 3


def test_wedge_matches_cross(grid3):
    u = random_field(grid3, 1, seed=5).to_physical()
    v = random_field(grid3, 1, seed=6).to_physical()
    w = pointwise_wedge(u, v).data
    assert np.allclose(np.stack([w[2], -w[1], w[0]]), np.cross(u.data, v.data, axis=0))


def test_dealias(grid3):
    f = sine_e2(grid3).to_spectral()
    assert np.abs(dealias(f).data - f.data).max() < 1e-15
    x = grid3.coordinates()
    nyq = FormField.from_components(grid3, 1, {(1,): np.cos(grid3.N / 2 * grid3.k0 * x[0])}).to_spectral()
    assert np.abs(dealias(nyq).data).max() == 0
    r = random_field(grid3, 2, seed=7)
    once = dealias(r)
    assert np.array_equal(dealias(once).data, once.data)
    with pytest.raises(ValueError):
        dealias(r.to_physical())


def test_lp_norm_examples(grid3):
    c = FormField.from_components(grid3, 1, {(1,): 3.0, (2,): 4.0})
    for p in (1, 2, 3.5, 6):
        assert lp_norm(c, p) == pytest.approx(5.0 * (2 * np.pi) ** (3 / p), rel=1e-13)
    assert lp_norm(c, np.inf) == pytest.approx(5.0)
    assert lp_norm(sine_e2(grid3), 2) == pytest.approx(np.sqrt(0.5 * (2 * np.pi) ** 3), rel=1e-13)
    with pytest.raises(ValueError):
        lp_norm(c, 0.5)


def test_parseval(grid4):
    f = random_field(grid4, 2, seed=8)
    full = np.fft.fftn(f.to_physical().data, axes=grid4.axes, norm="forward")
    lhs = lp_norm(f.to_physical(), 2) ** 2
    rhs = np.sum(np.abs(full) ** 2) * grid4.L**grid4.n
    assert lhs == pytest.approx(rhs, rel=1e-10)
    assert f.norm_l2() ** 2 == pytest.approx(rhs, rel=1e-10)


def test_random_field_contract(grid3):
    a = random_field(grid3, 1, seed=11)
    b = random_field(grid3, 1, seed=11)
    assert np.array_equal(a.data, b.data)
    assert np.abs(a.data[:, 0, 0, 0]).max() == 0
    assert np.abs(a.to_physical().mean()).max() < 1e-14
    assert band_limit(random_field(grid3, 1, seed=1, kmax=3)) == 3


def test_random_field_smoother_with_faster_decay():
    g = GridSpec(3, 32)
    avg = {}
    for s in (2.0, 4.0):
        avg[s] = np.mean([ext_deriv(random_field(g, 1, s, seed)).norm_l2() for seed in range(10)])
    assert np.isfinite(avg[4.0]) and avg[4.0] < avg[2.0]


def test_holder_bound_for_contraction(grid3):
    for seed in range(5):
        u = random_field(grid3, 1, seed=seed).to_physical()
        w = random_field(grid3, 2, seed=seed + 100).to_physical()
        for p in (2, 4, 6):
            assert lp_norm(pointwise_contract(u, w), p / 2) <= lp_norm(u, p) * lp_norm(w, p) * (1 + 1e-12)


def test_translation_equivariance(grid3):
    u = random_field(grid3, 1, seed=1).to_physical()
    w = random_field(grid3, 2, seed=2).to_physical()
    shift = lambda f: FormField(grid3, f.grade, np.roll(f.data, 1, axis=1))
    a = shift(pointwise_contract(u, w))
    b = pointwise_contract(shift(u), shift(w))
    assert np.array_equal(a.data, b.data)
    da = shift(ext_deriv(u.to_spectral()).to_physical())
    db = ext_deriv(shift(u).to_spectral()).to_physical()
    assert rel(da.data, db.data) < 1e-12


def test_dilate_is_exact_resampling(grid3):
    x = grid3.coordinates()
    f = FormField.from_components(grid3, 1, {(3,): np.sin(x[1]) * np.cos(x[0])})
    g = FormField.from_components(grid3, 1, {(3,): np.sin(2 * x[1]) * np.cos(2 * x[0])})
    assert np.allclose(dilate(f, 2).data, g.data, atol=1e-14)
    with pytest.raises(ValueError):
        dilate(f, 1.5)


def test_snapshot_roundtrip(tmp_path, grid4):
    f = random_field(grid4, 2, seed=3)
    path = tmp_path / "f.hmhd"
    save_snapshot(f, path)
    g = load_snapshot(path)
    assert g.grade == 2 and g.grid == grid4
    assert np.array_equal(g.data, f.to_physical().data)
    raw = path.read_bytes()
    assert raw[:4] == b"HMHD"
    assert len(raw) == 4 + 24 + 8 * comb(4, 2) * 8**4


def test_snapshot_rejects_garbage():
    with pytest.raises(ValueError):
        read_snapshot(io.BytesIO(b"XXXX" + bytes(40)))
    buf = io.BytesIO()
    write_snapshot(random_field(GridSpec(3, 4), 1, seed=0), buf)
    with pytest.raises(ValueError):
        read_snapshot(io.BytesIO(buf.getvalue()[:-8]))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.floats(-3, 3), st.floats(-3, 3))
def test_contract_bilinear(seed, a, b):
    g = GridSpec(3, 8)
    u = random_field(g, 1, seed=seed).to_physical()
    v = random_field(g, 1, seed=seed + 1).to_physical()
    w = random_field(g, 2, seed=seed + 2).to_physical()
    lhs = pointwise_contract(u * a + v * b, w)
    rhs = pointwise_contract(u, w) * a + pointwise_contract(v, w) * b
    assert np.allclose(lhs.data, rhs.data, atol=1e-12 * (1 + abs(a) + abs(b)) * np.abs(w.data).max() ** 2 * 10)
