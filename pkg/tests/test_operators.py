import numpy as np
import pytest

from pnlab import (FarField, Grid1D, HalfLaplacian, LAYER_FAR_FIELD,
                   ZERO_FAR_FIELD, apply_integral, apply_spectral,
                   cross_validate, exact_pn_layer)
from pnlab.operators import NonUniformGridError


def closed_form(x, a=1.0):
    return -x / (np.pi * (x * x + a * a))


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid1D(-1.0, 1.0, 8)
    with pytest.raises(ValueError):
        Grid1D(1.0, -1.0, 64)
    g = Grid1D(-1.0, 1.0, 21)
    assert g.h == pytest.approx(0.1)
    assert np.all(np.diff(g.x) > 0)


def test_grid_from_nodes_rejects_nonuniform():
    with pytest.raises(NonUniformGridError):
        Grid1D.from_nodes(np.array([0.0, 0.1, 0.25, 0.3]))
    with pytest.raises(NonUniformGridError):
        Grid1D.from_nodes(np.array([0.0, 0.1, 0.1, 0.2]))
    g = Grid1D.from_nodes(np.linspace(0, 1, 33))
    assert g.n == 33


def periodic_grid(n, length=2 * np.pi):
    # one period: nodes 0 .. length - h
    return Grid1D(0.0, length * (1 - 1.0 / n), n)


def test_spectral_constant_maps_to_zero():
    g = periodic_grid(128)
    out = apply_spectral(np.full(g.n, 3.7), g)
    assert np.abs(out).max() < 1e-13


def test_spectral_multiplier_on_cos():
    g = periodic_grid(256)
    out = apply_spectral(np.cos(2 * g.x), g)
    assert np.abs(out + 2 * np.cos(2 * g.x)).max() < 1e-12


def test_spectral_linearity_on_mixed_modes():
    g = periodic_grid(256)
    w = np.sin(g.x) + np.cos(3 * g.x)
    expect = -np.sin(g.x) - 3 * np.cos(3 * g.x)
    assert np.abs(apply_spectral(w, g) - expect).max() < 1e-12


def test_integral_annihilates_constants():
    g = Grid1D(-10.0, 10.0, 128)
    out = apply_integral(np.full(g.n, 2.5), FarField(2.5, 2.5), g)
    assert np.abs(out).max() < 1e-13


def test_integral_layer_oracle_pointwise(grid40, layer40):
    # nodes of grid40 include x = +-40 + k h; value at x=1 checked at the
    # nearest node against the closed form
    out = apply_integral(layer40.phi, LAYER_FAR_FIELD, grid40)
    err = np.abs(out - closed_form(grid40.x))
    interior = np.abs(grid40.x) <= 20.0
    assert err[interior].max() < 2e-4
    j = np.argmin(np.abs(grid40.x - 1.0))
    assert abs(out[j] - closed_form(grid40.x[j])) < 5e-5
    assert closed_form(1.0) == pytest.approx(-0.15915494309189535)


def test_integral_layer_odd_symmetry_at_zero():
    # grid with a node exactly at 0: odd symmetry makes L phi vanish there
    g = Grid1D(-40.0, 40.0, 2049)
    lp = exact_pn_layer(1.0, g)
    out = apply_integral(lp.phi, LAYER_FAR_FIELD, g)
    j = g.n // 2
    assert g.x[j] == 0.0
    assert abs(out[j]) < 1e-14


def test_compensation_radius_is_immaterial():
    g = Grid1D(-20.0, 20.0, 256)
    rng = np.random.default_rng(7)
    w = rng.normal(size=g.n)
    far = FarField(0.2, -0.4)
    a = apply_integral(w, far, g, r=1.0)
    b = apply_integral(w, far, g, r=2.0)
    assert np.array_equal(a, b)


def test_radius_too_large_for_grid():
    g = Grid1D(-1.0, 1.0, 64)
    with pytest.raises(ValueError):
        HalfLaplacian(g, r=5.0)


def test_fast_apply_matches_dense():
    g = Grid1D(-15.0, 15.0, 300)
    op = HalfLaplacian(g)
    rng = np.random.default_rng(3)
    w = rng.normal(size=g.n)
    far = FarField(0.3, -1.2)
    fast = op.apply(w, far)
    dense = op.dense_matrix() @ w \
        + far.c_left * op.far_field_left + far.c_right * op.far_field_right
    assert np.abs(fast - dense).max() < 1e-12


def test_self_adjoint_on_compact_bumps():
    g = Grid1D(-30.0, 30.0, 1024)
    u = np.exp(-((g.x - 1.0) ** 2))
    v = np.exp(-((g.x + 2.0) ** 2) / 2.0)
    lu = apply_integral(u, ZERO_FAR_FIELD, g)
    lv = apply_integral(v, ZERO_FAR_FIELD, g)
    pair_uv = float(np.dot(lu, v)) * g.h
    pair_vu = float(np.dot(u, lv)) * g.h
    assert abs(pair_uv - pair_vu) < 1e-8


def test_oracle_error_shrinks_under_joint_refinement():
    # refining h and widening the domain together drives both the
    # quadrature and the far-field model error down
    errs = []
    for (L, n) in ((20.0, 256), (40.0, 1024), (80.0, 4096)):
        g = Grid1D(-L, L, n)
        lp = exact_pn_layer(1.0, g)
        out = apply_integral(lp.phi, LAYER_FAR_FIELD, g)
        mask = np.abs(g.x) <= 10.0
        errs.append(np.abs(out - closed_form(g.x))[mask].max())
    assert errs[0] > errs[1] > errs[2]


def test_cross_validate_exact_layer(grid40, layer40):
    rep = cross_validate(layer40.phi, LAYER_FAR_FIELD, grid40)
    assert rep.max_discrepancy < 1e-3
    assert rep.reference_a == pytest.approx(1.0, abs=0.05)


def test_cross_validate_constant_is_exact():
    g = Grid1D(-10.0, 10.0, 256)
    rep = cross_validate(np.full(g.n, 0.7), FarField(0.7, 0.7), g)
    assert rep.max_discrepancy < 1e-12


def test_cross_validate_periodic_cos():
    # spectral side is exact on the resolved mode; the discrepancy is the
    # integral path's quadrature plus constant-extension error
    g = Grid1D(-40.0, 40.0, 4096)
    k = 2 * np.pi * 4 / (g.span + g.h)
    w = np.cos(k * (g.x - g.x[0]))
    rep = cross_validate(w, FarField(0.0, 0.0), g)
    assert rep.max_discrepancy < 2e-3
