import numpy as np
import pytest

from pnlab import (Grid1D, LayerSolveError, RelaxationOptions,
                   check_asymptotics, exact_pn_layer, layer_residual,
                   make_pn_potential, mobility, resample_layer, solve_layer,
                   tail_model)
from pnlab.layer import LayerProfile, derivative4


def node_grid(x_min=-40.0, x_max=40.0, h=0.02):
    # grid whose nodes land on round coordinates (0, 1, ...)
    n = int(round((x_max - x_min) / h)) + 1
    return Grid1D(x_min, x_max, n)


def test_exact_layer_values():
    g = node_grid()
    lp = exact_pn_layer(1.0, g)
    j0 = np.argmin(np.abs(g.x))
    j1 = np.argmin(np.abs(g.x - 1.0))
    assert g.x[j0] == pytest.approx(0.0, abs=1e-12)
    assert lp.phi[j0] == pytest.approx(0.5, abs=1e-14)
    assert lp.phi[j1] == pytest.approx(0.75, abs=1e-14)
    assert lp.gamma == pytest.approx(2 * np.pi, abs=1e-14)
    assert np.all(lp.dphi > 0)


def test_exact_layer_derivative_closed_form():
    g = node_grid()
    lp = exact_pn_layer(2.0, g)
    expect = 2.0 / (np.pi * (g.x ** 2 + 4.0))
    assert np.abs(lp.dphi - expect).max() < 1e-15


def test_mobility_quadrature_accuracy():
    # trapezoid plus analytic tail against gamma = 2 pi a
    for a in (1.0, 2.0):
        g = Grid1D(-40.0, 40.0, 4096)
        lp = exact_pn_layer(a, g)
        gamma_q = mobility(lp.dphi, g, 1.0 / a)
        assert abs(gamma_q - 2 * np.pi * a) / (2 * np.pi * a) < 0.01


def test_derivative4_is_fourth_order():
    errs = []
    for n in (64, 128):
        x = np.linspace(-1, 1, n)
        d = derivative4(np.sin(3 * x), x[1] - x[0])
        errs.append(np.abs(d - 3 * np.cos(3 * x))[4:-4].max())
    assert errs[0] / errs[1] > 12


def test_solve_layer_immediate_exit_returns_input(pn1):
    g = Grid1D(-60.0, 60.0, 1536)
    exact = exact_pn_layer(1.0, g)
    lp = solve_layer(pn1, g, RelaxationOptions(tol=2e-3), initial=exact)
    assert np.abs(lp.phi - exact.phi).max() < 1e-10


def test_solve_layer_converges_from_perturbed_guess(pn1):
    g = Grid1D(-60.0, 60.0, 1536)
    lp = solve_layer(pn1, g, initial=exact_pn_layer(2.0, g))
    exact = exact_pn_layer(1.0, g)
    assert np.abs(lp.phi - exact.phi).max() < 1e-4
    assert abs(lp.gamma - 2 * np.pi) / (2 * np.pi) < 0.01
    assert np.all(np.diff(lp.phi) > 0)
    assert lp.residual_sup < 1e-8


def test_solve_layer_explicit_scheme_agrees(pn1):
    g = Grid1D(-30.0, 30.0, 768)
    imex = solve_layer(pn1, g, RelaxationOptions(tol=1e-7))
    expl = solve_layer(pn1, g, RelaxationOptions(tol=1e-7, scheme="explicit",
                                                 max_steps=100000))
    assert np.abs(imex.phi - expl.phi).max() < 1e-6


def test_solve_layer_narrow_grid_precondition(pn1):
    with pytest.raises(ValueError, match="narrow"):
        solve_layer(pn1, Grid1D(-5.0, 5.0, 128))


def test_solve_layer_two_harmonic(two_harmonic):
    g = Grid1D(-40.0, 40.0, 1024)
    lp = solve_layer(two_harmonic, g)
    assert np.all(np.diff(lp.phi) > 0)
    assert lp.residual_sup < 1e-8
    # half level at the origin
    j = np.argmax(lp.phi >= 0.5)
    xc = g.x[j - 1] + (0.5 - lp.phi[j - 1]) / (lp.phi[j] - lp.phi[j - 1]) * g.h
    assert abs(xc) < 1e-9


def test_translation_covariance(pn1):
    # solving on an asymmetric grid and recentering gives the same profile
    g_sym = Grid1D(-45.0, 45.0, 1152)
    g_shift = Grid1D(-40.0, 50.0, 1152)
    lp_sym = solve_layer(pn1, g_sym, RelaxationOptions(tol=1e-9))
    lp_shift = solve_layer(pn1, g_shift, RelaxationOptions(tol=1e-9))
    xs = np.linspace(-15.0, 15.0, 401)
    diff = lp_sym.interpolator()(xs) - lp_shift.interpolator()(xs)
    assert np.abs(diff).max() < 5e-5


def test_derivative_two_sided_bound(pn1):
    g = Grid1D(-60.0, 60.0, 1536)
    lp = solve_layer(pn1, g)
    half = np.abs(g.x) <= 30.0
    weighted = (1.0 + g.x[half] ** 2) * lp.dphi[half]
    assert weighted.min() > 0.05
    assert weighted.max() < 10.0


def test_residual_diagnostic_small_inside_free_region(pn1):
    g = Grid1D(-60.0, 60.0, 1536)
    lp = solve_layer(pn1, g)
    assert layer_residual(lp, pn1, interior_fraction=0.45) < 1e-7


def test_tail_report_exact_layer():
    g = Grid1D(-40.0, 40.0, 4096)
    lp = exact_pn_layer(1.0, g)
    rep = check_asymptotics(lp, window=(5.0, 20.0))
    # remainder at x = 10 (closed form, frozen)
    j = np.argmin(np.abs(g.x - 10.0))
    r10 = abs(lp.phi[j] - 1.0 + 1.0 / (np.pi * g.x[j]))
    assert r10 == pytest.approx(1.0547e-4, rel=1e-2)
    # cube-weighted constant approaches 1/(3 pi)
    assert rep.tail_constant == pytest.approx(1.0 / (3 * np.pi), rel=0.1)
    assert rep.cube_ratio < 3.0
    assert rep.bounded


def test_tail_report_flags_constant_profile():
    g = Grid1D(-40.0, 40.0, 1024)
    fake = LayerProfile(grid=g, phi=np.full(g.n, 0.5),
                        dphi=np.zeros(g.n), gamma=1.0, alpha=1.0,
                        tail_window=(5.0, 20.0))
    rep = check_asymptotics(fake)
    assert not rep.bounded


def test_tail_model_matches_exact_tail():
    x = np.array([-30.0, -10.0, 10.0, 30.0])
    exact = np.arctan(x) / np.pi + 0.5
    assert np.abs(tail_model(x, 1.0) - exact).max() < 1e-3


def test_resample_layer_roundtrip(pn1):
    g = Grid1D(-40.0, 40.0, 2048)
    lp = exact_pn_layer(1.0, g)
    g2 = Grid1D(-30.0, 30.0, 1024)
    lp2 = resample_layer(lp, g2)
    exact2 = exact_pn_layer(1.0, g2)
    assert np.abs(lp2.phi - exact2.phi).max() < 1e-9


def test_nonconvergence_raises_with_residual(pn1):
    g = Grid1D(-60.0, 60.0, 1536)
    with pytest.raises(LayerSolveError) as exc:
        solve_layer(pn1, g, RelaxationOptions(tol=1e-13, max_steps=3),
                    initial=exact_pn_layer(2.0, g))
    assert exc.value.residual is not None and exc.value.residual > 0
