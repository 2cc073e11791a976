import numpy as np
import pytest

from pnlab import (PotentialSpec, make_cosine_potential, make_pn_potential,
                   tabulated_potential, validate_assumption_a, zero_stress,
                   constant_stress, affine_stress, table_stress,
                   shifted_stress)
from pnlab.potentials import probe_stress_bounds


def test_pn_w1_at_half_is_zero():
    p = make_pn_potential(1.0)
    assert p.w1(0.5) == pytest.approx(0.0, abs=1e-15)


def test_pn_alpha_is_inverse_a():
    for a in (0.5, 1.0, 2.0, 3.7):
        p = make_pn_potential(a)
        assert p.alpha * a == pytest.approx(1.0, abs=1e-15)


def test_pn_well_depth():
    # antiderivative of W' with W(0) = 0 gives W(1/2) = 1/(2 pi^2 a)
    p = make_pn_potential(1.0)
    assert float(p.w(0.5)) == pytest.approx(0.05066059182116889, abs=1e-15)


def test_pn_rejects_nonpositive_a():
    with pytest.raises(ValueError):
        make_pn_potential(0.0)
    with pytest.raises(ValueError):
        make_pn_potential(-2.0)


def test_periodicity_on_fine_grid(pn1, two_harmonic):
    v = np.linspace(-2.0, 2.0, 4001)
    for p in (pn1, two_harmonic):
        assert np.abs(p.w(v + 1.0) - p.w(v)).max() < 1e-15


def test_derivative_consistency(pn1, two_harmonic, rng):
    # centered finite differences of W match W' and W'' to O(h^2)
    h = 1e-5
    v = rng.uniform(-2, 2, size=64)
    for p in (pn1, two_harmonic):
        fd1 = (p.w(v + h) - p.w(v - h)) / (2 * h)
        fd2 = (p.w(v + h) - 2 * p.w(v) + p.w(v - h)) / (h * h)
        assert np.abs(fd1 - p.w1(v)).max() < 1e-8
        assert np.abs(fd2 - p.w2(v)).max() < 1e-5


def test_validate_pn_passes(pn1):
    report = validate_assumption_a(pn1, np.linspace(-2, 2, 1000))
    assert report.passed
    assert report.worst("periodicity") < 1e-12


def test_validate_flat_potential_fails_positivity():
    zero = lambda v: np.zeros_like(np.asarray(v, float))
    p = PotentialSpec(w=zero, w1=zero, w2=zero, alpha=1.0)
    report = validate_assumption_a(p)
    assert not report.passed
    clause = {c.name: c.passed for c in report.clauses}
    assert not clause["positive_off_integers"]


def test_validate_shifted_well_fails_zero_clause():
    base = make_pn_potential(1.0)
    p = PotentialSpec(w=lambda v: base.w(v) + 0.1, w1=base.w1, w2=base.w2,
                      alpha=1.0)
    report = validate_assumption_a(p)
    clause = {c.name: c.passed for c in report.clauses}
    assert not clause["zero_on_integers"]


def test_cosine_potential_alpha_is_coefficient_sum():
    p = make_cosine_potential([1.0, 0.5, 0.25])
    assert p.alpha == pytest.approx(1.75, abs=1e-15)
    assert validate_assumption_a(p).passed


def test_cosine_potential_rejects_bad_coefficients():
    with pytest.raises(ValueError):
        make_cosine_potential([0.0, 1.0])
    with pytest.raises(ValueError):
        make_cosine_potential([1.0, -0.1])


def test_tabulated_potential_roundtrip(pn1):
    v = np.arange(256) / 256.0
    p = tabulated_potential(pn1.w(v))
    assert p.alpha == pytest.approx(1.0, rel=1e-8)
    u = np.linspace(-1.0, 2.0, 301)
    assert np.abs(p.w(u) - pn1.w(u)).max() < 1e-10
    assert np.abs(p.w1(u) - pn1.w1(u)).max() < 1e-8
    assert validate_assumption_a(p, tol=1e-8).passed


def test_stress_constructors_and_probes():
    xs = np.linspace(-5, 5, 201)
    ts = [0.0, 0.7]
    sup, worst = probe_stress_bounds(zero_stress(), ts, xs)
    assert sup == 0.0 and worst == 0.0
    sup, worst = probe_stress_bounds(constant_stress(0.3), ts, xs)
    assert sup == pytest.approx(0.3) and worst < 1e-14
    st = affine_stress(0.1, 0.25)
    sup, worst = probe_stress_bounds(st, ts, xs)
    assert worst <= st.lipschitz_k + 1e-12
    tab = table_stress([-1.0, 0.0, 2.0], [0.0, 0.5, 0.5])
    assert tab.lipschitz_k == pytest.approx(0.5)
    sup, worst = probe_stress_bounds(tab, ts, xs)
    assert worst <= tab.lipschitz_k + 1e-12


def test_shifted_stress_keeps_lipschitz_bound():
    st = affine_stress(0.0, 0.2)
    sh = shifted_stress(st, 0.1)
    assert sh.lipschitz_k == st.lipschitz_k
    assert float(sh.sigma(0.0, 1.0)) == pytest.approx(0.3)


def test_stress_rejects_negative_lipschitz():
    from pnlab import StressField
    with pytest.raises(ValueError):
        StressField(sigma=lambda t, x: x, lipschitz_k=-1.0)
