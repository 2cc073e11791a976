"""1-periodic multi-well potentials and exterior stress fields.

A potential is supplied as the triple (W, W', W'') rather than W alone:
the stiff reaction term divides W' by epsilon^2, and numerically
differentiating W would throw away accuracy exactly where it matters.

The built-in family has W''(v) = sum_m c_m cos(2 pi m v) with
nonnegative coefficients; its single-harmonic member is the classical
sine-Gordon-type well

    W(v) = (1 - cos 2 pi v) / (4 pi^2 a),

whose transition layer is known in closed form (see layer.py).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class PotentialSpec:
    """Periodic potential with derivatives and its well curvature alpha = W''(0)."""

    w: Callable
    w1: Callable
    w2: Callable
    alpha: float
    period: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha = W''(0) must be positive")

    def w2_sup(self, samples: int = 257) -> float:
        """Sampled sup of |W''| over one period (used for step-size bounds)."""
        v = np.linspace(0.0, self.period, samples)
        return float(np.abs(self.w2(v)).max())


def make_pn_potential(a: float) -> PotentialSpec:
    """Single-harmonic well with curvature alpha = 1/a.

    W(t) = (1 - cos 2 pi t)/(4 pi^2 a); W'(t) = sin(2 pi t)/(2 pi a);
    W''(t) = cos(2 pi t)/a.
    """
    if not a > 0:
        raise ValueError(f"parameter a must be positive, got {a}")

    def w(v):
        return (1.0 - np.cos(2 * np.pi * np.asarray(v, float))) / (4 * np.pi**2 * a)

    def w1(v):
        return np.sin(2 * np.pi * np.asarray(v, float)) / (2 * np.pi * a)

    def w2(v):
        return np.cos(2 * np.pi * np.asarray(v, float)) / a

    return PotentialSpec(w=w, w1=w1, w2=w2, alpha=1.0 / a)


def make_cosine_potential(coeffs) -> PotentialSpec:
    """Potential with W''(v) = sum_m c_m cos(2 pi m v), m = 1..len(coeffs).

    All c_m >= 0 with c_1 > 0 guarantees the well assumptions: W is
    1-periodic, vanishes exactly on the integers, is positive off them,
    and has alpha = sum_m c_m > 0.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("need a 1D sequence of cosine coefficients")
    if c[0] <= 0 or np.any(c < 0):
        raise ValueError("coefficients must be nonnegative with c_1 > 0")
    m = np.arange(1, c.size + 1, dtype=float)

    def w(v):
        ph = 2 * np.pi * np.multiply.outer(m, np.asarray(v, float))
        return np.tensordot(c / (2 * np.pi * m) ** 2, 1.0 - np.cos(ph), axes=1)

    def w1(v):
        ph = 2 * np.pi * np.multiply.outer(m, np.asarray(v, float))
        return np.tensordot(c / (2 * np.pi * m), np.sin(ph), axes=1)

    def w2(v):
        ph = 2 * np.pi * np.multiply.outer(m, np.asarray(v, float))
        return np.tensordot(c, np.cos(ph), axes=1)

    return PotentialSpec(w=w, w1=w1, w2=w2, alpha=float(c.sum()))


def tabulated_potential(values) -> PotentialSpec:
    """Potential from samples of W on a uniform grid over one period.

    Derivatives come from trigonometric interpolation, so the table
    should sample a smooth periodic function (endpoint not repeated).
    """
    vals = np.asarray(values, dtype=float)
    if vals.ndim != 1 or vals.size < 8:
        raise ValueError("need at least 8 samples of W over one period")
    n = vals.size
    what = np.fft.rfft(vals) / n
    kk = np.arange(what.size, dtype=float)

    scale = np.where(kk > 0, 2.0, 1.0)  # one-sided spectrum folding

    def series(factors):
        coeff = what * factors

        def f(v):
            ph = np.multiply.outer(2 * np.pi * kk, np.asarray(v, float))
            return np.tensordot(scale * coeff.real, np.cos(ph), axes=1) - \
                np.tensordot(scale * coeff.imag, np.sin(ph), axes=1)

        return f

    w = series(np.ones_like(kk))
    w1_f = series(2 * np.pi * kk * 1j)
    w2_f = series(-((2 * np.pi * kk) ** 2))
    alpha = float(w2_f(0.0))
    return PotentialSpec(w=w, w1=w1_f, w2=w2_f, alpha=alpha)


@dataclass(frozen=True)
class ClauseCheck:
    name: str
    passed: bool
    worst: float


@dataclass(frozen=True)
class AssumptionReport:
    """Per-clause validation of the periodic-well assumptions (sampled)."""

    clauses: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    def worst(self, name: str) -> float:
        for c in self.clauses:
            if c.name == name:
                return c.worst
        raise KeyError(name)


def validate_assumption_a(p: PotentialSpec, samples=None, tol: float = 1e-10,
                          fd_tol: float = 1e-5) -> AssumptionReport:
    """Sampled check of the well assumptions on [-2, 2].

    Clauses: periodicity W(v+1) = W(v); W = 0 and W' = 0 on the
    integers; W > 0 off the integers; alpha > 0 and alpha consistent
    with a centered finite-difference estimate of W''(0).
    """
    if samples is None:
        samples = np.linspace(-2.0, 2.0, 1601)
    samples = np.asarray(samples, dtype=float)
    wv = np.asarray(p.w(samples), dtype=float)
    per = float(np.abs(np.asarray(p.w(samples + 1.0)) - wv).max())
    ints = np.arange(-2, 3, dtype=float)
    zero_w = float(np.abs(np.asarray(p.w(ints))).max())
    zero_w1 = float(np.abs(np.asarray(p.w1(ints))).max())
    off = samples[np.abs(samples - np.round(samples)) > 1e-3]
    wmin = float(np.asarray(p.w(off)).min()) if off.size else np.inf
    h = 1e-4
    fd = (float(p.w(h)) - 2 * float(p.w(0.0)) + float(p.w(-h))) / (h * h)
    alpha_dev = abs(fd - p.alpha) / max(abs(p.alpha), 1.0)
    clauses = (
        ClauseCheck("periodicity", per <= tol, per),
        ClauseCheck("zero_on_integers", zero_w <= tol, zero_w),
        ClauseCheck("critical_on_integers", zero_w1 <= tol, zero_w1),
        ClauseCheck("positive_off_integers", wmin > 0.0, wmin),
        ClauseCheck("alpha_positive", p.alpha > 0.0, p.alpha),
        ClauseCheck("alpha_matches_w2", alpha_dev <= fd_tol, alpha_dev),
    )
    return AssumptionReport(clauses=clauses)


@dataclass(frozen=True)
class StressField:
    """Exterior stress sigma(t, x) with its space Lipschitz bound."""

    sigma: Callable
    lipschitz_k: float
    kind: str = "custom"

    def __post_init__(self):
        if self.lipschitz_k < 0:
            raise ValueError("Lipschitz bound must be nonnegative")

    def __call__(self, t, x):
        return self.sigma(t, x)


def zero_stress() -> StressField:
    return StressField(sigma=lambda t, x: np.zeros_like(np.asarray(x, float)),
                       lipschitz_k=0.0, kind="zero")


def constant_stress(s: float) -> StressField:
    return StressField(sigma=lambda t, x: np.full_like(np.asarray(x, float), s),
                       lipschitz_k=0.0, kind="constant")


def affine_stress(offset: float, slope: float) -> StressField:
    return StressField(sigma=lambda t, x: offset + slope * np.asarray(x, float),
                       lipschitz_k=abs(slope), kind="affine")


def table_stress(xs, values, lipschitz_k: float | None = None) -> StressField:
    """Time-independent stress from linear interpolation of a table.

    Constant extrapolation beyond the table; the Lipschitz bound
    defaults to the steepest table slope.
    """
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    if xs.shape != values.shape or xs.ndim != 1 or xs.size < 2:
        raise ValueError("need matching 1D tables with at least 2 points")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("table abscissae must be strictly increasing")
    if lipschitz_k is None:
        lipschitz_k = float(np.abs(np.diff(values) / np.diff(xs)).max())
    return StressField(
        sigma=lambda t, x: np.interp(np.asarray(x, float), xs, values),
        lipschitz_k=lipschitz_k, kind="table")


def shifted_stress(stress: StressField, delta: float) -> StressField:
    """sigma + delta (constant shift keeps the Lipschitz bound)."""
    return StressField(sigma=lambda t, x: stress.sigma(t, x) + delta,
                       lipschitz_k=stress.lipschitz_k, kind=stress.kind)


def probe_stress_bounds(stress: StressField, ts, xs) -> tuple[float, float]:
    """(sup |sigma|, worst Lipschitz quotient) over sampled probes."""
    ts = np.asarray(ts, dtype=float)
    xs = np.asarray(xs, dtype=float)
    sup = 0.0
    worst = 0.0
    for t in ts:
        v = np.asarray(stress.sigma(t, xs), dtype=float)
        sup = max(sup, float(np.abs(v).max()))
        q = np.abs(np.diff(v)) / np.diff(xs)
        worst = max(worst, float(q.max()))
    return sup, worst
