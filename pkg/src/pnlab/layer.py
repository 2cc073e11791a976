"""Transition layers: the monotone profile joining 0 to 1.

The profile solves L phi = W'(phi) with phi(-inf) = 0, phi(0) = 1/2,
phi(+inf) = 1.  For the single-harmonic potential the solution is the
arctan layer

    phi_a(x) = arctan(x/a)/pi + 1/2,        a = 1/alpha,

with derivative a/(pi (x^2 + a^2)) and mobility gamma = 2 pi a.  For a
general admissible potential the profile is found by relaxing the
gradient flow  phi_tau = L phi - W'(phi)  to its fixed point, with the
translation degree of freedom pinned by recentering the interpolated
half level to x = 0.

Truncation to a finite grid is handled in two pieces: beyond the grid
the operator sees the constant far field (0, 1); inside the grid an
outer band |x| > free_fraction * x_edge is held on the universal tail

    phi ~ H(x) - 1/(alpha pi x),

which every admissible layer obeys, so the relaxed interior sees
boundary data accurate to O(1/x^2) instead of the O(1/x) error a bare
constant extension would give.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import lu_factor, lu_solve

from .operators import LAYER_FAR_FIELD, Grid1D, HalfLaplacian
from .potentials import PotentialSpec, validate_assumption_a


class LayerSolveError(RuntimeError):
    """Relaxation failed to converge; carries the last residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class MonotonicityError(LayerSolveError):
    """A relaxation step lost strict monotonicity (grid too coarse)."""


@dataclass(frozen=True)
class LayerProfile:
    """Sampled layer with derivative, mobility, and tail metadata."""

    grid: Grid1D
    phi: np.ndarray
    dphi: np.ndarray
    gamma: float
    alpha: float
    tail_window: tuple
    residual_sup: Optional[float] = None

    def interpolator(self):
        """Cubic evaluation of phi anywhere, with the analytic tail outside."""
        spline = CubicSpline(self.grid.x, self.phi)
        alpha = self.alpha
        lo, hi = self.grid.x_min, self.grid.x_max

        def ev(y):
            y = np.asarray(y, dtype=float)
            inside = (y >= lo) & (y <= hi)
            out = tail_model(y, alpha)
            out = np.where(inside, spline(np.clip(y, lo, hi)), out)
            return out

        return ev

    def derivative_interpolator(self):
        spline = CubicSpline(self.grid.x, self.dphi)
        alpha = self.alpha
        lo, hi = self.grid.x_min, self.grid.x_max

        def ev(y):
            y = np.asarray(y, dtype=float)
            inside = (y >= lo) & (y <= hi)
            tail = 1.0 / (alpha * np.pi * np.maximum(y * y, 1e-30))
            return np.where(inside, spline(np.clip(y, lo, hi)), tail)

        return ev


def tail_model(x, alpha: float) -> np.ndarray:
    """Far-field asymptote H(x) - 1/(alpha pi x)."""
    x = np.asarray(x, dtype=float)
    safe = np.where(x == 0.0, 1.0, x)
    t = 1.0 / (alpha * np.pi * safe)
    return np.where(x > 0, 1.0 - t, -t)


def default_tail_window(grid: Grid1D) -> tuple:
    hi = 0.5 * min(abs(grid.x_min), abs(grid.x_max))
    lo = max(1.0, 0.25 * hi)
    return (lo, hi)


def exact_pn_layer(a: float, grid: Grid1D) -> LayerProfile:
    """Closed-form arctan layer for the single-harmonic potential."""
    if not a > 0:
        raise ValueError(f"parameter a must be positive, got {a}")
    x = grid.x
    phi = np.arctan(x / a) / np.pi + 0.5
    dphi = a / (np.pi * (x * x + a * a))
    return LayerProfile(grid=grid, phi=phi, dphi=dphi, gamma=2 * np.pi * a,
                        alpha=1.0 / a, tail_window=default_tail_window(grid))


def derivative4(values, h: float) -> np.ndarray:
    """Fourth-order centered differences; second-order one-sided at edges."""
    f = np.asarray(values, dtype=float)
    d = np.empty_like(f)
    d[2:-2] = (-f[4:] + 8 * f[3:-1] - 8 * f[1:-3] + f[:-4]) / (12 * h)
    d[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
    d[1] = (f[2] - f[0]) / (2 * h)
    d[-2] = (f[-1] - f[-3]) / (2 * h)
    d[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
    return d


def mobility(dphi, grid: Grid1D, alpha: float) -> float:
    """gamma = 1 / int (phi')^2, trapezoid plus the analytic tail mass.

    The tail uses the universal decay phi' ~ 1/(alpha pi x^2), whose
    squared integral beyond X is 1/(3 (alpha pi)^2 X^3) per side.
    """
    dphi = np.asarray(dphi, dtype=float)
    i2 = float(np.trapezoid(dphi * dphi, dx=grid.h))
    c = 1.0 / (alpha * np.pi) ** 2 / 3.0
    i2 += c / abs(grid.x_min) ** 3 + c / grid.x_max ** 3
    return 1.0 / i2


@dataclass
class RelaxationOptions:
    """Knobs for the gradient-flow relaxation."""

    tol: float = 1e-8
    max_steps: int = 20000
    scheme: str = "semi-implicit"   # or "explicit"
    tau: Optional[float] = None
    free_fraction: float = 0.5
    recenter_threshold: float = 0.05  # recenter when |shift| > threshold * h


def _recenter(x, phi, band, alpha, threshold_h):
    """Shift so the interpolated half level sits at x = 0."""
    idx = np.nonzero(phi >= 0.5)[0]
    if idx.size == 0 or idx[0] == 0:
        raise LayerSolveError("profile has no interior half-level crossing")
    j = idx[0]
    xc = x[j - 1] + (0.5 - phi[j - 1]) / (phi[j] - phi[j - 1]) * (x[j] - x[j - 1])
    if abs(xc) <= threshold_h:
        return phi, xc
    spline = CubicSpline(x, phi)
    shifted = np.where((x + xc >= x[0]) & (x + xc <= x[-1]),
                       spline(np.clip(x + xc, x[0], x[-1])),
                       tail_model(x + xc, alpha))
    shifted[band] = tail_model(x[band], alpha)
    return shifted, xc


def solve_layer(p: PotentialSpec, grid: Grid1D,
                opts: Optional[RelaxationOptions] = None,
                initial: Optional[LayerProfile] = None) -> LayerProfile:
    """Relax phi_tau = L phi - W'(phi) to the layer profile.

    The residual is measured on the free region; the outer band follows
    the tail asymptote (see module docstring).  Raises LayerSolveError
    on non-convergence and MonotonicityError if an accepted step loses
    strict monotonicity.
    """
    opts = opts or RelaxationOptions()
    report = validate_assumption_a(p)
    if not report.passed:
        bad = [c.name for c in report.clauses if not c.passed]
        raise ValueError(f"potential fails well assumptions: {bad}")
    if not (grid.x_min < 0 < grid.x_max):
        raise ValueError("layer grid must straddle x = 0")
    edge = min(abs(grid.x_min), abs(grid.x_max))
    if 1.0 / (p.alpha * np.pi * edge) >= 0.05:
        raise ValueError(
            f"grid too narrow: tail mass 1/(alpha pi x_edge) = "
            f"{1.0 / (p.alpha * np.pi * edge):.3f} >= 0.05")

    x, h, n = grid.x, grid.h, grid.n
    op = HalfLaplacian(grid)
    free = np.abs(x) <= opts.free_fraction * edge
    band = ~free

    if initial is not None:
        if initial.grid != grid:
            initial = resample_layer(initial, grid)
        phi = np.array(initial.phi, dtype=float, copy=True)
    else:
        phi = np.arctan(x * p.alpha) / np.pi + 0.5

    w2sup = p.w2_sup()
    if opts.scheme == "explicit":
        tau = opts.tau or 0.5 / (w2sup + np.pi / h)
    elif opts.scheme == "semi-implicit":
        tau = opts.tau or 0.45 / w2sup
    else:
        raise ValueError(f"unknown relaxation scheme {opts.scheme!r}")

    def factorize(tau_val):
        b = np.eye(n) - tau_val * op.dense_matrix()
        b[band, :] = 0.0
        b[band, band] = 1.0
        return lu_factor(b)

    lu = factorize(tau) if opts.scheme == "semi-implicit" else None
    far_terms = op.far_field_right  # c_left = 0, c_right = 1
    res = op.apply(phi, LAYER_FAR_FIELD) - p.w1(phi)
    residual = float(np.abs(res[free]).max())
    if residual >= opts.tol:
        # outer band follows the asymptote from the first step onward
        phi[band] = tail_model(x[band], p.alpha)
        steps = 0
        rejections = 0
        while True:
            if opts.scheme == "explicit":
                res = op.apply(phi, LAYER_FAR_FIELD) - p.w1(phi)
                cand = phi + tau * res
            else:
                rhs = phi + tau * (far_terms - p.w1(phi))
                rhs[band] = phi[band]
                cand = lu_solve(lu, rhs)
            cand[band] = tail_model(x[band], p.alpha)
            cand, _ = _recenter(x, cand, band, p.alpha,
                                opts.recenter_threshold * h)
            if np.any(np.diff(cand) <= 0):
                rejections += 1
                if rejections > 8:
                    raise MonotonicityError(
                        "relaxation keeps losing monotonicity "
                        "(grid too coarse)", residual=residual)
                tau *= 0.5
                if opts.scheme == "semi-implicit":
                    lu = factorize(tau)
                continue
            phi = cand
            steps += 1
            res = op.apply(phi, LAYER_FAR_FIELD) - p.w1(phi)
            residual = float(np.abs(res[free]).max())
            if residual < opts.tol:
                break
            if steps >= opts.max_steps:
                raise LayerSolveError(
                    f"no convergence in {opts.max_steps} steps "
                    f"(residual {residual:.3e} > tol {opts.tol:.3e})",
                    residual=residual)

    dphi = derivative4(phi, h)
    gamma = mobility(dphi, grid, p.alpha)
    return LayerProfile(grid=grid, phi=phi, dphi=dphi, gamma=gamma,
                        alpha=p.alpha, tail_window=default_tail_window(grid),
                        residual_sup=residual)


def layer_residual(lp: LayerProfile, p: PotentialSpec,
                   interior_fraction: float = 0.8) -> float:
    """Sup of |L phi - W'(phi)| over the interior fraction of the grid."""
    op = HalfLaplacian(lp.grid)
    res = op.apply(lp.phi, LAYER_FAR_FIELD) - p.w1(lp.phi)
    edge = min(abs(lp.grid.x_min), abs(lp.grid.x_max))
    mask = np.abs(lp.grid.x) <= interior_fraction * edge
    return float(np.abs(res[mask]).max())


def resample_layer(lp: LayerProfile, grid: Grid1D) -> LayerProfile:
    """Evaluate a solved profile on another grid (tail model outside)."""
    phi = lp.interpolator()(grid.x)
    dphi = derivative4(phi, grid.h)
    gamma = mobility(dphi, grid, lp.alpha)
    return LayerProfile(grid=grid, phi=phi, dphi=dphi, gamma=gamma,
                        alpha=lp.alpha, tail_window=default_tail_window(grid),
                        residual_sup=None)


@dataclass(frozen=True)
class TailReport:
    """Decay diagnostics for phi - H + 1/(alpha pi x) on the tail window.

    sup_x2_weighted bounds the remainder against the proven C/x^2
    envelope; tail_constant is the cube-weighted value at the window
    edge, which for symmetric wells converges to a finite limit
    (1/(3 pi) for the arctan layer).  bounded fails when the weighted
    remainder grows outward, e.g. for data with the wrong far field.
    """

    window: tuple
    sup_x2_weighted: float
    tail_constant: float
    cube_ratio: float
    bounded: bool


def check_asymptotics(lp: LayerProfile, window: Optional[tuple] = None) -> TailReport:
    window = window or lp.tail_window
    lo, hi = window
    if not (0 < lo < hi <= max(abs(lp.grid.x_min), lp.grid.x_max)):
        raise ValueError(f"bad tail window {window}")
    x = lp.grid.x
    mask = (np.abs(x) >= lo) & (np.abs(x) <= hi)
    if not np.any(mask):
        raise ValueError("tail window contains no grid nodes")
    xs = x[mask]
    r = np.abs(lp.phi[mask] - np.heaviside(xs, 0.5)
               + 1.0 / (lp.alpha * np.pi * xs))
    x2r = xs * xs * r
    x3r = np.abs(xs) ** 3 * r
    at_hi = float(x3r[np.argmax(np.abs(xs))])
    cube_ratio = float(x3r.max() / max(at_hi, 1e-300))
    inner = np.abs(xs) <= 0.5 * (lo + hi)
    grow = float(x2r[~inner].max()) > 2.0 * float(x2r[inner].max() + 1e-300)
    return TailReport(window=(lo, hi),
                      sup_x2_weighted=float(x2r.max()),
                      tail_constant=at_hi,
                      cube_ratio=cube_ratio,
                      bounded=not grow)
