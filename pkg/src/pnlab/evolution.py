"""Rescaled nonlocal reaction-diffusion evolution and its diagnostics.

    v_t = (1/eps) { L v - (1/eps) W'(v) + sigma(t, x) }

Time stepping is IMEX Euler: the nonlocal term is implicit (one dense
LU per evolver, unconditionally stable), the stiff reaction and the
stress are explicit with dt <= dt_factor * eps^2 / sup|W''|.  With
dt_factor <= 0.1 the explicit reaction map stays monotone, so the
scheme inherits the comparison principle: ordered initial fields stay
ordered to rounding.

The two far-field values ride along as spatially constant states of the
same equation (L of a constant vanishes), which keeps them pinned at
integers when sigma decays and at the quasi-equilibrium
integer + eps sigma / W''(0) for constant sigma.

The first-order splitting biases the effective layer mobility by
O(dt / eps^2) relative terms; convergence studies against the particle
ODE should use dt_factor ~ 0.02 so the bias sits well below the O(eps)
physics being measured.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .corrector import CorrectorProfile
from .layer import LayerProfile
from .operators import FarField, Grid1D, HalfLaplacian
from .particles import ParticleTrajectory
from .potentials import PotentialSpec, StressField


class TrackingLostError(RuntimeError):
    """Fewer level crossings than layers; the field lost its staircase."""


class StabilityError(RuntimeError):
    """Field left the admissible range after a step (time step too large)."""


@dataclass(frozen=True)
class FieldState:
    grid: Grid1D
    v: np.ndarray
    t: float
    eps: float
    far: FarField

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        v = np.asarray(self.v, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError("field shape does not match grid")
        object.__setattr__(self, "v", v)


def build_initial(lp: LayerProfile, p: PotentialSpec, stress: StressField,
                  x0, eps: float, grid: Grid1D,
                  margin_fraction: float = 0.1) -> FieldState:
    """Prepared initial data: stress offset plus one layer per particle.

    v(x) = (eps/alpha) sigma(0, x) + sum_i phi((x - x_i)/eps), with phi
    evaluated through the profile interpolant and its analytic tail.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if np.any(np.diff(x0) <= 0):
        raise ValueError("initial positions must be strictly increasing")
    if grid.h > eps / 8:
        raise ValueError(
            f"grid does not resolve eps: h = {grid.h:.4g} > eps/8 = {eps / 8:.4g}")
    margin = margin_fraction * grid.span
    if x0.min() < grid.x_min + margin or x0.max() > grid.x_max - margin:
        raise ValueError("initial positions too close to the grid boundary")
    phi = lp.interpolator()
    x = grid.x
    v = (eps / p.alpha) * np.asarray(stress.sigma(0.0, x), dtype=float)
    for xi in x0:
        v = v + phi((x - xi) / eps)
    n_layers = x0.size
    sig_l = float(np.asarray(stress.sigma(0.0, grid.x_min)).ravel()[0])
    sig_r = float(np.asarray(stress.sigma(0.0, grid.x_max)).ravel()[0])
    far = FarField((eps / p.alpha) * sig_l, n_layers + (eps / p.alpha) * sig_r)
    return FieldState(grid=grid, v=v, t=0.0, eps=eps, far=far)


class Evolver:
    """IMEX stepper bound to one (grid, potential, eps, dt) combination.

    operator="integral" uses the singular-integral discretization with
    far-field coupling (the default for layer-shaped data);
    operator="spectral" treats the samples as one period and steps each
    Fourier mode implicitly (periodic problems and decay tests).
    """

    def __init__(self, grid: Grid1D, p: PotentialSpec, eps: float,
                 stress: Optional[StressField] = None,
                 dt: Optional[float] = None, dt_factor: float = 0.1,
                 operator: str = "integral", range_slack: float = 0.3):
        from .potentials import zero_stress
        self.grid = grid
        self.p = p
        self.eps = eps
        self.stress = stress or zero_stress()
        self.dt = dt if dt is not None else dt_factor * eps * eps / p.w2_sup()
        self.operator = operator
        self.range_slack = range_slack
        if operator == "integral":
            op = HalfLaplacian(grid)
            b = np.eye(grid.n) - (self.dt / eps) * op.dense_matrix()
            self._lu = lu_factor(b)
            self._t_left = op.far_field_left
            self._t_right = op.far_field_right
            self._mult = None
        elif operator == "spectral":
            xi = 2.0 * np.pi * np.fft.rfftfreq(grid.n, d=grid.h)
            self._mult = 1.0 / (1.0 + (self.dt / eps) * np.abs(xi))
            self._lu = None
        else:
            raise ValueError(f"unknown operator {operator!r}")

    def _advance_far(self, far: FarField, t: float) -> FarField:
        dt, eps = self.dt, self.eps
        sl = float(np.asarray(self.stress.sigma(t, self.grid.x_min)).ravel()[0])
        sr = float(np.asarray(self.stress.sigma(t, self.grid.x_max)).ravel()[0])
        cl = far.c_left + (dt / eps) * (-(1.0 / eps) * float(self.p.w1(far.c_left)) + sl)
        cr = far.c_right + (dt / eps) * (-(1.0 / eps) * float(self.p.w1(far.c_right)) + sr)
        return FarField(cl, cr)

    def step(self, state: FieldState, dt: Optional[float] = None) -> FieldState:
        """One IMEX step (dt=0 returns the state unchanged)."""
        if dt is not None and dt != self.dt:
            if dt == 0.0:
                return state
            raise ValueError("this evolver was factorized for a fixed dt")
        dt, eps = self.dt, self.eps
        v, t = state.v, state.t
        sig = np.asarray(self.stress.sigma(t, self.grid.x), dtype=float)
        rhs = v - (dt / (eps * eps)) * np.asarray(self.p.w1(v), dtype=float) \
            + (dt / eps) * sig
        if self.operator == "integral":
            rhs = rhs + (dt / eps) * (state.far.c_left * self._t_left
                                      + state.far.c_right * self._t_right)
            v_new = lu_solve(self._lu, rhs)
        else:
            v_new = np.fft.irfft(self._mult * np.fft.rfft(rhs), n=self.grid.n)
        far_new = self._advance_far(state.far, t)
        n_layers = round(far_new.c_right - far_new.c_left)
        lo = min(0.0, far_new.c_left) - self.range_slack
        hi = max(float(n_layers), far_new.c_right) + self.range_slack
        if v_new.min() < lo or v_new.max() > hi:
            raise StabilityError(
                f"field left [{lo:.2f}, {hi:.2f}] at t={t + dt:.6f} "
                f"(min {v_new.min():.3f}, max {v_new.max():.3f}); reduce dt")
        return FieldState(grid=state.grid, v=v_new, t=t + dt, eps=eps,
                          far=far_new)

    def evolve(self, state: FieldState, t_end: float,
               snapshot_times: Optional[Sequence[float]] = None):
        """March to t_end; returns (final, snapshots) with snapshots taken
        at the first step reaching each requested time."""
        snaps = []
        wanted = list(snapshot_times or [])
        k = 0
        while state.t < t_end - 1e-12:
            state = self.step(state)
            while k < len(wanted) and state.t >= wanted[k] - 1e-12:
                snaps.append(state)
                k += 1
        return state, snaps


def step(state: FieldState, p: PotentialSpec, stress: StressField,
         dt: float) -> FieldState:
    """Single IMEX step (builds a one-shot evolver; use Evolver in loops)."""
    if dt == 0.0:
        return state
    ev = Evolver(state.grid, p, state.eps, stress=stress, dt=dt)
    return ev.step(state)


def track_layers(state: FieldState, p: PotentialSpec, stress: StressField,
                 n_layers: int) -> np.ndarray:
    """Positions of the n_layers ascending unit jumps.

    Subtracts the (eps/alpha) sigma background, then walks left to right
    interpolating the crossing of level i - 1/2 for i = 1..n_layers.
    """
    x = state.grid.x
    u = state.v - (state.eps / p.alpha) * np.asarray(
        stress.sigma(state.t, x), dtype=float)
    positions = np.empty(n_layers)
    j = 0
    for i in range(1, n_layers + 1):
        level = i - 0.5
        while j < u.size - 1 and not (u[j] <= level < u[j + 1]):
            j += 1
        if j >= u.size - 1:
            raise TrackingLostError(
                f"no crossing found for level {level} (layer {i} of {n_layers})")
        frac = (level - u[j]) / (u[j + 1] - u[j])
        positions[i - 1] = x[j] + frac * state.grid.h
    return positions


@dataclass(frozen=True)
class AnsatzResidual:
    """Pointwise residual of the traveling-layer ansatz at one time."""

    x: np.ndarray
    field: np.ndarray
    sup: float
    min: float


def ansatz_residual(lp: LayerProfile, cp: Optional[CorrectorProfile],
                    p: PotentialSpec, stress: StressField,
                    trajectory: ParticleTrajectory, eps: float, t: float,
                    grid: Grid1D, delta: float = 0.0,
                    method: str = "identities") -> AnsatzResidual:
    """Evaluate I = eps vt + (1/eps){W'(v) - eps L v - eps sigma} for the
    ansatz v = eps sigma_tilde + sum_i [phi_i - eps xdot_i psi_i].

    method="identities" uses the profile equations,
    L phi = W'(phi) and L psi = W''(phi) psi + g, to evaluate L of the
    layer and corrector parts in closed form (exact up to the profile
    solve tolerance); this isolates the ansatz residual itself from
    operator discretization noise.  Requires a stress with L sigma = 0
    pointwise (zero, constant, or affine).  method="operator" uses the
    discrete integral operator on the assembled field instead.

    delta > 0 evaluates the shifted supersolution variant: the caller
    must supply the trajectory of the delta-shifted particle system, and
    sigma_tilde becomes (delta + sigma)/alpha.
    """
    if cp is None:
        raise ValueError("corrector profile required (psi = 0 profiles allowed)")
    x = grid.x
    xs = np.atleast_1d(trajectory.positions_at(t))
    dt_fd = 1e-6 * max(1.0, trajectory.times[-1] - trajectory.times[0])
    t_lo = max(trajectory.times[0], t - dt_fd)
    t_hi = min(trajectory.times[-1], t + dt_fd)
    vel = _trajectory_velocities(trajectory, t)
    accel = (_trajectory_velocities(trajectory, t_hi)
             - _trajectory_velocities(trajectory, t_lo)) / max(t_hi - t_lo, 1e-300)

    sig = np.asarray(stress.sigma(t, x), dtype=float)
    sig_tilde = (delta + sig) / p.alpha
    phi_of = lp.interpolator()
    dphi_of = lp.derivative_interpolator()
    psi_of = cp.interpolator()
    dpsi_of = cp.derivative_interpolator()
    g_rhs = _rhs_interpolator(cp)

    v = eps * sig_tilde
    eps_vt = np.zeros_like(x)
    l_v = np.zeros_like(x)  # identities path; overwritten in operator path
    for xi, vi, ai in zip(xs, vel, accel):
        y = (x - xi) / eps
        phi_i, dphi_i = phi_of(y), dphi_of(y)
        psi_i, dpsi_i = psi_of(y), dpsi_of(y)
        v = v + phi_i - eps * vi * psi_i
        eps_vt = eps_vt - vi * dphi_i - eps * eps * ai * psi_i \
            + eps * vi * vi * dpsi_i
        l_v = l_v + (1.0 / eps) * np.asarray(p.w1(phi_i), dtype=float) \
            - vi * (np.asarray(p.w2(phi_i), dtype=float) * psi_i + g_rhs(y))
    # time variation of the background: sigma_t is zero for the supported
    # time-independent stresses; L sigma_tilde vanishes for affine sigma
    if method == "operator":
        n_layers = xs.size
        far = FarField(eps * float(np.asarray(stress.sigma(t, grid.x_min)).ravel()[0]
                                   + delta) / p.alpha,
                       n_layers + eps * float(
                           np.asarray(stress.sigma(t, grid.x_max)).ravel()[0]
                           + delta) / p.alpha)
        l_v = HalfLaplacian(grid).apply(v, far)
    elif method != "identities":
        raise ValueError(f"unknown method {method!r}")
    res = eps_vt + (1.0 / eps) * np.asarray(p.w1(v), dtype=float) - l_v - sig
    return AnsatzResidual(x=x, field=res, sup=float(np.abs(res).max()),
                          min=float(res.min()))


def _trajectory_velocities(traj: ParticleTrajectory, t: float) -> np.ndarray:
    idx = int(np.clip(np.searchsorted(traj.times, t, side="right") - 1,
                      0, traj.times.size - 2))
    t0, t1 = traj.times[idx], traj.times[idx + 1]
    if t1 <= t0:
        return traj.velocities[idx]
    s = (t - t0) / (t1 - t0)
    return (1 - s) * traj.velocities[idx] + s * traj.velocities[idx + 1]


def _rhs_interpolator(cp: CorrectorProfile):
    from scipy.interpolate import CubicSpline
    spline = CubicSpline(cp.grid.x, cp.rhs)
    lo, hi = cp.grid.x_min, cp.grid.x_max

    def ev(y):
        y = np.asarray(y, dtype=float)
        inside = (y >= lo) & (y <= hi)
        return np.where(inside, spline(np.clip(y, lo, hi)), 0.0)

    return ev
