"""Limiting particle dynamics: N ordered points with 1/x repulsion.

    dx_i/dt = gamma ( -sigma(t, x_i) + (1/pi) sum_{j != i} 1/(x_i - x_j) )

Pairwise repulsion keeps the ordering for all time; with a space
Lipschitz bound K on sigma the minimal gap obeys

    d(t) >= d(0) exp(-gamma K t),

which integrate() monitors at every accepted step.  Integration is
classical RK4 with the step tied to the current minimal gap
(dt <= safety * pi * d^2 / gamma); requested output times are filled in
by cubic Hermite interpolation between accepted steps, so output
sampling never constrains the stepping.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .potentials import StressField


class SingularConfigurationError(ValueError):
    """Coincident particle positions make the interaction singular."""


class CollisionError(RuntimeError):
    """Minimal distance fell below the hard floor (diagnostic payload)."""

    def __init__(self, message, t=None, min_dist=None):
        super().__init__(message)
        self.t = t
        self.min_dist = min_dist


@dataclass(frozen=True)
class ParticleState:
    """Ordered particle positions at a time, with the shared mobility."""

    t: float
    x: np.ndarray
    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, dtype=float)))
        if self.x.ndim != 1 or self.x.size == 0:
            raise ValueError("positions must form a nonempty 1D array")
        if np.any(np.diff(self.x) <= 0):
            raise SingularConfigurationError(
                "positions must be strictly increasing")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def min_dist(self) -> float:
        if self.x.size < 2:
            return np.inf
        return float(np.diff(self.x).min())


def _pairwise_velocities(x, t, gamma, stress: StressField):
    dx = x[:, None] - x[None, :]
    np.fill_diagonal(dx, np.inf)
    if np.any(dx == 0.0):
        raise SingularConfigurationError("coincident particles")
    inter = (1.0 / dx).sum(axis=1) / np.pi
    return gamma * (-np.asarray(stress.sigma(t, x), dtype=float) + inter)


def particle_rhs(state: ParticleState, stress: StressField) -> np.ndarray:
    """Velocities of the particle system at the state's time."""
    return _pairwise_velocities(state.x, state.t, state.gamma, stress)


@dataclass
class IntegrationOptions:
    dt: Optional[float] = None      # fixed step; None = gap-adaptive
    safety: float = 0.05            # dt <= safety * pi * d^2 / gamma
    dt_max: Optional[float] = None  # default (t_end - t0) / 100
    floor_scale: float = 1e-8       # hard floor = floor_scale * domain scale
    bound_slack: float = 1e-6


@dataclass(frozen=True)
class ParticleTrajectory:
    """Accepted RK4 steps plus velocities, for dense cubic output."""

    times: np.ndarray
    positions: np.ndarray      # (steps, N)
    velocities: np.ndarray     # (steps, N)
    gamma: float
    worst_bound_margin: float  # min over steps of d(t) - bound(t)

    @property
    def min_dists(self) -> np.ndarray:
        if self.positions.shape[1] < 2:
            return np.full(self.times.size, np.inf)
        return np.diff(self.positions, axis=1).min(axis=1)

    def positions_at(self, t) -> np.ndarray:
        """Cubic Hermite interpolation at arbitrary times in range."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if t.min() < self.times[0] - 1e-12 or t.max() > self.times[-1] + 1e-12:
            raise ValueError("requested time outside the trajectory range")
        idx = np.clip(np.searchsorted(self.times, t, side="right") - 1,
                      0, self.times.size - 2)
        t0 = self.times[idx]
        dt = self.times[idx + 1] - t0
        s = np.where(dt > 0, (t - t0) / np.where(dt > 0, dt, 1.0), 0.0)[:, None]
        p0, p1 = self.positions[idx], self.positions[idx + 1]
        v0, v1 = self.velocities[idx] * dt[:, None], self.velocities[idx + 1] * dt[:, None]
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        out = h00 * p0 + h10 * v0 + h01 * p1 + h11 * v1
        return out if out.shape[0] > 1 else out[0]

    def state_at(self, t) -> ParticleState:
        return ParticleState(t=float(t), x=self.positions_at(float(t)),
                             gamma=self.gamma)


def integrate(state0: ParticleState, stress: StressField, t_end: float,
              opts: Optional[IntegrationOptions] = None) -> ParticleTrajectory:
    """Integrate to t_end with RK4, monitoring order and the gap bound."""
    if not t_end > state0.t:
        raise ValueError("t_end must exceed the initial time")
    opts = opts or IntegrationOptions()
    gamma = state0.gamma
    k_lip = stress.lipschitz_k
    d0 = state0.min_dist
    scale = max(1.0, float(np.abs(state0.x).max()))
    floor = opts.floor_scale * scale
    dt_max = opts.dt_max or (t_end - state0.t) / 100.0

    ts = [state0.t]
    xs = [state0.x.copy()]
    vs = [_pairwise_velocities(state0.x, state0.t, gamma, stress)]
    worst = np.inf
    t, x = state0.t, state0.x.copy()
    while t < t_end - 1e-14:
        d = np.diff(x).min() if x.size > 1 else np.inf
        if d < floor:
            raise CollisionError(
                f"minimal distance {d:.3e} below floor {floor:.3e} at t={t:.6f}",
                t=t, min_dist=d)
        if opts.dt is not None:
            dt = opts.dt
        else:
            dt = dt_max if not np.isfinite(d) else min(
                dt_max, opts.safety * np.pi * d * d / gamma)
        dt = min(dt, t_end - t)
        k1 = _pairwise_velocities(x, t, gamma, stress)
        k2 = _pairwise_velocities(x + 0.5 * dt * k1, t + 0.5 * dt, gamma, stress)
        k3 = _pairwise_velocities(x + 0.5 * dt * k2, t + 0.5 * dt, gamma, stress)
        k4 = _pairwise_velocities(x + dt * k3, t + dt, gamma, stress)
        x = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t + dt
        if x.size > 1 and np.any(np.diff(x) <= 0):
            raise CollisionError(f"ordering lost at t={t:.6f}", t=t,
                                 min_dist=float(np.diff(x).min()))
        if x.size > 1 and np.isfinite(d0):
            bound = d0 * np.exp(-gamma * k_lip * (t - state0.t))
            margin = float(np.diff(x).min() - bound * (1.0 - opts.bound_slack))
            worst = min(worst, margin)
            if margin < 0:
                raise CollisionError(
                    f"repulsion bound violated at t={t:.6f} "
                    f"(margin {margin:.3e}); check the stress Lipschitz bound",
                    t=t, min_dist=float(np.diff(x).min()))
        ts.append(t)
        xs.append(x.copy())
        vs.append(_pairwise_velocities(x, t, gamma, stress))
    return ParticleTrajectory(times=np.asarray(ts), positions=np.asarray(xs),
                              velocities=np.asarray(vs), gamma=gamma,
                              worst_bound_margin=float(worst))


@dataclass(frozen=True)
class RepulsionReport:
    passed: bool
    worst_margin: float
    d0: float
    exponent: float


def check_repulsion_bound(traj: ParticleTrajectory, lipschitz_k: float,
                          slack: float = 1e-6) -> RepulsionReport:
    """Verify d(t) >= d(0) exp(-gamma K t) (1 - slack) at the stored times."""
    d = traj.min_dists
    d0 = float(d[0])
    if not np.isfinite(d0):
        return RepulsionReport(passed=True, worst_margin=np.inf, d0=d0,
                               exponent=0.0)
    rate = traj.gamma * lipschitz_k
    bound = d0 * np.exp(-rate * (traj.times - traj.times[0]))
    margin = float((d - bound * (1.0 - slack)).min())
    return RepulsionReport(passed=margin >= 0.0, worst_margin=margin, d0=d0,
                           exponent=rate)
