"""End-to-end experiments: convergence sweeps and validation batteries.

Outputs are CSV for fields and trajectories and JSON for scalar
reports (schema documented in docs/output_schema.md).  Reports are
deterministic for a fixed config: iteration orders are fixed and wall
clock never enters the data path; runtimes go to a separate
timings.json so the main artifacts stay byte-reproducible.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .config import SCHEMA_VERSION, ExperimentConfig
from .corrector import solve_corrector, solvability_defect
from .evolution import Evolver, build_initial, track_layers
from .layer import (LayerProfile, RelaxationOptions, check_asymptotics,
                    exact_pn_layer, solve_layer)
from .operators import LAYER_FAR_FIELD, Grid1D, apply_integral, apply_spectral
from .particles import ParticleState, check_repulsion_bound, integrate
from .potentials import make_pn_potential, validate_assumption_a, zero_stress


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.17g}" if isinstance(v, float) else v
                             for v in row])


def write_json(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


@dataclass(frozen=True)
class ConvergenceReport:
    scenario_id: str
    config_hash: str
    schema_version: int
    eps: tuple
    errors: tuple            # per-eps max-over-time tracking error vs ODE
    monotone: bool
    tolerances: dict

    @property
    def final_error(self) -> float:
        return self.errors[-1]


def _solve_profile(cfg: ExperimentConfig) -> LayerProfile:
    kind = cfg.raw.get("potential", {}).get("kind") if cfg.raw else None
    if kind == "pn" or (kind is None and cfg.potential_kind == "pn"):
        a = float(cfg.raw.get("potential", {}).get("a", 1.0 / cfg.potential.alpha)
                  if cfg.raw else 1.0 / cfg.potential.alpha)
        return exact_pn_layer(a, cfg.layer_grid)
    return solve_layer(cfg.potential, cfg.layer_grid)


def run_convergence(cfg: ExperimentConfig,
                    out_dir: Optional[str] = None) -> ConvergenceReport:
    """For each eps: evolve the prepared data, track layers, compare with
    the particle ODE sharing the same mobility."""
    out = Path(out_dir or cfg.out_dir) / cfg.scenario_id
    lp = _solve_profile(cfg)
    state0 = ParticleState(t=0.0, x=np.asarray(cfg.x0), gamma=lp.gamma)
    traj = integrate(state0, cfg.stress, cfg.t_end)
    errors = []
    timings = {}
    for eps in cfg.eps_list:
        tic = time.perf_counter()
        field = build_initial(lp, cfg.potential, cfg.stress, cfg.x0, eps,
                              cfg.grid)
        ev = Evolver(cfg.grid, cfg.potential, eps, stress=cfg.stress,
                     dt_factor=cfg.dt_factor)
        sample_times = np.linspace(0.0, cfg.t_end, cfg.n_outputs + 1)[1:]
        _, snaps = ev.evolve(field, cfg.t_end, snapshot_times=sample_times)
        rows = []
        worst = 0.0
        for snap in snaps:
            tracked = track_layers(snap, cfg.potential, cfg.stress,
                                   len(cfg.x0))
            ode = np.atleast_1d(traj.positions_at(min(snap.t, cfg.t_end)))
            err = float(np.abs(tracked - ode).max())
            worst = max(worst, err)
            rows.append([snap.t, *tracked, *ode, err])
        errors.append(worst)
        write_csv(out / f"tracks_eps_{eps:g}.csv",
                  ["t"] + [f"x{i + 1}_pde" for i in range(len(cfg.x0))]
                  + [f"x{i + 1}_ode" for i in range(len(cfg.x0))] + ["err"],
                  rows)
        timings[f"eps_{eps:g}_seconds"] = time.perf_counter() - tic
    monotone = all(errors[i] > errors[i + 1] for i in range(len(errors) - 1))
    report = ConvergenceReport(
        scenario_id=cfg.scenario_id,
        config_hash=cfg.config_hash,
        schema_version=SCHEMA_VERSION,
        eps=tuple(cfg.eps_list),
        errors=tuple(errors),
        monotone=monotone,
        tolerances={"dt_factor": cfg.dt_factor,
                    "layer_tol": 1e-8,
                    "h": cfg.grid.h},
    )
    write_json(out / "convergence.json", asdict(report))
    write_json(out / "timings.json", timings)
    return report


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float


@dataclass(frozen=True)
class SuiteSummary:
    scenario_id: str
    config_hash: str
    schema_version: int
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def run_suite(cfg: Optional[ExperimentConfig] = None,
              out_dir: Optional[str] = None) -> SuiteSummary:
    """Module validation batteries on desk-scale grids.

    Individual failures are recorded and the suite continues; thresholds
    are the frozen module tolerances at these resolutions.
    """
    checks = []

    def record(name, value, threshold, smaller_is_better=True):
        ok = value <= threshold if smaller_is_better else value >= threshold
        checks.append(CheckResult(name, bool(ok), float(value),
                                  float(threshold)))

    p = cfg.potential if cfg is not None else make_pn_potential(1.0)
    stress = cfg.stress if cfg is not None else zero_stress()
    scenario = cfg.scenario_id if cfg is not None else "default"
    chash = cfg.config_hash if cfg is not None else "none"
    out = Path(out_dir or (cfg.out_dir if cfg else "out")) / f"suite_{scenario}"

    # potential battery
    rep = validate_assumption_a(p)
    record("potential_assumption_a", 0.0 if rep.passed else 1.0, 0.5)

    # operator battery: closed-form oracle and multiplier exactness
    grid = Grid1D(-40.0, 40.0, 1024)
    layer = exact_pn_layer(1.0, grid)
    oracle = -grid.x / (np.pi * (grid.x ** 2 + 1.0))
    err = np.abs(apply_integral(layer.phi, LAYER_FAR_FIELD, grid) - oracle)
    interior = np.abs(grid.x) <= 20.0
    record("operator_oracle_sup", float(err[interior].max()), 1e-3)
    pgrid = Grid1D(0.0, 2 * np.pi * (1 - 1.0 / 256), 256)
    spec_err = float(np.abs(apply_spectral(np.cos(2 * pgrid.x), pgrid)
                            + 2 * np.cos(2 * pgrid.x)).max())
    record("operator_multiplier_exactness", spec_err, 1e-12)

    # layer battery
    lgrid = Grid1D(-40.0, 40.0, 2048)
    lp = solve_layer(p, lgrid, RelaxationOptions(tol=1e-9))
    record("layer_residual", lp.residual_sup, 1e-9)
    record("layer_monotone", 0.0 if np.all(np.diff(lp.phi) > 0) else 1.0, 0.5)
    tail = check_asymptotics(lp)
    record("layer_tail_bounded", 0.0 if tail.bounded else 1.0, 0.5)
    if cfg is None:
        record("layer_gamma_relerr", abs(lp.gamma - 2 * np.pi) / (2 * np.pi),
               0.01)

    # corrector battery
    record("corrector_solvability_defect", abs(solvability_defect(lp, p)),
           1e-6)
    cp = solve_corrector(lp, p)
    record("corrector_residual", cp.residual_sup, 1e-4)
    record("corrector_orthogonality", abs(cp.orthogonality_defect), 1e-9)

    # particle battery
    state0 = ParticleState(t=0.0, x=np.array([-0.5, 0.5]), gamma=2 * np.pi)
    traj = integrate(state0, zero_stress(), 1.0)
    d_exact = np.sqrt(1.0 + 8.0)
    record("particles_two_body",
           abs(float(np.diff(traj.positions_at(1.0))[0]) - d_exact), 1e-6)
    record("particles_bound",
           0.0 if check_repulsion_bound(traj, 0.0).passed else 1.0, 0.5)

    # pde battery: short steady-layer drift at the discrete equilibrium
    egrid = Grid1D(-12.0, 12.0, 2048)
    eps = 0.1
    field = build_initial(exact_pn_layer(1.0 / p.alpha, egrid), p, stress,
                          [0.0], eps, egrid)
    ev = Evolver(egrid, p, eps, stress=stress)
    settled, _ = ev.evolve(field, 0.3)
    ref_v, ref_t = settled.v.copy(), settled.t
    settled, _ = ev.evolve(settled, 0.8)
    drift_rate = float(np.abs(settled.v - ref_v).max()) / (settled.t - ref_t)
    record("pde_steady_drift_settled", drift_rate, 1e-6)

    summary = SuiteSummary(scenario_id=scenario, config_hash=chash,
                           schema_version=SCHEMA_VERSION,
                           checks=tuple(checks))
    write_json(out / "suite.json", {
        "scenario_id": summary.scenario_id,
        "config_hash": summary.config_hash,
        "schema_version": summary.schema_version,
        "passed": summary.passed,
        "checks": [asdict(c) for c in summary.checks],
    })
    return summary
