"""Command-line interface.

Subcommands: layer, corrector, particles, evolve, converge, suite.
Each writes CSV/JSON artifacts under --out and exits 0 only when every
requested check passed.  converge and suite read an INI config
(--config); the profile subcommands take flags with sensible defaults.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config
from .corrector import solve_corrector
from .evolution import Evolver, build_initial, track_layers
from .layer import (RelaxationOptions, check_asymptotics, exact_pn_layer,
                    solve_layer)
from .operators import Grid1D
from .particles import IntegrationOptions, ParticleState, \
    check_repulsion_bound, integrate
from .potentials import (affine_stress, constant_stress, make_cosine_potential,
                         make_pn_potential, zero_stress)
from .harness import run_convergence, run_suite, write_csv, write_json


def _add_grid_args(sp, x_min=-40.0, x_max=40.0, n=2048):
    sp.add_argument("--x-min", type=float, default=x_min)
    sp.add_argument("--x-max", type=float, default=x_max)
    sp.add_argument("--n", type=int, default=n)


def _add_potential_args(sp):
    sp.add_argument("--potential", choices=["pn", "cosine"], default="pn")
    sp.add_argument("--a", type=float, default=1.0,
                    help="well parameter for --potential pn (alpha = 1/a)")
    sp.add_argument("--coeffs", type=str, default="1.0",
                    help="comma list of cosine coefficients for --potential cosine")


def _potential(args):
    if args.potential == "pn":
        return make_pn_potential(args.a)
    return make_cosine_potential([float(s) for s in args.coeffs.split(",")])


def _stress(args):
    if args.stress == "zero":
        return zero_stress()
    if args.stress == "constant":
        return constant_stress(args.stress_value)
    return affine_stress(args.stress_value, args.stress_slope)


def _add_stress_args(sp):
    sp.add_argument("--stress", choices=["zero", "constant", "affine"],
                    default="zero")
    sp.add_argument("--stress-value", type=float, default=0.0)
    sp.add_argument("--stress-slope", type=float, default=0.0)


def cmd_layer(args) -> int:
    grid = Grid1D(args.x_min, args.x_max, args.n)
    p = _potential(args)
    if args.potential == "pn" and args.exact:
        lp = exact_pn_layer(args.a, grid)
    else:
        lp = solve_layer(p, grid, RelaxationOptions(tol=args.tol))
    tail = check_asymptotics(lp)
    out = Path(args.out)
    write_csv(out / "layer.csv", ["x", "phi", "dphi"],
              zip(grid.x.tolist(), lp.phi.tolist(), lp.dphi.tolist()))
    report = {
        "gamma": lp.gamma,
        "alpha": lp.alpha,
        "residual_sup": lp.residual_sup,
        "tail_constant": tail.tail_constant,
        "tail_sup_x2": tail.sup_x2_weighted,
        "tail_bounded": tail.bounded,
    }
    write_json(out / "layer.json", report)
    ok = tail.bounded and (lp.residual_sup is None or lp.residual_sup <= args.tol)
    print(f"layer: gamma={lp.gamma:.6f} residual="
          f"{lp.residual_sup if lp.residual_sup is not None else 'exact'} "
          f"-> {'ok' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_corrector(args) -> int:
    grid = Grid1D(args.x_min, args.x_max, args.n)
    p = _potential(args)
    if args.potential == "pn" and args.exact:
        lp = exact_pn_layer(args.a, grid)
    else:
        lp = solve_layer(p, grid, RelaxationOptions(tol=args.tol))
    cp = solve_corrector(lp, p)
    out = Path(args.out)
    write_csv(out / "corrector.csv", ["x", "psi", "dpsi", "g"],
              zip(grid.x.tolist(), cp.psi.tolist(), cp.dpsi.tolist(),
                  cp.rhs.tolist()))
    write_json(out / "corrector.json", {
        "eta": cp.eta,
        "residual_sup": cp.residual_sup,
        "orthogonality_defect": cp.orthogonality_defect,
        "solvability_defect": cp.solvability_defect,
    })
    ok = cp.residual_sup <= 1e-4 and abs(cp.orthogonality_defect) <= 1e-9
    print(f"corrector: eta={cp.eta:.6f} residual={cp.residual_sup:.2e} "
          f"-> {'ok' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_particles(args) -> int:
    x0 = np.array([float(s) for s in args.x0.split(",")])
    if args.gamma == "from-layer":
        lp = exact_pn_layer(args.a, Grid1D(-60.0, 60.0, 2048))
        gamma = lp.gamma
    else:
        gamma = float(args.gamma)
    stress = _stress(args)
    state0 = ParticleState(t=0.0, x=x0, gamma=gamma)
    opts = IntegrationOptions(dt=args.dt)
    traj = integrate(state0, stress, args.t_end, opts)
    times = np.linspace(0.0, args.t_end, args.n_outputs + 1)
    pos = np.atleast_2d(traj.positions_at(times))
    d0 = state0.min_dist
    rows = []
    for k, t in enumerate(times):
        xs = pos[k] if pos.ndim == 2 else pos
        dmin = float(np.diff(xs).min()) if xs.size > 1 else np.inf
        bound = d0 * np.exp(-gamma * stress.lipschitz_k * t) \
            if np.isfinite(d0) else np.inf
        rows.append([t, *xs.tolist(),
                     dmin if np.isfinite(dmin) else "inf",
                     bound if np.isfinite(bound) else "inf"])
    out = Path(args.out)
    write_csv(out / "particles.csv",
              ["t"] + [f"x{i + 1}" for i in range(x0.size)]
              + ["min_dist", "bound"], rows)
    rep = check_repulsion_bound(traj, stress.lipschitz_k)
    write_json(out / "particles.json", asdict(rep))
    print(f"particles: bound {'holds' if rep.passed else 'VIOLATED'} "
          f"(worst margin {rep.worst_margin:.3e})")
    return 0 if rep.passed else 1


def cmd_evolve(args) -> int:
    grid = Grid1D(args.x_min, args.x_max, args.n)
    p = _potential(args)
    stress = _stress(args)
    x0 = np.array([float(s) for s in args.x0.split(",")])
    lp = exact_pn_layer(1.0 / p.alpha, grid) if args.potential == "pn" \
        else solve_layer(p, Grid1D(-60.0, 60.0, 3072))
    field = build_initial(lp, p, stress, x0, args.eps, grid)
    ev = Evolver(grid, p, args.eps, stress=stress, dt_factor=args.dt_factor)
    snap_times = np.linspace(0.0, args.t_end, args.snapshots + 1)[1:]
    final, snaps = ev.evolve(field, args.t_end, snapshot_times=snap_times)
    out = Path(args.out)
    tracks = []
    ok = True
    for snap in snaps:
        write_csv(out / f"field_t{snap.t:.4f}.csv", ["x", "v"],
                  zip(grid.x.tolist(), snap.v.tolist()))
        try:
            pos = track_layers(snap, p, stress, x0.size)
            tracks.append({"t": snap.t, "positions": pos.tolist()})
        except Exception as exc:  # tracking lost: record and fail
            tracks.append({"t": snap.t, "error": str(exc)})
            ok = False
    write_json(out / "tracks.json", {"eps": args.eps, "tracks": tracks})
    print(f"evolve: {len(snaps)} snapshots -> {'ok' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_converge(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    report = run_convergence(cfg, out_dir=args.out)
    print(f"converge[{report.scenario_id}]: errors="
          f"{['%.4f' % e for e in report.errors]} "
          f"monotone={report.monotone}")
    return 0 if report.monotone else 1


def cmd_suite(args) -> int:
    cfg = None
    if args.config:
        try:
            cfg = load_config(args.config)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
    summary = run_suite(cfg, out_dir=args.out)
    for c in summary.checks:
        print(f"  {'PASS' if c.passed else 'FAIL'} {c.name}: "
              f"{c.value:.3e} (threshold {c.threshold:.1e})")
    print(f"suite: {'all passed' if summary.passed else 'FAILURES'}")
    return 0 if summary.passed else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pnlab",
        description="Half-Laplacian dislocation dynamics laboratory")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("layer", help="solve or sample a transition layer")
    _add_grid_args(sp)
    _add_potential_args(sp)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--exact", action="store_true",
                    help="use the closed form instead of relaxing (pn only)")
    sp.add_argument("--out", default="out")
    sp.set_defaults(func=cmd_layer)

    sp = sub.add_parser("corrector", help="solve the corrector problem")
    _add_grid_args(sp)
    _add_potential_args(sp)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--exact", action="store_true")
    sp.add_argument("--out", default="out")
    sp.set_defaults(func=cmd_corrector)

    sp = sub.add_parser("particles", help="integrate the particle ODE")
    sp.add_argument("--x0", required=True, help="comma list of positions")
    sp.add_argument("--gamma", default="from-layer",
                    help="mobility value or 'from-layer'")
    sp.add_argument("--a", type=float, default=1.0)
    _add_stress_args(sp)
    sp.add_argument("--t-end", type=float, default=1.0)
    sp.add_argument("--dt", type=float, default=None)
    sp.add_argument("--n-outputs", type=int, default=20)
    sp.add_argument("--out", default="out")
    sp.set_defaults(func=cmd_particles)

    sp = sub.add_parser("evolve", help="evolve the rescaled field")
    _add_grid_args(sp, x_min=-8.0, x_max=8.0, n=2048)
    _add_potential_args(sp)
    _add_stress_args(sp)
    sp.add_argument("--x0", required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--t-end", type=float, default=0.5)
    sp.add_argument("--snapshots", type=int, default=5)
    sp.add_argument("--dt-factor", type=float, default=0.1)
    sp.add_argument("--out", default="out")
    sp.set_defaults(func=cmd_evolve)

    sp = sub.add_parser("converge", help="convergence sweep vs the ODE")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_converge)

    sp = sub.add_parser("suite", help="module validation batteries")
    sp.add_argument("--config", default=None)
    sp.add_argument("--out", default="out")
    sp.set_defaults(func=cmd_suite)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
