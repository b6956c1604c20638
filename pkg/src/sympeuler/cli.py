"""Command-line front end.

Subcommands: run-eulerian, run-lagrangian, exp-map,
experiment {nonuniform, oracle2d, probes}, verify.
Exit codes: 0 ok, 1 acceptance failure, 2 config error,
3 numerical failure, 4 resolution guard.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .config import (
    ConfigError,
    RunConfig,
    build_initial_condition,
    load_config,
    parse_run_config,
)
from .eulerian import (
    DiscretizationFailure,
    EulerianState,
    cfl_timestep,
    diagnostics,
    integrate,
    write_diagnostics_csv,
)
from .experiments import (
    ResolutionGuardError,
    _atomic_write_text,
    build_nonuniform_config,
    oracle_2d_solve,
    probe_report,
    run_nonuniform,
)
from .fields import VectorField
from .initial_conditions import random_symplectic
from .lagrangian import (
    DiffeoMap,
    InversionError,
    compose,
    exp_map,
    geodesic_integrate,
    invert,
    symplectic_residual,
)
from .operators import omega_deformation
from .snapshots import write_snapshot
from .spectral import sobolev_norm

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_GUARD = 4


def _say(args, *parts) -> None:
    if not args.quiet:
        print(*parts, flush=True)


def _error_json(exc: Exception, code: int) -> int:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc),
                      "exit_code": code}))
    return code


def _load(args) -> RunConfig:
    if args.config:
        raw = load_config(args.config)
    else:
        raw = {"time": {"cfl": 0.5}}
    cfg = parse_run_config(raw)
    if args.seed is not None:
        cfg.initial.setdefault("kind", "random_symplectic")
        cfg.initial["seed"] = args.seed
    return cfg


def _out_dir(args) -> str:
    out = args.out if args.out is not None else "."
    os.makedirs(out, exist_ok=True)
    return out


def _timestep(cfg: RunConfig, u0: VectorField) -> float:
    if cfg.dt is not None:
        return cfg.dt
    return cfl_timestep(u0, cfg.t_final, cfg.cfl)


def cmd_run_eulerian(args) -> int:
    cfg = _load(args)
    u0 = build_initial_condition(cfg)
    out = _out_dir(args)
    dt = _timestep(cfg, u0)
    result = integrate(
        u0, cfg.t_final, dt, cutoff_radius=cfg.cutoff_radius,
        diag_every=cfg.diag_every, s=cfg.s,
        project_every=cfg.project_every,
        csv_path=os.path.join(out, "diagnostics.csv"))
    if cfg.snapshot:
        write_snapshot(os.path.join(out, cfg.snapshot), result.state.u)
    last = result.records[-1]
    _say(args, f"t={last.t:.6g} l2={last.l2:.12g} hs={last.hs:.12g} "
               f"p_residual={last.p_residual:.6g}")
    return EXIT_OK


def cmd_run_lagrangian(args) -> int:
    cfg = _load(args)
    u0 = build_initial_condition(cfg)
    out = _out_dir(args)
    state = geodesic_integrate(u0, cfg.t_final, cfg.lagrangian_dt,
                               cutoff_radius=cfg.cutoff_radius)
    u_final = compose(state.v, invert(state.phi))
    rows = []
    residuals = []
    for t, phi, u in ((0.0, DiffeoMap.identity(cfg.grid), u0),
                      (state.t, state.phi, u_final)):
        rec = diagnostics(EulerianState(t, u), cfg.s,
                          rows[-1].bkm_integral if rows else 0.0,
                          rows[-1] if rows else None)
        rows.append(rec)
        residuals.append(symplectic_residual(phi))

    csv_path = os.path.join(out, "diagnostics.csv")
    _write_lagrangian_csv(csv_path, rows, residuals)
    if cfg.snapshot:
        write_snapshot(os.path.join(out, "phi.snap"), state.phi)
        write_snapshot(os.path.join(out, cfg.snapshot), state.v)

    _say(args, f"t={state.t:.6g} symplectic_residual={residuals[-1]:.6g}")
    status = EXIT_OK
    if args.check_equivalence:
        dt = _timestep(cfg, u0)
        eres = integrate(u0, cfg.t_final, dt, cutoff_radius=cfg.cutoff_radius,
                         diag_every=10 ** 9, s=cfg.s)
        diff = VectorField(cfg.grid,
                           u_final.values - eres.state.u.values)
        gap = sobolev_norm(diff, cfg.s - 1.0)
        print(f"equivalence_hsm1={gap:.12g}")
    if args.expect_residual:
        p_norm = sobolev_norm(omega_deformation(u0), 0.0)
        bound = 0.25 * p_norm
        print(f"residual={residuals[-1]:.12g} quarter_p_l2={bound:.12g}")
        if residuals[-1] < bound:
            raise DiscretizationFailure(
                state.t, f"residual {residuals[-1]:.6g} below "
                         f"(1/4)*||P(u0)||_L2 = {bound:.6g}")
    return status


def _write_lagrangian_csv(path, rows, residuals) -> None:
    class _Row:
        def __init__(self, rec, res):
            self._vals = rec.row() + (res,)

        def row(self):
            return self._vals

    from .eulerian import DIAGNOSTIC_COLUMNS
    cols = DIAGNOSTIC_COLUMNS + ("symplectic_residual",)
    write_diagnostics_csv(path, [_Row(r, q) for r, q in zip(rows, residuals)],
                          columns=cols)


def cmd_exp_map(args) -> int:
    cfg = _load(args)
    u0 = build_initial_condition(cfg)
    out = _out_dir(args)
    phi = exp_map(u0, dt=cfg.lagrangian_dt, cutoff_radius=cfg.cutoff_radius)
    write_snapshot(os.path.join(out, "phi.snap"), phi)
    _say(args, f"symplectic_residual={symplectic_residual(phi):.12g}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = _load(args)
    out = _out_dir(args)
    esec = cfg.experiment
    if args.kind == "nonuniform":
        # without a config file, fall back to the tuned default geometry
        ncfg = build_nonuniform_config(
            grid=cfg.grid if args.config else None, s=cfg.s,
            R=esec.get("R", 0.5), K=esec.get("K", 6),
            seed=cfg.initial.get("seed", 7),
            epsilon=esec.get("epsilon", 0.05),
            cfl=esec.get("cfl", 0.7))
        progress = None
        if not args.quiet:
            progress = lambda row: print(
                f"k={row.k} input={row.input_dist_hs:.6g} "
                f"gap={row.output_gap_hs:.6g} sep={row.separation:.6g}",
                flush=True)
        report = run_nonuniform(
            ncfg, cfl=esec.get("cfl", 0.7),
            csv_path=os.path.join(out, "nonuniform.csv"),
            json_path=os.path.join(out, "constants.json"),
            progress=progress)
        _say(args, f"gap_floor={report.constants['gap_floor']:.6g}")
        return EXIT_OK
    if args.kind == "oracle2d":
        if cfg.grid.n != 1:
            raise ConfigError("grid.n: oracle2d requires n = 1")
        seeds = esec.get("seeds", [0, 1, 2])
        if args.seed is not None:
            seeds = [args.seed + i for i in range(len(seeds))]
        t_final = esec.get("t_final", 0.5)
        worst = 0.0
        for seed in seeds:
            u0 = random_symplectic(cfg.grid, seed=seed,
                                   decay=esec.get("decay", 0.8), s=cfg.s,
                                   norm=esec.get("norm", 1.0))
            dt = (cfg.dt if cfg.dt is not None
                  else cfl_timestep(u0, t_final, cfg.cfl))
            ours = integrate(u0, t_final, dt,
                             cutoff_radius=cfg.cutoff_radius,
                             diag_every=10 ** 9, s=cfg.s).state.u
            ref = oracle_2d_solve(u0, t_final, dt)
            num = np.sqrt(((ours.values - ref.values) ** 2).sum()
                          * cfg.grid.cell_volume)
            den = sobolev_norm(u0, 0.0)
            rel = num / den
            worst = max(worst, rel)
            _say(args, f"seed={seed} rel_l2_discrepancy={rel:.12g}")
        _say(args, f"max_discrepancy={worst:.12g}")
        return EXIT_OK
    if args.kind == "probes":
        report = probe_report(s=cfg.s)
        path = os.path.join(out, "probes.json")
        _atomic_write_text(path, json.dumps(report, indent=2,
                                            sort_keys=True) + "\n")
        for name, block in report.items():
            _say(args, f"{name}: constant={block['constant']:.6g} "
                       f"stability={block['stability']:.4f}")
        return EXIT_OK
    raise ConfigError(f"experiment: unknown kind {args.kind!r}")


def cmd_verify(args) -> int:
    from .acceptance import run_criteria
    results = run_criteria(args.criteria, quiet=args.quiet)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sympeuler",
        description="Symplectic Euler equations: solvers, flow maps, "
                    "experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", metavar="PATH", default=None)
        sp.add_argument("--out", metavar="DIR", default=None)
        sp.add_argument("--seed", metavar="INT", type=int, default=None)
        sp.add_argument("--quiet", action="store_true")

    sp = sub.add_parser("run-eulerian", help="time-step the velocity form")
    common(sp)
    sp.set_defaults(func=cmd_run_eulerian)

    sp = sub.add_parser("run-lagrangian", help="time-step the geodesic form")
    common(sp)
    sp.add_argument("--check-equivalence", action="store_true")
    sp.add_argument("--expect-residual", action="store_true")
    sp.set_defaults(func=cmd_run_lagrangian)

    sp = sub.add_parser("exp-map", help="time-1 geodesic exponential")
    common(sp)
    sp.set_defaults(func=cmd_exp_map)

    sp = sub.add_parser("experiment", help="scripted experiments")
    sp.add_argument("kind", choices=("nonuniform", "oracle2d", "probes"))
    common(sp)
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("verify", help="run the acceptance suite")
    common(sp)
    sp.add_argument("--criteria", metavar="N[,N...]", default=None)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        return _error_json(exc, EXIT_CONFIG)
    except ResolutionGuardError as exc:
        return _error_json(exc, EXIT_GUARD)
    except (DiscretizationFailure, InversionError) as exc:
        return _error_json(exc, EXIT_NUMERICAL)
    except (ValueError, RuntimeError) as exc:
        return _error_json(exc, EXIT_NUMERICAL)


if __name__ == "__main__":
    sys.exit(main())
