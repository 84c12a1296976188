"""Command line entry point: ``fnls ground-state|classify|evolve|check``.

Exit codes: 0 success, 1 usage/config error, 2 solver failure, 3 run halted on blowup.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import checks
from .diagnostics import Monitor, conservation_drift, detect_outcome
from .evolution import HaltReason, evolve
from .ground_state import CertificationFailed, Collapse, NoConvergence, pohozaev_report, solve_ground_state
from .io import (
    ConfigError,
    DiagnosticsWriter,
    RunConfig,
    config_help,
    format_float,
    load_config,
    write_row_csv,
    write_snapshot,
)
from .params import GaussianData, InconsistentGroundState, ThresholdReport, classify

log = logging.getLogger("fnls")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_BLOWUP = 0, 1, 2, 3


class SolverFailure(RuntimeError):
    pass


def _ground(cfg: RunConfig, grid):
    try:
        return solve_ground_state(cfg.params, grid, tol=cfg.gs_tol, max_iter=cfg.gs_max_iter)
    except (NoConvergence, Collapse, CertificationFailed) as exc:
        raise SolverFailure(f"{type(exc).__name__}: {exc}") from exc


def _initial_data(cfg: RunConfig, grid, ground):
    if cfg.init_family == "gaussian":
        return GaussianData(cfg.amplitude, cfg.width, cfg.chirp).sample(grid)
    return ground.multiple(cfg.multiple)


def cmd_ground_state(cfg: RunConfig, out: Path) -> int:
    grid = cfg.grid()
    gs = _ground(cfg, grid)
    out.mkdir(parents=True, exist_ok=True)
    write_snapshot(out / "q.snap", gs.profile, grid, 0.0, cfg.params)
    rows = [("identity", "computed", "predicted", "relerr")]
    for name, (lhs, rhs, err) in pohozaev_report(gs, cfg.params).items():
        rows.append((name, format_float(lhs), format_float(rhs), format_float(err)))
    for name, val in (
        ("gn_constant", gs.gn_constant),
        ("mass", gs.mass),
        ("kinetic", gs.kinetic),
        ("potential", gs.potential),
        ("energy", gs.energy),
        ("residual", gs.residual),
        ("iterations", float(gs.iterations)),
    ):
        rows.append((name, format_float(val), "", ""))
    (out / "q_report.csv").write_text("\n".join(",".join(r) for r in rows) + "\n", encoding="utf-8")
    print(f"ground state: {gs.iterations} iterations, residual {gs.residual:.3e}, C_GN {gs.gn_constant:.12g}")
    return EXIT_OK


def cmd_classify(cfg: RunConfig, out: Path) -> int:
    params = cfg.params
    if params.s_c <= 0:
        print(f"classify: subcritical (p <= 1+4s/N = {params.lower_power:g}); products undefined", file=sys.stderr)
        return EXIT_CONFIG
    grid = cfg.grid()
    gs = _ground(cfg, grid)
    u0 = _initial_data(cfg, grid, gs)
    try:
        rep = classify(u0, grid, params, gs)
    except InconsistentGroundState as exc:
        raise SolverFailure(str(exc)) from exc
    out.mkdir(parents=True, exist_ok=True)
    write_row_csv(out / "classify.csv", ThresholdReport.FIELDS, [getattr(rep, f) for f in ThresholdReport.FIELDS])
    print(f"verdict: {rep.verdict.value}" + (f" ({rep.note})" if rep.note else ""))
    return EXIT_OK


def cmd_evolve(cfg: RunConfig, out: Path) -> int:
    params = cfg.params
    grid = cfg.grid()
    need_ground = cfg.init_family == "ground_state_multiple" or params.s_c > 0
    gs = _ground(cfg, grid) if need_ground else None
    u0 = _initial_data(cfg, grid, gs)
    out.mkdir(parents=True, exist_ok=True)
    with DiagnosticsWriter(out / "diagnostics.csv") as writer:
        monitor = Monitor(grid, params, gs if params.s_c > 0 else None, cfg.virial,
                          rate_every=cfg.rate_every, sink=writer)

        def callback(state):
            if cfg.snapshot_every and state.step_count % cfg.snapshot_every == 0:
                write_snapshot(out / f"snap_{state.step_count:08d}.snap", state.field, grid, state.time, params)
            return monitor(state)

        traj = evolve(u0, grid, params, cfg.T, cfg.dt, cfg.options, callback, cfg.sample_every)
        if traj.halt_reason is HaltReason.OVERFLOW:
            pass
        elif not monitor.history or monitor.history[-1].time != traj.state.time:
            monitor(traj.state)
        monitor.finalize()
    write_snapshot(out / "final.snap", traj.state.field, grid, traj.state.time, params)
    outcome = detect_outcome(monitor.history, params, gs if params.s_c > 0 else None,
                             overflow=traj.halt_reason is HaltReason.OVERFLOW)
    lines = [
        f"schema_version = 1",
        f"halt = {traj.halt_reason.value}",
        f"time = {format_float(traj.state.time)}",
        f"steps = {traj.state.step_count}",
        f"outcome = {'|'.join(sorted(outcome))}",
    ]
    if len(monitor.history) >= 2:
        drift = conservation_drift(monitor.history, cfg.sponge)
        lines += [f"{k} = {format_float(v) if isinstance(v, float) else v}" for k, v in drift._asdict().items()]
    (out / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"halt={traj.halt_reason.value} t={traj.state.time:g} outcome={'|'.join(sorted(outcome))}")
    return EXIT_BLOWUP if traj.halt_reason is not HaltReason.COMPLETED else EXIT_OK


def cmd_check() -> int:
    ok = True
    for res in checks.run_checks():
        status = "PASS" if res.passed else "FAIL"
        print(f"{status} {res.name:<36} relerr={res.error:.3e} tol={res.tolerance:.0e}")
        ok &= res.passed
    return EXIT_OK if ok else EXIT_CONFIG


COMMANDS = {"ground-state": cmd_ground_state, "classify": cmd_classify, "evolve": cmd_evolve}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fnls",
        description="Ground states, threshold classification and split-step runs for the focusing fractional NLS.",
        epilog=config_help() + "\n\nexit codes: 0 ok, 1 usage/config error, 2 solver failure, 3 halted on blowup;"
        "\nFNLS_THREADS caps FFT worker threads.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    ap.add_argument("command", choices=["ground-state", "classify", "evolve", "check"])
    ap.add_argument("--config", type=Path, help="flat key = value configuration file")
    ap.add_argument("--out", type=Path, help="output directory (overrides out_dir)")
    ap.add_argument("-q", "--quiet", action="store_true", help="only print warnings and errors")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "check":
        return cmd_check()
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out if args.out else Path(cfg.out_dir)
    try:
        return COMMANDS[args.command](cfg, out)
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
