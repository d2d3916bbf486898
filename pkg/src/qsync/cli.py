"""Command line entry point.

Exit codes: 0 success, 1 a check failed, 2 usage or configuration error,
3 the solver stopped.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import reduced as red
from .config import build_params, build_state, load_config, load_reduced_config
from .dynamics import IdentityMonitor, run
from .errors import ConfigError, DomainError, FormatError, QsyncError, SolverError, UnknownScenarioError
from .experiments import (
    CATALOG,
    CheckResult,
    _identity_checks,
    _invariant_check,
    _jsonable_tree,
    run_scenario,
)
from .formats import load_checkpoint, save_checkpoint
from .observables import detect_regime
from .outputs import write_json, write_run_outputs

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_SOLVER = 3

ORACLE_HORIZON = 1.0
ORACLE_C = 100.0  # split vs method-of-lines tolerance is ORACLE_C * dt^2

log = logging.getLogger("qsync")


def _err(msg: str):
    print(f"qsync: {msg}", file=sys.stderr)


def _summarize(checks: list[CheckResult]):
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {c.name} measured={c.measured} threshold={c.threshold} {c.note}".rstrip())


def _exit_for(checks: list[CheckResult], error) -> int:
    if error is not None:
        return EXIT_SOLVER
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECK_FAILED


# ---------------------------------------------------------------- commands


def cmd_list(args) -> int:
    for name, sc in CATALOG.items():
        print(f"{name}\t{sc.summary}")
    return EXIT_OK


def cmd_scenario(args) -> int:
    out = Path(args.out) if args.out else Path("qsync_out") / f"{args.name}_seed{args.seed}"
    try:
        report = run_scenario(args.name, seed=args.seed, out_dir=out)
    except UnknownScenarioError as exc:
        _err(str(exc))
        return EXIT_USAGE
    _summarize(report.checks)
    print(f"outputs written to {out}")
    solver_failed = any(c.name.startswith("solver_completed") and not c.passed for c in report.checks)
    if solver_failed:
        return EXIT_SOLVER
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    params = build_params(cfg)
    state = load_checkpoint(args.resume) if args.resume else build_state(cfg)
    if state.n_osc != cfg.model.n_oscillators or state.grid != cfg.grid.build():
        raise ConfigError("checkpoint does not match the configured grid or ensemble size")
    mon = IdentityMonitor(params)
    res = run(state, params, sample_every=cfg.output.sample_every, monitor=mon)
    checks = []
    if res.error is not None:
        checks.append(CheckResult("solver_completed", False, res.error.time, note=str(res.error)))
    else:
        checks.append(CheckResult("solver_completed", True, res.final_state.time))
        equal_freq = np.ptp(params.omegas_for(state.n_osc)) == 0
        checks += _identity_checks(mon, params, zeta=bool(equal_freq))
    checks.append(_invariant_check(res.frames))

    out = Path(args.out or cfg.output.directory)
    files = write_run_outputs(out, {"main": res.frames}, cfg.model.kind, cfg.output.formats)
    files["final.qsyn"] = str(save_checkpoint(out / "final.qsyn", res.final_state))
    report = {
        "command": "run",
        "passed": all(c.passed for c in checks),
        "checks": [c.to_dict() for c in checks],
        "preflight": [
            {"name": c.name, "status": c.status, "value": c.value, "message": c.message}
            for c in (res.preflight.checks if res.preflight else [])
        ],
        "steps_taken": res.steps_taken,
        "boundary_max": res.boundary_max,
        "files": files,
    }
    if "json" in cfg.output.formats:
        files["report.json"] = str(out / "report.json")
        write_json(out / "report.json", _jsonable_tree(report))
    _summarize(checks)
    return _exit_for(checks, res.error)


def cmd_oracle(args) -> int:
    cfg = load_config(args.config)
    params = build_params(cfg)
    horizon = min(params.t_final, ORACLE_HORIZON)
    params = params.with_(t_final=horizon)
    state = build_state(cfg)
    split = run(state, params, sample_every=10**9)
    if split.error is not None:
        _err(f"split-step run stopped: {split.error}")
        return EXIT_SOLVER
    mol = run(state, params, sample_every=10**9, check_preflight=False, stepper="oracle")
    if mol.error is not None:
        _err(f"method-of-lines run stopped: {mol.error}")
        return EXIT_SOLVER
    dev = float(np.max(np.abs(split.final_state.psi - mol.final_state.psi)))
    tol = ORACLE_C * params.dt**2
    check = CheckResult("oracle_agreement", dev < tol, dev, tol, f"horizon {horizon}")
    out = Path(args.out or cfg.output.directory)
    write_json(
        out / "oracle_report.json",
        _jsonable_tree({"command": "oracle-check", "passed": check.passed, "checks": [check.to_dict()]}),
    )
    _summarize([check])
    return _exit_for([check], None)


def cmd_reduced(args) -> int:
    cfg = load_reduced_config(args.params)
    p = red.ReducedParams(cfg.omega, cfg.k, cfg.mu, cfg.c)
    s0 = red.ReducedState(complex(*cfg.z0), *cfg.masses, *cfg.thetas)
    try:
        traj = red.integrate_reduced(s0, p, cfg.dt, cfg.t_final, cfg.sample_every)
    except DomainError as exc:
        raise SolverError(str(exc), time=None) from None
    lam_cap = red.lambda_param(cfg.omega, cfg.k, traj.lambda1[-1], traj.lambda2[-1])
    expected = red.classify_numeric(lam_cap, cfg.omega)
    try:
        detected = detect_regime(traj.times, traj.z)
        detected_label = type(detected).__name__
    except ValueError:
        detected, detected_label = None, "too few samples"
    mod_excess = float(np.max(np.abs(traj.z)) - 1.0)
    drift = float(np.max(np.abs(traj.theta1 + traj.theta2 - traj.theta1[0] - traj.theta2[0])))
    checks = [
        CheckResult("unit_disk", mod_excess <= 1e-9, mod_excess, 1e-9),
        CheckResult("theta_sum_conserved", drift <= 1e-10, drift, 1e-10),
    ]
    details = {
        "lambda_cap": lam_cap,
        "regime_expected": expected.label,
        "limits_expected": list(expected.limits),
        "rate_expected": expected.rate,
        "regime_detected": detected_label,
        "z_final": traj.z[-1],
    }
    if detected_label == "Periodic":
        details["period_estimate"] = detected.period_estimate
    out = Path(args.out or cfg.output.directory)
    frames = red.trajectory_frames(traj)
    files = write_run_outputs(out, {"main": frames}, "reduced", cfg.output.formats)
    if "json" in cfg.output.formats:
        files["report.json"] = str(out / "report.json")
        write_json(
            out / "report.json",
            _jsonable_tree(
                {
                    "command": "reduced",
                    "passed": all(c.passed for c in checks),
                    "checks": [c.to_dict() for c in checks],
                    "details": details,
                    "files": files,
                }
            ),
        )
    _summarize(checks)
    print(f"Lambda = {lam_cap:.6g}: expected {expected.label}, detected {detected_label}")
    return _exit_for(checks, None)


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qsync", description="Coupled Schrodinger-Lohe oscillator runs.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a JSON configuration")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--resume", help="start from a checkpoint written by an earlier run")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("scenario", help="run a catalog scenario and its checks")
    p.add_argument("name")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output directory (default qsync_out/<name>_seed<S>)")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("list-scenarios", help="print the scenario catalog")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("oracle-check", help="compare split-step and method-of-lines integrators")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("reduced", help="integrate the two-oscillator correlation system")
    p.add_argument("params")
    p.add_argument("--out", help="output directory (overrides the parameter file)")
    p.set_defaults(func=cmd_reduced)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (ConfigError, DomainError, FormatError, UnknownScenarioError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except SolverError as exc:
        _err(f"solver error: {exc}")
        return EXIT_SOLVER
    except QsyncError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except OSError as exc:
        _err(str(exc))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
