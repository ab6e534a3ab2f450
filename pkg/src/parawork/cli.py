"""Command-line entry point: ``parawork {workspace,jacobian,optimize,check}``.

Exit codes: 0 success, 1 failed checks, 2 configuration error, 3 mechanism
error (invalid parameters or singular Jacobian), 4 unreachable pose.
All angles are in radians.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from parawork import __version__
from parawork.checks import run_checks
from parawork.config import ConfigError, RunConfig, load_config
from parawork.homojac import build_jdh
from parawork.mechanisms import SingularLimb, Unreachable
from parawork.optimize import OptResult, optimize_decoupled, optimize_full
from parawork.screwcore import SingularMatrix
from parawork.workspace import WorkspaceBoundary, boundary_search

EXIT_CHECKS = 1
EXIT_CONFIG = 2
EXIT_MECHANISM = 3
EXIT_UNREACHABLE = 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def fmt(x) -> str:
    """Shortest round-trip decimal, independent of locale."""
    return repr(float(x))


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    return v


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    return _json_value(obj)


def write_json(path: Path, data) -> None:
    path.write_text(json.dumps(_clean(data), indent=2, sort_keys=True, allow_nan=False) + "\n", newline="\n")


def write_boundary_csv(path: Path, b: WorkspaceBoundary) -> None:
    lines = ["i,j,z,epsilon,psi,theta,cond"]
    for i in range(b.psi.shape[0]):
        for j in range(b.psi.shape[1]):
            lines.append(",".join([
                str(i), str(j), fmt(b.z[i]), fmt(b.eps[j]),
                fmt(b.psi[i, j]), fmt(b.theta[i, j]), fmt(b.cond[i, j]),
            ]))
    path.write_text("\n".join(lines) + "\n", newline="\n")


def workspace_summary(cfg: RunConfig, b: WorkspaceBoundary) -> dict:
    return {
        "volume": b.total_volume,
        "slice_volume": [float(v) for v in b.slice_volume],
        "grid": cfg.grid.to_dict(),
        "mechanism": {"type": cfg.mechanism_type, "params": cfg.mechanism_params},
        "mode": cfg.grid.boundary_mode,
        "evaluations": b.evaluations,
        "version": __version__,
    }


def write_trace_csv(path: Path, res: OptResult, names) -> None:
    lines = [",".join(["iter", "evals", "mesh", *names, "V"])]
    for it, ev, mesh, rho, v in res.trace:
        lines.append(",".join([str(it), str(ev), fmt(mesh), *(fmt(r) for r in rho), fmt(v)]))
    path.write_text("\n".join(lines) + "\n", newline="\n")


def opt_summary(cfg: RunConfig, res: OptResult) -> dict:
    out = {
        "rho_opt": [float(v) for v in res.rho_opt],
        "V_opt": res.V_opt,
        "evaluations": res.evaluations,
        "iterations": res.iterations,
        "stop_reason": res.stop_reason,
        "method": cfg.optimize.method,
        "version": __version__,
    }
    if res.V_verify is not None:
        out["V_verify"] = res.V_verify
    if res.stages:
        out["stages"] = [
            {"rho_opt": [float(v) for v in s.rho_opt], "V_opt": s.V_opt, "evaluations": s.evaluations,
             "iterations": s.iterations}
            for s in res.stages
        ]
    return out


def _mechanism(cfg: RunConfig):
    try:
        return cfg.build_mechanism()
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_MECHANISM, f"mechanism: {exc}") from exc


def _out_dir(cfg: RunConfig, override) -> Path:
    d = Path(override) if override else Path(cfg.output.directory)
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_workspace(cfg: RunConfig, out=None, jobs=None) -> Path:
    mech = _mechanism(cfg)
    b = boundary_search(mech, cfg.grid, jobs=jobs)
    d = _out_dir(cfg, out)
    write_boundary_csv(d / "boundary.csv", b)
    write_json(d / "summary.json", workspace_summary(cfg, b))
    print(f"volume {fmt(b.total_volume)} written to {d}")
    return d


def parse_pose(text: str) -> tuple[float, float, float]:
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, f"--pose must be 'z,psi,theta', got {text!r}") from exc
    if len(parts) != 3 or not all(math.isfinite(v) for v in parts):
        raise CliError(EXIT_CONFIG, f"--pose must be three finite numbers, got {text!r}")
    return tuple(parts)


def jacobian_report(cfg: RunConfig, pose) -> dict:
    mech = _mechanism(cfg)
    z, psi, theta = pose
    if cfg.grid.normalize_z:
        z = z * mech.z_max
    try:
        state = mech.solve(z, psi, theta, strict=True)
        bundle = build_jdh(state, mech, strict=True)
    except Unreachable as exc:
        raise CliError(EXIT_UNREACHABLE, str(exc)) from exc
    except (SingularLimb, SingularMatrix) as exc:
        raise CliError(EXIT_MECHANISM, f"singular Jacobian: {exc}") from exc
    out = bundle.to_dict()
    out["pose"] = {"z": float(z), "psi": psi, "theta": theta}
    out["mechanism"] = cfg.mechanism_type
    return out


def cmd_jacobian(cfg: RunConfig, pose, out=None) -> dict:
    report = jacobian_report(cfg, pose)
    text = json.dumps(_clean(report), indent=2, sort_keys=True, allow_nan=False) + "\n"
    if out:
        d = _out_dir(cfg, out)
        (d / "jacobian.json").write_text(text, newline="\n")
    else:
        sys.stdout.write(text)
    return report


def cmd_optimize(cfg: RunConfig, out=None, jobs=None) -> OptResult:
    if cfg.optimize is None:
        raise CliError(EXIT_CONFIG, "config has no 'optimize' block")
    mech = _mechanism(cfg)
    settings = cfg.optimize
    try:
        opt = settings.opt_config(mech)
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, f"optimize: {exc}") from exc
    if settings.method == "decoupled":
        if mech.kind != "tmech":
            raise CliError(EXIT_CONFIG, "the decoupled method applies to the T-mechanism only")
        res = optimize_decoupled(mech, opt, cfg.grid, stage3=settings.stage3, jobs=jobs,
                                 coarse_nm=settings.coarse_nm)
    else:
        res = optimize_full(mech, opt, cfg.grid, jobs=jobs, coarse_nm=settings.coarse_nm)
    d = _out_dir(cfg, out)
    write_trace_csv(d / "opt_trace.csv", res, mech.design_names)
    write_json(d / "opt_result.json", opt_summary(cfg, res))
    print(f"V_opt {fmt(res.V_opt)} after {res.evaluations} evaluations, written to {d}")
    return res


def cmd_check(cfg: RunConfig) -> bool:
    mech = _mechanism(cfg)
    results = run_checks(mech)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print("ALL PASS" if ok else "SOME CHECKS FAILED")
    return ok


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="parawork", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"parawork {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True, jobs=True):
        sp.add_argument("-c", "--config", required=True, help="JSON run configuration")
        if out:
            sp.add_argument("-o", "--out", help="output directory (overrides output.directory)")
        if jobs:
            sp.add_argument("--jobs", type=int, default=None,
                            help="worker processes for the boundary search (default: all cores)")

    common(sub.add_parser("workspace", help="boundary search and volume"))
    sp = sub.add_parser("jacobian", help="Jacobian bundle at one pose")
    common(sp, jobs=False)
    sp.add_argument("--pose", required=True,
                    help="z,psi,theta with angles in radians (1 deg = 0.01745 rad); "
                         "z is normalized when grid.normalize_z is set")
    common(sub.add_parser("optimize", help="pattern-search design optimization"))
    common(sub.add_parser("check", help="run the invariant and oracle suite"), out=False, jobs=False)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "workspace":
            cmd_workspace(cfg, args.out, args.jobs)
        elif args.command == "jacobian":
            cmd_jacobian(cfg, parse_pose(args.pose), args.out)
        elif args.command == "optimize":
            cmd_optimize(cfg, args.out, args.jobs)
        elif args.command == "check":
            return 0 if cmd_check(cfg) else EXIT_CHECKS
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    return 0


if __name__ == "__main__":
    sys.exit(main())
