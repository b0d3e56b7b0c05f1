"""Command-line front end.

    steadypop <solve|scan|certify|diagnose|verify> --config <path>
              [--out <dir>] [--tol <real>] [--profile <path>]

Exit codes: 0 success, 1 runtime error, 2 config/input error,
3 no equilibrium found, 4 verification failure.

All numbers are written with 12 significant digits and rows are sorted, so
identical configs produce byte-identical outputs. The CLI performs no
arithmetic beyond formatting.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import RunConfig, load_config
from .errors import ConfigError, ParameterError, SteadypopError
from .grid import DensityProfile, integrate
from .kernel import (
    birth_G,
    compactness_diagnostics,
    make_context,
    net_reproduction_R,
    residual,
    survival_pi,
)
from .model import random_onion_samples, validate_hypotheses
from .solver import certify, scan_roots, solve_all

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_NO_EQUILIBRIUM = 3
EXIT_VERIFY_FAIL = 4


def _fmt(value) -> str:
    return "%.12g" % value


def _write(path: str, lines) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _ensure_out(run: RunConfig) -> str:
    os.makedirs(run.out_dir, exist_ok=True)
    return run.out_dir


def cmd_solve(run: RunConfig) -> int:
    ctx = make_context(run.model, run.grid)
    scan, results = solve_all(ctx, run.solver)
    out = _ensure_out(run)

    rows = ["lambda_star,P_star,R_at_u,residual_l1"]
    for r in results:
        rows.append(",".join(_fmt(v) for v in (r.lambda_star, r.P_star, r.R_at_u, r.residual_l1)))
    _write(os.path.join(out, "equilibria.csv"), rows)

    for i, r in enumerate(results, start=1):
        lines = ["x,u_star,v_star,pi,e1,e2"]
        pi = survival_pi(ctx, r.u_star)
        for j, x in enumerate(ctx.grid.nodes):
            lines.append(",".join(_fmt(v) for v in (
                x, r.u_star.values[j], r.v_star.values[j], pi.values[j],
                ctx.e1.values[j], ctx.e2.values[j])))
        _write(os.path.join(out, "profile_%03d.csv" % i), lines)

    if scan.degenerate:
        print("degenerate family: residual ~ 0 across the scan; no discrete roots reported")
    for r in results:
        print("equilibrium lambda_star=%s P_star=%s residual=%s"
              % (_fmt(r.lambda_star), _fmt(r.P_star), _fmt(r.residual_l1)))
    if not results:
        print("no positive equilibrium found in the scanned range")
        return EXIT_NO_EQUILIBRIUM
    return EXIT_OK


def cmd_scan(run: RunConfig) -> int:
    ctx = make_context(run.model, run.grid)
    scan = scan_roots(ctx, run.solver)
    out = _ensure_out(run)
    rows = ["lambda,residual,status"]
    for i, lam in enumerate(scan.lambdas):
        res = scan.residuals[i]
        status = "failed" if i in scan.failed else "ok"
        rows.append("%s,%s,%s" % (_fmt(lam), "nan" if np.isnan(res) else _fmt(res), status))
    _write(os.path.join(out, "scan.csv"), rows)
    if scan.degenerate:
        print("degenerate family: residual ~ 0 across the scan")
    for lo, hi in scan.brackets:
        print("bracket [%s, %s]" % (_fmt(lo), _fmt(hi)))
    return EXIT_OK if scan.brackets else EXIT_NO_EQUILIBRIUM


def cmd_certify(run: RunConfig) -> int:
    ctx = make_context(run.model, run.grid)
    cert = certify(ctx, run.solver)
    out = _ensure_out(run)
    lines = [
        "kind = %s" % cert.kind,
        "R0 = %s" % _fmt(cert.R0),
        "rho0_estimate = %s" % ("none" if cert.rho0_estimate is None else _fmt(cert.rho0_estimate)),
        "M = %s" % _fmt(cert.M),
    ]
    for key in sorted(cert.evidence):
        value = cert.evidence[key]
        if isinstance(value, tuple):
            value = " ".join(_fmt(v) if isinstance(v, float) else str(v) for v in value)
        lines.append("evidence.%s = %s" % (key, value))
    _write(os.path.join(out, "certificate.txt"), lines)
    print("certificate: %s (R0=%s)" % (cert.kind, _fmt(cert.R0)))
    return EXIT_OK


def cmd_diagnose(run: RunConfig) -> int:
    ctx = make_context(run.model, run.grid)
    rng = np.random.default_rng(run.solver.seed)
    lambdas = [10.0**k for k in range(-3, 4)]
    samples = random_onion_samples(run.model.bounds, run.grid, lambdas, 2, rng)
    report = validate_hypotheses(run.model, run.grid, samples)
    rows = ["check,verdict,detail"]
    for check, verdict, detail in report.rows():
        rows.append("%s,%s,%s" % (check, verdict, detail.replace(",", ";")))
    if run.grid.is_uniform:
        comp = compactness_diagnostics(
            ctx, samples[:6], h_list=(0.1, 0.01, 0.001), T=0.5 * run.grid.x_max
        )
        for check, verdict, detail in comp.rows():
            rows.append("%s,%s,%s" % (check, verdict, detail.replace(",", ";")))
    else:
        rows.append("translation,skipped,non-uniform grid has no translation diagnostics")
    out = _ensure_out(run)
    _write(os.path.join(out, "diagnostics.txt"), rows)
    for line in rows[1:]:
        print(line)
    return EXIT_OK


def _read_profile(path: str, grid) -> DensityProfile:
    xs, us = [], []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for raw in fh:
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.replace(",", " ").split()
                if parts[0].lower() in ("x", "x,u"):
                    continue
                if len(parts) < 2:
                    raise ParameterError("profile rows need two columns: x u")
                xs.append(float(parts[0]))
                us.append(float(parts[1]))
    except (OSError, ValueError) as exc:
        raise ParameterError("cannot read profile %s: %s" % (path, exc))
    if len(xs) < 2:
        raise ParameterError("profile file %s has fewer than 2 samples" % path)
    xs = np.asarray(xs)
    us = np.asarray(us)
    order = np.argsort(xs)
    values = np.interp(grid.nodes, xs[order], us[order], left=0.0, right=0.0)
    if np.any(values < 0):
        raise ParameterError("profile contains negative densities")
    return DensityProfile(grid, values)


def cmd_verify(run: RunConfig, profile_path: str, tol: float) -> int:
    ctx = make_context(run.model, run.grid)
    u = _read_profile(profile_path, run.grid)
    res = residual(ctx, u)
    print("residual_l1 = %s" % _fmt(res))
    print("R = %s" % _fmt(net_reproduction_R(ctx, u)))
    print("G = %s" % _fmt(birth_G(ctx, u)))
    print("P = %s" % _fmt(integrate(run.grid, u)))
    return EXIT_OK if res < tol else EXIT_VERIFY_FAIL


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steadypop",
        description="Stationary solutions of quasilinear size-structured population models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "scan", "certify", "diagnose", "verify"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="run configuration file")
        p.add_argument("--out", default=None, help="output directory")
        if name == "verify":
            p.add_argument("--profile", required=True, help="profile file with columns x,u")
            p.add_argument("--tol", type=float, default=1e-5,
                           help="residual threshold for acceptance")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        run = load_config(args.config, out_dir=args.out)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "solve":
            return cmd_solve(run)
        if args.command == "scan":
            return cmd_scan(run)
        if args.command == "certify":
            return cmd_certify(run)
        if args.command == "diagnose":
            return cmd_diagnose(run)
        try:
            return cmd_verify(run, args.profile, args.tol)
        except ParameterError as exc:
            print("input error: %s" % exc, file=sys.stderr)
            return EXIT_CONFIG
    except SteadypopError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_RUNTIME


def entry() -> None:  # console script
    sys.exit(main())


if __name__ == "__main__":
    entry()
