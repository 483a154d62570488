"""Command line interface: ``cornercut {certify,points,net} -c cfg [-o dir]``.

Exit codes: 0 all bound checks pass, 1 a bound check failed, 2 convergence
not certified and ``force`` not set (also argparse usage errors),
4 configuration or I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, parse_config
from .exceptions import ConfigError, CornerCutError, NotCertified
from .io import load_net_file, polyline_csv, report_json, surface_csv
from .nets import (
    EvalBudget, GridT, net_from_function, net_successive_distance, run_nets, sample_grid,
    surface_distance,
)
from .points import (
    mesh_size, run_points, successive_sup_distance, sup_distance,
)
from .registry import lookup
from .weights import certify, certify_nets

log = logging.getLogger("cornercut")

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_UNCERTIFIED = 2
EXIT_CONFIG = 4


def _check(name, k, measured, bound, tol):
    return {
        "name": name,
        "k": k,
        "measured": measured,
        "bound": bound,
        "pass": bool(measured <= bound + tol),
    }


def _run_certify(cfg: RunConfig) -> dict:
    report = {"mode": "certify"}
    if cfg.weights_s is not None and cfg.weights_t is not None:
        cert = certify_nets(cfg.schedule("weights_s"), cfg.schedule("weights_t"))
        report["certificate_nets"] = cert.to_dict()
    if cfg.weights is not None:
        report["certificate"] = certify(cfg.schedule("weights")).to_dict()
    report["checks"] = []
    return report


def _run_points(cfg: RunConfig, out: Path | None) -> dict:
    schedule = cfg.schedule("weights")
    P0 = cfg.load_points()
    run = run_points(P0, cfg.params, schedule, cfg.levels, closed=cfg.closed, force=cfg.force)
    L = run.lipschitz_L if cfg.lipschitz is None else float(cfg.lipschitz)
    L_kind = "computed" if cfg.lipschitz is None else "user-supplied"
    d0 = mesh_size(run.levels[0])
    mu = run.certificate.mu_sup
    checks = []
    for k in range(run.K):
        measured = successive_sup_distance(run, k, cfg.samples)
        bound = 0.5 * L * mesh_size(run.levels[k + 1])
        checks.append(_check("successive", k, measured, bound, cfg.tolerance))
    if mu < 1:
        for k in range(run.K):
            measured = sup_distance(run.levels[k], run.levels[-1], cfg.samples)
            bound = L * d0 * mu ** (k + 1) / (2 * (1 - mu))
            checks.append(_check("tail", k, measured, bound, cfg.tolerance))
    if out is not None:
        (out / "points_final.csv").write_text(polyline_csv(run.levels[-1]))
        for lv in run.levels:
            (out / f"breakpoints_level_{lv.level}.csv").write_text(polyline_csv(lv))
    return {
        "mode": "points",
        "certificate": run.certificate.to_dict(),
        "forced": run.forced,
        "closed": cfg.closed,
        "levels": [
            {"k": lv.level, "n_points": len(lv.u), "mesh_size": mesh_size(lv)}
            for lv in run.levels
        ],
        "lipschitz": {"value": L, "kind": L_kind, "from_data": run.lipschitz_L},
        "checks": checks,
    }


def _initial_net(cfg: RunConfig):
    spec = cfg.net
    if "file" in spec:
        return load_net_file(cfg.resolve_path(spec["file"])), None
    try:
        fn = lookup(spec["function"], spec.get("coefficients"))
    except KeyError as exc:
        raise ConfigError(f"/net/function: {exc.args[0]}") from exc
    if "s_knots" in spec and "t_knots" in spec:
        grid = GridT(spec["s_knots"], spec["t_knots"])
    else:
        sw = spec.get("s_window")
        tw = spec.get("t_window")
        s = spec.get("s_knots") or np.arange(sw[0], sw[1] + 1)
        t = spec.get("t_knots") or np.arange(tw[0], tw[1] + 1)
        grid = GridT(s, t)
    L = None
    if fn.bmsdd is not None:
        L = fn.bmsdd((grid.s[0], grid.s[-1]), (grid.t[0], grid.t[-1]))
    return net_from_function(fn.F, grid), L


def _run_net(cfg: RunConfig, out: Path | None) -> dict:
    gs = cfg.schedule("weights_s")
    gt = cfg.schedule("weights_t")
    net0, analytic_L = _initial_net(cfg)
    user_L = cfg.bmsdd if cfg.bmsdd is not None else analytic_L
    run = run_nets(
        net0, gs, gt, cfg.levels, force=cfg.force, bmsdd_L=user_L,
        bmsdd_samples=cfg.bmsdd_samples, resample=cfg.resample, budget=EvalBudget(),
    )
    if cfg.bmsdd is not None:
        kind = "user-supplied"
    elif analytic_L is not None:
        kind = "exact"
    else:
        kind = "estimated"
    checks = []
    measurements = []
    for k in range(run.K):
        measured = net_successive_distance(run, k, cfg.samples)
        if run.tail_bounds is None:
            measurements.append({"name": "successive", "k": k, "measured": measured})
            continue
        checks.append(_check("successive", k, measured, run.successive_bound(k), cfg.tolerance))
        checks.append(_check("tail", k, measured, run.tail_bounds[k], cfg.tolerance))
    if out is not None:
        R = run.nets[-1].grid.rect
        S, T = sample_grid(R, cfg.samples)
        (out / "surface_first.csv").write_text(surface_csv(S, T, run.surfaces[0].eval(S, T)))
        (out / "surface_last.csv").write_text(surface_csv(S, T, run.surfaces[-1].eval(S, T)))
    report = {
        "mode": "net",
        "certificate": run.certificate.to_dict(),
        "forced": run.forced,
        "bounds_omitted": run.tail_bounds is None,
        "levels": [
            {"k": n.level, "n_s": len(n.grid.s), "n_t": len(n.grid.t),
             "h_s": n.grid.h_s, "h_t": n.grid.h_t}
            for n in run.nets
        ],
        "bmsdd": {"value": run.bmsdd_L, "kind": kind},
        "H": run.H,
        "resampled": run.resampled,
        "notes": run.notes,
        "checks": checks,
    }
    if measurements:
        report["measurements"] = measurements
    if run.K:
        report["first_last_distance"] = surface_distance(
            run.surfaces[0], run.surfaces[-1], run.nets[-1].grid.rect, cfg.samples
        )
    return report


def run(cfg: RunConfig, out: Path | None = None) -> tuple[dict, int]:
    """Execute a validated configuration; returns the report and the exit code."""
    start = time.perf_counter()
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    if cfg.mode == "certify":
        report = _run_certify(cfg)
    elif cfg.mode == "points":
        report = _run_points(cfg, out)
    else:
        report = _run_net(cfg, out)
    report["all_pass"] = all(c["pass"] for c in report["checks"])
    report["runtime"] = {
        "version": __version__,
        "seconds": time.perf_counter() - start,
        "levels": cfg.levels,
        "samples": cfg.samples,
    }
    if out is not None:
        (out / "report.json").write_text(report_json(report))
    return report, EXIT_OK if report["all_pass"] else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cornercut",
        description="Corner cutting of points and nets of functions with convergence checks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, hlp in (
        ("certify", "certify a weight schedule"),
        ("points", "refine a point sequence"),
        ("net", "refine a net of functions"),
    ):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("-c", "--config", required=True, help="JSON configuration file")
        p.add_argument("-o", "--output", help="output directory")
        p.add_argument("-K", "--levels", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--margin", type=float)
        p.add_argument("--tolerance", type=float)
        p.add_argument("--force", action="store_true", default=None)
        p.add_argument("--lipschitz", type=float)
        p.add_argument("--bmsdd", type=float)
        p.add_argument("--resample", type=int)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cfg_path = Path(args.config)
    try:
        cfg = parse_config(cfg_path.read_text(), mode=args.command,
                           base_dir=str(cfg_path.parent))
        cfg = cfg.with_overrides(
            levels=args.levels, samples=args.samples, margin=args.margin,
            tolerance=args.tolerance, force=args.force, lipschitz=args.lipschitz,
            bmsdd=args.bmsdd, resample=args.resample, output=args.output,
        )
        out = Path(cfg.output) if cfg.output else None
        if out is not None and not out.is_absolute() and args.output is None:
            out = cfg.resolve_path(cfg.output)
        report, code = run(cfg, out)
    except NotCertified as exc:
        print(f"cornercut: not certified: {exc} (use --force)", file=sys.stderr)
        return EXIT_UNCERTIFIED
    except (ConfigError, OSError) as exc:
        print(f"cornercut: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CornerCutError as exc:
        print(f"cornercut: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.mode == "certify" or out is None:
        print(report_json(report), end="")
    failed = [c for c in report["checks"] if not c["pass"]]
    for c in failed:
        log.warning("bound violated: %s k=%d measured=%r bound=%r",
                    c["name"], c["k"], c["measured"], c["bound"])
    return code


if __name__ == "__main__":
    sys.exit(main())
