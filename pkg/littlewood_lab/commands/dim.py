"""Implementation of `littlewood-lab dim` commands."""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from ..core import dimension
from ..core.artifacts import write_csv
from ..core.errors import ContractError
from .base import add_common_options, add_group, announce, run_command, wrote


def register(subparsers: argparse._SubParsersAction, config) -> None:
    group = add_group(subparsers, "dim", "Box-dimension estimates")

    estimate_parser = group.add_parser("estimate", help="Box-dimension slope of a point cloud")
    source = estimate_parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--points", help="CSV file with one point per row")
    source.add_argument("--cantor", type=int, metavar="LEVEL", help="Middle-thirds Cantor endpoints")
    source.add_argument("--interval", type=int, metavar="COUNT", help="COUNT equally spaced points on [0, 1]")
    estimate_parser.add_argument("--eps-max", type=float, default=0.125, help="Largest eps in the schedule")
    estimate_parser.add_argument("--count", type=int, default=8, help="Schedule length")
    estimate_parser.add_argument("--ratio", type=float, help=f"Schedule ratio (default {config['dimension']['ratio']})")
    add_common_options(estimate_parser)
    estimate_parser.set_defaults(func=lambda args: run_command(args, "dim estimate", _cmd_estimate))

    scan_parser = group.add_parser("scan-bad", help="Transversal scan of pairs with bounded quadrant orbits")
    scan_parser.add_argument("--rho", type=float, required=True, help="K_rho threshold")
    scan_parser.add_argument("--T", type=float, required=True, help="Horizon in r and s")
    scan_parser.add_argument("--grid", type=int, default=512, help="Grid resolution per axis")
    scan_parser.add_argument("--method", choices=("exact", "sampled"), default="exact", help="Survivor criterion")
    scan_parser.add_argument("--survivors", help="Also write surviving (u, v) pairs to this CSV")
    add_common_options(scan_parser)
    scan_parser.set_defaults(func=lambda args: run_command(args, "dim scan-bad", _cmd_scan_bad))


def _load_cloud(args) -> dimension.PointCloud:
    if args.cantor is not None:
        return dimension.cantor_endpoints(args.cantor)
    if args.interval is not None:
        return dimension.interval_grid(args.interval)
    path = Path(args.points)
    if not path.exists():
        raise ContractError(f"Points file not found: {path}")
    try:
        return dimension.PointCloud(np.loadtxt(path, delimiter=",", ndmin=2))
    except ValueError as exc:
        raise ContractError(f"Cannot read points from {path}: {exc}") from exc


def _report(stats, manifest) -> None:
    bound = dimension.hausdorff_note(stats.slope)
    manifest.record(slope=stats.slope, intercept=stats.intercept, fit_warning=stats.warning, hausdorff_bound=bound.bound)
    announce("Slope", f"{stats.slope:.6g}")
    announce("Hausdorff bound", bound.note)


def _cmd_estimate(args, config, manifest, progress) -> None:
    cloud = _load_cloud(args)
    ratio = args.ratio if args.ratio is not None else float(config.get("dimension.ratio"))
    schedule = dimension.geometric_schedule(args.eps_max, args.count, ratio)
    stats = dimension.box_dim_estimate(
        cloud, schedule,
        threads=config.threads,
        residual_warning=float(config.get("dimension.residual_warning")),
    )
    _report(stats, manifest)
    if config.out:
        write_csv(config.out, stats.headers, stats.rows)
        wrote(config, "Separated counts")


def _cmd_scan_bad(args, config, manifest, progress) -> None:
    scan = dimension.transversal_bad_scan(
        args.rho, args.T, args.grid,
        method=args.method,
        step=float(config.get("orbit.step")),
        threads=config.threads,
        progress_callback=progress,
    )
    manifest.record(survivors=len(scan.survivors), note=scan.note)
    announce("Survivors", f"{len(scan.survivors)} of {args.grid * args.grid}")
    if scan.estimate is None:
        announce("Slope", scan.note)
    else:
        _report(scan.estimate, manifest)
    if config.out:
        rows = scan.estimate.rows if scan.estimate is not None else []
        write_csv(config.out, ["epsilon", "count"], rows)
        wrote(config, "Separated counts")
    if args.survivors:
        write_csv(Path(args.survivors), ["u", "v"], scan.survivors.points.tolist())
