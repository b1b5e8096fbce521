"""Implementation of `littlewood-lab littlewood` commands."""

from __future__ import annotations

import argparse

from ..core import littlewood as lw
from ..core.artifacts import write_csv, write_json
from ..core.console import print_table, success, warning
from ..core.errors import NumericError
from ..core.expressions import parse_expression
from .base import add_common_options, add_group, announce, run_command, wrote


def register(subparsers: argparse._SubParsersAction, config) -> None:
    group = add_group(subparsers, "littlewood", "Littlewood products and the orbit correspondence")

    scan_parser = group.add_parser("scan", help="Scan n<nu><nv> for n <= N")
    scan_parser.add_argument("--u", required=True, help="u as sqrt(k), cbrt(k), p/q or a decimal")
    scan_parser.add_argument("--v", required=True, help="v as sqrt(k), cbrt(k), p/q or a decimal")
    scan_parser.add_argument("--N", type=int, required=True, help="Scan length")
    scan_parser.add_argument(
        "--one-dim",
        action="store_true",
        help="Also report min n<nu> and n<nu> along Fibonacci n",
    )
    add_common_options(scan_parser)
    scan_parser.set_defaults(func=lambda args: run_command(args, "littlewood scan", _cmd_scan))

    roundtrip_parser = group.add_parser("roundtrip", help="Check both correspondence directions on seeded pairs")
    roundtrip_parser.add_argument("--pairs", type=int, default=50, help="Number of seeded (u, v) pairs")
    roundtrip_parser.add_argument("--eps", help=f"Threshold eps (default {config['littlewood']['eps']})")
    roundtrip_parser.add_argument("--extent", type=float, help="Grid extent in r and s")
    roundtrip_parser.add_argument("--step", type=float, help="Grid step in r and s")
    add_common_options(roundtrip_parser)
    roundtrip_parser.set_defaults(func=lambda args: run_command(args, "littlewood roundtrip", _cmd_roundtrip))


def _cmd_scan(args, config, manifest, progress) -> None:
    pair = lw.TargetPair.parse(args.u, args.v)
    result = lw.littlewood_scan(pair, args.N, chunk=int(config.get("littlewood.chunk")), progress_callback=progress)
    announce("Pair", pair.describe())
    announce("Min product", f"{result.min_product:.12g} at n={result.argmin}")
    manifest.record(min_product=result.min_product, argmin=result.argmin, records=len(result.records))
    if args.one_dim:
        best, at = lw.dirichlet_scan_1d(pair.u, args.N)
        fib = lw.fibonacci_numbers(args.N)
        profile = lw.approximation_profile(pair.u, fib) if fib else []
        announce("Min n<nu>", f"{best:.12g} at n={at}")
        manifest.record(min_one_dim=best, argmin_one_dim=at, fibonacci_tail=profile[-1] if profile else None)
    if not config.quiet:
        tail = result.records[-10:]
        print_table(("N", "<NU>", "<NV>", "PRODUCT"), [(r.n, f"{r.du:.6g}", f"{r.dv:.6g}", f"{r.product:.6g}") for r in tail])
    if config.out:
        write_csv(config.out, ["n", "du", "dv", "product", "is_record"], result.rows())
        wrote(config, "Records")


def _cmd_roundtrip(args, config, manifest, progress) -> None:
    eps = float(parse_expression(args.eps)) if args.eps else float(config.get("littlewood.eps"))
    extent = args.extent if args.extent is not None else float(config.get("orbit.extent"))
    step = args.step if args.step is not None else float(config.get("orbit.step"))
    pairs = lw.random_pairs(args.pairs, seed=config.seed)
    report = lw.roundtrip_check(
        pairs,
        eps,
        extent=extent,
        step=step,
        threads=config.threads,
        r_max=float(config.get("littlewood.r_max")),
        progress_callback=progress,
        **config.shortest_kwargs(),
    )
    summary = report.as_dict()
    manifest.record(**{f"roundtrip_{key}": value for key, value in summary.items()})
    for key in ("pairs", "grid_points", "excursions", "witnesses", "violations_a", "candidates_b", "violations_b"):
        announce(key.replace("_", " ").capitalize(), summary[key])
    if config.out:
        if config.out.suffix == ".json":
            write_json(config.out, {"summary": summary, "rows": report.rows})
        else:
            write_csv(config.out, report.HEADERS, report.rows)
        wrote(config, "Round-trip table")
    if report.violations_a or report.violations_b:
        print(warning("Correspondence violations detected"))
        raise NumericError(f"{report.violations_a} direction-A and {report.violations_b} direction-B violations")
    print(success("✓ Both directions hold on every grid excursion"))
