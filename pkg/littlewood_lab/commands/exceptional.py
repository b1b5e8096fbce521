"""Implementation of `littlewood-lab exceptional scan`."""

from __future__ import annotations

import argparse

from ..core.artifacts import write_json
from ..core.console import print_table, success, warning
from ..core.rigidity import exceptional_scan
from .base import add_common_options, add_group, announce, run_command, wrote


def register(subparsers: argparse._SubParsersAction, config) -> None:
    group = add_group(subparsers, "exceptional", "Exceptional-return criterion over SL(k, Z)")
    scan_parser = group.add_parser("scan", help="Check every SL(k, Z) matrix with bounded entries")
    scan_parser.add_argument("--k", type=int, default=3, help="Matrix size (default 3)")
    scan_parser.add_argument("--entry-bound", type=int, default=2, help="Entries range over [-b, b]")
    add_common_options(scan_parser)
    scan_parser.set_defaults(func=lambda args: run_command(args, "exceptional scan", _cmd_scan))


def _cmd_scan(args, config, manifest, progress) -> None:
    report = exceptional_scan(args.k, args.entry_bound, threads=config.threads, progress_callback=progress)
    data = report.as_dict()
    manifest.record(hits=len(report.hits), unimodular=report.unimodular, fully_checked=report.fully_checked)
    announce("Unimodular matrices", report.unimodular)
    announce("Exact checks after prefilter", report.fully_checked)
    if not config.quiet:
        print_table(("CONDITION", "FAILURES"), sorted(report.failures.items()))
    if config.out:
        write_json(config.out, data)
        wrote(config, "Scan report")
    if report.hits:
        print(warning(f"{len(report.hits)} matrices satisfy all three conditions"))
    else:
        print(success("✓ No exceptional matrices found"))
