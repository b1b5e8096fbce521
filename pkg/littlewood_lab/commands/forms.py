"""Implementation of `littlewood-lab forms scan`."""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from ..core.artifacts import write_json
from ..core.config import load_json_resource
from ..core.errors import ContractError
from ..core.forms import FormsMatrix, forms_min_scan
from .base import add_common_options, add_group, announce, run_command, wrote


def register(subparsers: argparse._SubParsersAction, config) -> None:
    group = add_group(subparsers, "forms", "Products of linear forms")
    scan_parser = group.add_parser("scan", help="Minimize |f_m(x)| over 0 < |x|_inf <= N")
    source = scan_parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--matrix", help="JSON with 'rows', 'columns' or 'cubic' coefficients")
    source.add_argument("--cubic", action="store_true", help="Use the bundled cubic unit forms")
    scan_parser.add_argument("--N", type=int, required=True, help="Box radius")
    add_common_options(scan_parser)
    scan_parser.set_defaults(func=lambda args: run_command(args, "forms scan", _cmd_scan))


def _load_matrix(args) -> FormsMatrix:
    if args.cubic:
        return FormsMatrix.from_json(load_json_resource("data/cubic_forms.json"))
    path = Path(args.matrix)
    if not path.exists():
        raise ContractError(f"Matrix file not found: {path}")
    try:
        return FormsMatrix.from_json(json.loads(path.read_text(encoding="utf-8")))
    except json.JSONDecodeError as exc:
        raise ContractError(f"Invalid matrix JSON in {path}: {exc}") from exc


def _cmd_scan(args, config, manifest, progress) -> None:
    matrix = _load_matrix(args)
    result = forms_min_scan(
        matrix, args.N,
        threads=config.threads,
        budget=float(config.get("forms.budget")),
        progress_callback=progress,
    )
    manifest.record(min=result.min_value, argmin=list(result.argmin), evaluations=result.evaluations)
    announce("Min |f_m|", f"{result.min_value:.12g}")
    announce("Argmin", result.argmin)
    announce("Evaluations", result.evaluations)
    if config.out:
        write_json(config.out, result.as_dict())
        wrote(config, "Scan result")
