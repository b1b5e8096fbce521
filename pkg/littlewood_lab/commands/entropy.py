"""Implementation of `littlewood-lab entropy` commands."""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

from ..core import dimension
from ..core.artifacts import write_csv, write_json
from ..core.console import print_table
from ..core.errors import ContractError
from ..core.expressions import parse_expression
from ..core.lattice import DiagParam
from ..core.rigidity import EntropyData, entropy_contributions, entropy_formula
from .base import add_common_options, add_group, announce, run_command, wrote

MAPS = ("doubling", "rotation")


def register(subparsers: argparse._SubParsersAction, config) -> None:
    group = add_group(subparsers, "entropy", "Topological entropy estimates and the entropy formula")

    estimate_parser = group.add_parser("estimate", help="(N, eps)-separated counts of a circle map")
    estimate_parser.add_argument("--map", choices=MAPS, default="doubling", help="Dynamics on R/Z")
    estimate_parser.add_argument("--angle", default="sqrt(2)-1", help="Rotation angle for --map rotation")
    estimate_parser.add_argument("--points", type=int, default=4096, help="Seed grid size j/points")
    estimate_parser.add_argument("--N", type=int, default=12, help="Orbit length")
    estimate_parser.add_argument("--eps", default="1/64", help="Separation eps")
    add_common_options(estimate_parser)
    estimate_parser.set_defaults(func=lambda args: run_command(args, "entropy estimate", _cmd_estimate))

    formula_parser = group.add_parser("formula", help="Evaluate sum s_ij (t_i - t_j)^+")
    weights = formula_parser.add_mutually_exclusive_group(required=True)
    weights.add_argument("--s", help="JSON file holding the k x k matrix s")
    weights.add_argument("--haar", action="store_true", help="s = 1 off the diagonal")
    formula_parser.add_argument("--t", required=True, help="Comma-separated trace-zero t")
    formula_parser.add_argument("--symmetric", action="store_true", help="Require s_ij = s_ji")
    add_common_options(formula_parser)
    formula_parser.set_defaults(func=lambda args: run_command(args, "entropy formula", _cmd_formula))


def _cmd_estimate(args, config, manifest, progress) -> None:
    if args.map == "doubling":
        step = dimension.doubling_map
    else:
        step = dimension.rotation_map(float(parse_expression(args.angle)))
    eps = float(parse_expression(args.eps))
    estimate = dimension.top_entropy_estimate(
        step, dimension.circle_grid(args.points), args.N, eps, threads=config.threads,
    )
    manifest.record(rate=estimate.rate, slope=estimate.stats.slope, escaped=estimate.escaped)
    announce("Rate (1/N) log count", f"{estimate.rate:.6g}")
    announce("Slope over N", f"{estimate.stats.slope:.6g}")
    if config.out:
        write_csv(config.out, estimate.stats.headers, estimate.stats.rows)
        wrote(config, "Entropy table")


def _load_weights(args, k: int) -> np.ndarray:
    if args.haar:
        return np.ones((k, k)) - np.eye(k)
    path = Path(args.s)
    if not path.exists():
        raise ContractError(f"Weights file not found: {path}")
    data = json.loads(path.read_text(encoding="utf-8"))
    return np.array(data["s"] if isinstance(data, dict) else data, dtype=float)


def _cmd_formula(args, config, manifest, progress) -> None:
    try:
        t = DiagParam(tuple(float(parse_expression(part)) for part in args.t.split(",")))
    except (TypeError, ValueError) as exc:
        raise ContractError(f"--t must be comma-separated numbers: {exc}") from exc
    data = EntropyData(_load_weights(args, t.k), t, symmetric=args.symmetric)
    value = entropy_formula(data)
    terms = entropy_contributions(data)
    manifest.record(entropy=value)
    announce("Entropy", f"{value:.12g}")
    if not config.quiet:
        print_table(("I", "J", "S_IJ", "GAP", "TERM"), [(i + 1, j + 1, s, gap, term) for i, j, s, gap, term in terms])
    if config.out:
        write_json(config.out, {
            "entropy": value,
            "t": list(t.t),
            "terms": [{"i": i + 1, "j": j + 1, "s": s, "gap": gap, "term": term} for i, j, s, gap, term in terms],
        })
        wrote(config, "Entropy formula")
