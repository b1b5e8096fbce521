"""Implementation of `littlewood-lab orbit trace`."""

from __future__ import annotations

import argparse
import json
from pathlib import Path
from typing import List

from ..core.artifacts import write_csv
from ..core.config import load_json_resource
from ..core.errors import ContractError
from ..core.flow import FlowSpec, expansion_constants, metric_comparison_constant, orbit_trace_cone
from ..core.forms import FormsMatrix
from ..core.lattice import DiagParam, LatticeBasis
from ..core.littlewood import TargetPair, pair_basis
from .base import add_common_options, add_group, announce, run_command, wrote


def register(subparsers: argparse._SubParsersAction, config) -> None:
    group = add_group(subparsers, "orbit", "Diagonal-flow orbits")
    trace_parser = group.add_parser("trace", help="Sample delta along a cone of the diagonal group")
    source = trace_parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--pair", nargs=2, metavar=("U", "V"), help="Trace tau(u, v)")
    source.add_argument("--lattice", help="Lattice JSON {k, mode, columns}")
    source.add_argument("--cubic", action="store_true", help="Trace the bundled cubic unit lattice")
    trace_parser.add_argument("--rho", type=float, required=True, help="K_rho threshold")
    trace_parser.add_argument("--extent", type=float, help=f"Grid extent (default {config['orbit']['extent']})")
    trace_parser.add_argument("--step", type=float, help=f"Grid step (default {config['orbit']['step']})")
    add_common_options(trace_parser)
    trace_parser.set_defaults(func=lambda args: run_command(args, "orbit trace", _cmd_trace))


def cone_directions(k: int) -> List[DiagParam]:
    """t_i = e_{i+1} - e_1, the quadrant (-r-s, r, s) when k = 3."""
    directions = []
    for i in range(1, k):
        t = [0.0] * k
        t[0], t[i] = -1.0, 1.0
        directions.append(DiagParam(tuple(t)))
    return directions


def _load_lattice(args) -> LatticeBasis:
    if args.pair:
        return pair_basis(TargetPair.parse(*args.pair))
    if args.cubic:
        return FormsMatrix.from_json(load_json_resource("data/cubic_forms.json")).lattice()
    path = Path(args.lattice)
    if not path.exists():
        raise ContractError(f"Lattice file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ContractError(f"Invalid lattice JSON in {path}: {exc}") from exc
    return LatticeBasis.from_json(data)


def _cmd_trace(args, config, manifest, progress) -> None:
    basis = _load_lattice(args)
    extent = args.extent if args.extent is not None else float(config.get("orbit.extent"))
    step = args.step if args.step is not None else float(config.get("orbit.step"))
    directions = cone_directions(basis.k)
    trace = orbit_trace_cone(
        basis, directions, extent, args.rho,
        step=step, norm=config.get("norm"), threads=config.threads,
        progress_callback=progress, **config.shortest_kwargs(),
    )
    flow = FlowSpec(directions[0])
    manifest.record(
        min_delta=trace.min_delta,
        all_in_K_rho=trace.all_in_k_rho,
        samples=len(trace.samples),
        expansion_rate=flow.rate,
        metric_comparison_c1=metric_comparison_constant(flow, seed=config.seed),
        expansion_constant=expansion_constants(flow, seed=config.seed),
    )
    announce("Samples", len(trace.samples))
    announce("Min delta", f"{trace.min_delta:.10g}")
    announce("Stays in K_rho", trace.all_in_k_rho)
    if config.out:
        write_csv(config.out, trace.headers(), trace.rows())
        wrote(config, "Orbit trace")
