"""Implementation of `littlewood-lab shear demo`."""

from __future__ import annotations

import argparse
import json
from fractions import Fraction
from pathlib import Path

from ..core.artifacts import write_json
from ..core.config import load_json_resource
from ..core.console import success, warning
from ..core.errors import ContractError, NumericError
from ..core.shearing import ShearState, find_shear_time, flow_conjugate_shear, kappa, shear, shear_discrepancy
from .base import add_common_options, add_group, announce, run_command, wrote

IDENTITY_TOLERANCE = 1e-12


def register(subparsers: argparse._SubParsersAction, config) -> None:
    group = add_group(subparsers, "shear", "Shearing of nearby unipotent orbits")
    demo_parser = group.add_parser("demo", help="Closed-form shear, kappa and shear-time search")
    demo_parser.add_argument("--g", help="ShearState JSON (default: bundled shear_g.json)")
    demo_parser.add_argument("--r", help="Shear parameter r (p/q or decimal)")
    demo_parser.add_argument("--tau", type=float, default=1.0, help="Flow-conjugation time")
    add_common_options(demo_parser)
    demo_parser.set_defaults(func=lambda args: run_command(args, "shear demo", _cmd_demo))


def _load_state(args) -> tuple:
    if args.g:
        path = Path(args.g)
        if not path.exists():
            raise ContractError(f"ShearState file not found: {path}")
        data = json.loads(path.read_text(encoding="utf-8"))
    else:
        data = load_json_resource("data/shear_g.json")
    state = ShearState.from_json(data)
    r_text = args.r if args.r is not None else data.get("r", "1")
    r = Fraction(r_text) if state.exact else float(Fraction(r_text))
    return state, r


def _cmd_demo(args, config, manifest, progress) -> None:
    state, r = _load_state(args)
    diff = shear_discrepancy(state, r)
    float_diff = shear_discrepancy(ShearState(state.as_float()), float(r))
    values = kappa(state)
    conjugated = flow_conjugate_shear(state, args.tau)
    after = kappa(conjugated)
    try:
        shear_time = find_shear_time(
            state,
            float(config.get("shear.rho")),
            growth=float(config.get("shear.growth")),
            accept=float(config.get("shear.accept")),
        )
    except ContractError as exc:
        progress(str(exc), "warning")
        shear_time = None
    result = {
        "r": str(r),
        "exact": state.exact,
        "closed_form_vs_direct": diff,
        "closed_form_vs_direct_float": float_diff,
        "sheared": shear(state, r).to_json(),
        "kappa": {"kappa": values.kappa, "kappa_a": values.kappa_a, "kappa_u": values.kappa_u},
        "tau": args.tau,
        "kappa_after_flow": {"kappa": after.kappa, "kappa_a": after.kappa_a, "kappa_u": after.kappa_u},
        "shear_time": None if shear_time is None else {
            "r": shear_time.r, "C": shear_time.C, "max_term": shear_time.max_term, "method": shear_time.method,
        },
    }
    manifest.record(closed_form_vs_direct=diff, closed_form_vs_direct_float=float_diff)
    announce("Closed form vs direct product", f"{diff:.3e} (float {float_diff:.3e})")
    announce("kappa (kappa_a, kappa_u)", f"{values.kappa:.6g} ({values.kappa_a:.6g}, {values.kappa_u:.6g})")
    if shear_time is not None:
        announce("Shear time", f"r={shear_time.r:.6g}, C={shear_time.C:.4g} [{shear_time.method}]")
    if config.out:
        write_json(config.out, result)
        wrote(config, "Shear report")
    if max(diff, float_diff) >= IDENTITY_TOLERANCE:
        print(warning("Closed form and direct product disagree"))
        raise NumericError(f"Shear identity off by {max(diff, float_diff):.3e}")
    print(success(f"✓ Closed form matches the direct product (< {IDENTITY_TOLERANCE:g})"))
