"""`littlewood-lab` entrypoint."""

from __future__ import annotations

from typing import Optional, Sequence

from .commands import base
from .core.config import load_defaults

PROG_NAME = "littlewood-lab"
PROG_DESCRIPTION = "Diagonal flows, lattice minima and Littlewood products: scans, checks and estimators."
LAB_VERSION = "0.1.0"


def build_parser() -> base.LabArgumentParser:
    parser = base.LabArgumentParser(prog=PROG_NAME, description=PROG_DESCRIPTION)
    parser.add_argument("--version", action="version", version=f"{PROG_NAME} {LAB_VERSION}")
    base.register_root_parser(parser, load_defaults())
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entrypoint for the `littlewood-lab` console script."""
    parser = build_parser()
    parsed_args = parser.parse_args(argv)
    func = getattr(parsed_args, "func", None)
    if func is None:
        parser.print_help()
        return base.EXIT_USAGE
    return func(parsed_args)
