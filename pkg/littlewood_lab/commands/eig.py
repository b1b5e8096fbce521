"""Implementation of `littlewood-lab eig lemma`."""

from __future__ import annotations

import argparse

from ..core.artifacts import write_json
from ..core.console import success, warning
from ..core.errors import ContractError
from ..core.rigidity import eigen_lemma_trials
from .base import add_common_options, add_group, announce, run_command, wrote


def register(subparsers: argparse._SubParsersAction, config) -> None:
    group = add_group(subparsers, "eig", "Eigenvalue perturbation checks")
    lemma_parser = group.add_parser("lemma", help="Seeded trials of the eigenvalue perturbation check")
    lemma_parser.add_argument("--lam", default="3,1.5,0", help="Comma-separated log-eigenvalues with gaps > 1")
    lemma_parser.add_argument("--trials", type=int, default=500, help="Number of seeded trials")
    lemma_parser.add_argument("--radius", type=float, default=0.01, help="Sup-norm radius of h around I")
    add_common_options(lemma_parser)
    lemma_parser.set_defaults(func=lambda args: run_command(args, "eig lemma", _cmd_lemma))


def _parse_lam(text: str):
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ContractError(f"--lam must be comma-separated numbers: {exc}") from exc


def _cmd_lemma(args, config, manifest, progress) -> None:
    lam = _parse_lam(args.lam)
    report = eigen_lemma_trials(lam, trials=args.trials, radius=args.radius, seed=config.seed)
    data = {"lam": lam, "trials": report.trials, "passed": report.passed, "max_shift": report.max_shift}
    manifest.record(passed=report.passed, max_shift=report.max_shift)
    announce("Passed", f"{report.passed}/{report.trials}")
    announce("Max |lam' - lam|", f"{report.max_shift:.6g}")
    if config.out:
        write_json(config.out, data)
        wrote(config, "Trial report")
    if report.passed == report.trials:
        print(success("✓ Eigenvalues stay real, positive and within 1/2"))
    else:
        print(warning(f"{report.trials - report.passed} trial(s) failed"))
