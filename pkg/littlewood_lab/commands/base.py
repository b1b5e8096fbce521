"""Top-level command wiring."""

from __future__ import annotations

import argparse
import sys
from typing import Callable

from ..core import console
from ..core.artifacts import RunManifest
from ..core.config import RunConfig, build_run_config
from ..core.console import ProgressCallback
from ..core.errors import EXIT_OK, EXIT_USAGE, LabError

CommandBody = Callable[[object, RunConfig, RunManifest, ProgressCallback], None]


class LabArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with status 64."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def register_root_parser(parser: argparse.ArgumentParser, config) -> None:
    """Register every command group on the root parser."""
    parser.set_defaults(func=lambda args: _usage(parser))
    subparsers = parser.add_subparsers(dest="group")
    _register_subcommands(subparsers, config)


def _register_subcommands(subparsers: argparse._SubParsersAction, config) -> None:
    from . import dim, eig, entropy, exceptional, forms, littlewood, orbit, shear

    littlewood.register(subparsers, config)
    orbit.register(subparsers, config)
    forms.register(subparsers, config)
    shear.register(subparsers, config)
    exceptional.register(subparsers, config)
    eig.register(subparsers, config)
    dim.register(subparsers, config)
    entropy.register(subparsers, config)


def _usage(parser: argparse.ArgumentParser) -> int:
    parser.print_help(sys.stderr)
    return EXIT_USAGE


def add_group(subparsers: argparse._SubParsersAction, name: str, help_text: str) -> argparse._SubParsersAction:
    """A command group whose bare invocation prints its help and exits 64."""
    parser = subparsers.add_parser(name, help=help_text)
    parser.set_defaults(func=lambda args: _usage(parser))
    return parser.add_subparsers(dest="command")


def add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="Write the data file (CSV or JSON) here")
    parser.add_argument("--manifest", help="Write the run manifest JSON here")
    parser.add_argument("--seed", type=int, help="Random seed (default from config: 0)")
    parser.add_argument("--threads", type=int, help="Worker cap (falls back to LAB_THREADS, then config)")
    parser.add_argument("--config", help="YAML file overriding the bundled defaults")
    parser.add_argument("--quiet", action="store_true", help="Suppress progress lines")


def run_command(args, name: str, body: CommandBody) -> int:
    """Build the RunConfig, run ``body`` and map errors to exit codes.

    The manifest is emitted exactly once, whether or not the body succeeds.
    """
    from .. import LAB_VERSION

    manifest = None
    code = EXIT_OK
    try:
        config = build_run_config(args, name)
        manifest = RunManifest(config=config, version=LAB_VERSION)
        body(args, config, manifest, console.progress_printer(config.quiet))
    except LabError as exc:
        print(console.error(f"Error: {exc}"), file=sys.stderr)
        code = exc.exit_code
    if manifest is not None:
        manifest.record(exit_code=code)
        path = manifest.emit()
        if path is not None and not manifest.config.quiet:
            console.log_info(f"Manifest written to {path}")
    return code


def announce(label: str, value) -> None:
    print(f"{console.header(label)}: {console.value(value)}")


def wrote(config: RunConfig, what: str) -> None:
    if config.out is not None and not config.quiet:
        console.log_info(f"{what} written to {config.out}")
