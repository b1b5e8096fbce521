"""Terminal output helpers: colored status text and timestamped log lines."""

from __future__ import annotations

import os
import sys
from datetime import datetime, timezone
from typing import Callable, Optional

ProgressCallback = Callable[[str, str], None]


class Colors:
    """ANSI codes used by the status helpers."""

    RESET = '\033[0m'
    BOLD = '\033[1m'
    DIM = '\033[2m'
    MAGENTA = '\033[35m'
    CYAN = '\033[36m'
    BRIGHT_RED = '\033[91m'
    BRIGHT_GREEN = '\033[92m'
    BRIGHT_YELLOW = '\033[93m'
    BRIGHT_CYAN = '\033[96m'
    BRIGHT_WHITE = '\033[97m'


def _color_enabled(stream=None) -> bool:
    if os.environ.get("NO_COLOR"):
        return False
    stream = stream or sys.stdout
    return bool(getattr(stream, "isatty", lambda: False)())


def _paint(code: str, text: str) -> str:
    if not _color_enabled():
        return text
    return f"{code}{text}{Colors.RESET}"


def success(text: str) -> str:
    """Format text as success (green)."""
    return _paint(Colors.BRIGHT_GREEN, text)


def info(text: str) -> str:
    return _paint(Colors.BRIGHT_CYAN, text)


def warning(text: str) -> str:
    return _paint(Colors.BRIGHT_YELLOW, text)


def error(text: str) -> str:
    return _paint(Colors.BRIGHT_RED, text)


def header(text: str) -> str:
    """Format text as section header (bold magenta)."""
    return _paint(Colors.BOLD + Colors.MAGENTA, text)


def value(text) -> str:
    return _paint(Colors.BRIGHT_WHITE, str(text))


def dim(text: str) -> str:
    return _paint(Colors.DIM, text)


def _log(level: str, message: str) -> None:
    timestamp = datetime.now(timezone.utc).isoformat()
    print(f"[{timestamp}] {level}: {message}", file=sys.stderr, flush=True)


def log_info(message: str) -> None:
    """Log info message."""
    _log("INFO", message)


def log_warning(message: str) -> None:
    _log("WARNING", message)


def log_error(message: str) -> None:
    """Log error message."""
    _log("ERROR", message)


def progress_printer(quiet: bool = False) -> ProgressCallback:
    """Return a progress callback that routes (msg, severity) to the log."""

    def _emit(msg: str, severity: str = "info") -> None:
        if severity == "error":
            log_error(msg)
        elif severity == "warning":
            log_warning(msg)
        elif not quiet:
            log_info(msg)

    return _emit


def notify(callback: Optional[ProgressCallback], msg: str, severity: str = "info") -> None:
    """Invoke an optional progress callback."""
    if callback:
        callback(msg, severity)


def print_table(headers, rows) -> None:
    """Print rows as a left-aligned, space-separated table."""
    rows = [[str(cell) for cell in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(widths[idx], len(cell)) for idx, cell in enumerate(row)]
    print("  ".join(h.ljust(widths[idx]) for idx, h in enumerate(headers)))
    print("  ".join("-" * width for width in widths))
    for row in rows:
        print("  ".join(cell.ljust(widths[idx]) for idx, cell in enumerate(row)))
