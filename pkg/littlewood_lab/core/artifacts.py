"""Data files and run manifests.

Data files are plain CSV/JSON with no timestamps, so reruns of the same
configuration are byte-identical.  Timing lives only in the manifest.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence

from .config import RunConfig


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def render_csv(headers: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(headers)
    for row in rows:
        writer.writerow([_cell(value) for value in row])
    return buffer.getvalue()


def write_csv(path: Path, headers: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_csv(headers, rows), encoding="utf-8")


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item") and callable(value.item):
        return _jsonable(value.item())
    return value


def render_json(data: Any) -> str:
    return json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n"


def write_json(path: Path, data: Any) -> None:
    """Persist data as sorted, indented JSON."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_json(data), encoding="utf-8")


@dataclass
class RunManifest:
    config: RunConfig
    version: str
    derived: Dict[str, Any] = field(default_factory=dict)
    started: float = field(default_factory=time.perf_counter)
    wall_time: Optional[float] = None
    _emitted: bool = field(default=False, repr=False)

    def record(self, **constants: Any) -> None:
        self.derived.update(constants)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "version": self.version,
            "config": self.config.echo(),
            "derived": self.derived,
            "wall_time_seconds": self.wall_time,
        }

    def emit(self) -> Optional[Path]:
        """Write the manifest once; later calls are no-ops."""
        if self._emitted:
            return None
        self._emitted = True
        self.wall_time = time.perf_counter() - self.started
        if self.config.manifest is None:
            return None
        write_json(self.config.manifest, self.to_dict())
        return self.config.manifest
