"""Run configuration: bundled defaults, an optional YAML file, then flags."""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from .errors import ConfigError

THREADS_ENV = "LAB_THREADS"
DEFAULTS_RESOURCE = "data/defaults.yml"
_COMMON_ARGS = {"func", "group", "command", "config", "seed", "threads", "quiet", "out", "manifest"}


def _load_yaml_resource(relative_path: str) -> Any:
    """Load a YAML document stored with the package."""
    try:
        resource = resources.files("littlewood_lab").joinpath(relative_path)
    except FileNotFoundError as exc:
        raise ConfigError(f"Missing resource: {relative_path}") from exc

    if not resource.is_file():
        raise ConfigError(f"Resource is not a file: {relative_path}")

    contents = resource.read_text(encoding="utf-8")
    return yaml.safe_load(contents)


def load_json_resource(relative_path: str) -> Any:
    resource = resources.files("littlewood_lab").joinpath(relative_path)
    if not resource.is_file():
        raise ConfigError(f"Resource is not a file: {relative_path}")
    return json.loads(resource.read_text(encoding="utf-8"))


def load_defaults() -> Dict[str, Any]:
    data = _load_yaml_resource(DEFAULTS_RESOURCE)
    if not isinstance(data, dict):
        raise ConfigError("Bundled defaults.yml must contain a YAML mapping")
    return data


def merge_settings(base: Dict[str, Any], override: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    """Overlay ``override`` on ``base``; keys unknown to ``base`` are rejected."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        dotted = f"{prefix}{key}"
        if key not in merged:
            raise ConfigError(f"Unknown configuration key: {dotted}")
        if isinstance(merged[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"Configuration key {dotted} must be a mapping")
            merged[key] = merge_settings(merged[key], value, prefix=f"{dotted}.")
        else:
            merged[key] = value
    return merged


def load_user_config(path: Path) -> Dict[str, Any]:
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"Error loading {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must contain a YAML mapping")
    return data


def resolve_threads(flag: Optional[int], settings: Dict[str, Any]) -> int:
    if flag is not None:
        threads = flag
    elif os.environ.get(THREADS_ENV):
        try:
            threads = int(os.environ[THREADS_ENV])
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {os.environ[THREADS_ENV]!r}") from exc
    else:
        threads = int(settings.get("threads", 1))
    if threads < 1:
        raise ConfigError(f"threads must be at least 1, got {threads}")
    return threads


@dataclass
class RunConfig:
    """Everything a command run depends on; echoed into the manifest."""

    command: str
    settings: Dict[str, Any]
    seed: int = 0
    threads: int = 1
    quiet: bool = False
    out: Optional[Path] = None
    manifest: Optional[Path] = None
    config_path: Optional[Path] = None
    params: Dict[str, Any] = field(default_factory=dict)

    def get(self, dotted: str, default: Any = None) -> Any:
        node: Any = self.settings
        for part in dotted.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def shortest_kwargs(self) -> Dict[str, Any]:
        return {
            "condition_limit": float(self.get("condition_limit")),
            "mp_spread": float(self.get("precision.mp_spread")),
            "dps": int(self.get("precision.dps")),
        }

    def echo(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "seed": self.seed,
            "threads": self.threads,
            "out": str(self.out) if self.out else None,
            "manifest": str(self.manifest) if self.manifest else None,
            "config": str(self.config_path) if self.config_path else None,
            "settings": self.settings,
            "params": {key: _plain(value) for key, value in sorted(self.params.items())},
        }


def _plain(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value.resolve())
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def build_run_config(args, command: str) -> RunConfig:
    """Merge defaults, the --config file and the common flags of a parsed command."""
    settings = load_defaults()
    config_path = None
    if getattr(args, "config", None):
        config_path = Path(args.config).resolve()
        settings = merge_settings(settings, load_user_config(config_path))
    seed = args.seed if getattr(args, "seed", None) is not None else int(settings.get("seed", 0))
    if not 0 <= seed < 2 ** 64:
        raise ConfigError(f"seed must be a 64-bit unsigned integer, got {seed}")
    settings["seed"] = seed
    threads = resolve_threads(getattr(args, "threads", None), settings)
    params = {key: value for key, value in vars(args).items() if key not in _COMMON_ARGS}
    out = Path(args.out).resolve() if getattr(args, "out", None) else None
    manifest = Path(args.manifest).resolve() if getattr(args, "manifest", None) else None
    return RunConfig(
        command=command,
        settings=settings,
        seed=seed,
        threads=threads,
        quiet=bool(getattr(args, "quiet", False)),
        out=out,
        manifest=manifest,
        config_path=config_path,
        params=params,
    )
