"""Command registration for littlewood-lab."""

from . import base

__all__ = ["base"]
