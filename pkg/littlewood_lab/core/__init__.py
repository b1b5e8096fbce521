"""Core computations for littlewood-lab, importable without the CLI."""
