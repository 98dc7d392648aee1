"""Deterministic CSV/JSON result writers and run manifests."""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path


def format_cell(value) -> str:
    """Full round-trip float formatting; bools lowercase; rest via str."""
    if hasattr(value, "item"):  # numpy scalar
        value = value.item()
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, fieldnames, rows) -> Path:
    path = Path(path)
    lines = [",".join(fieldnames)]
    for row in rows:
        lines.append(",".join(format_cell(row.get(name, "")) for name in fieldnames))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _json_default(obj):
    # numpy scalars/arrays degrade to their Python equivalents
    if hasattr(obj, "item"):
        return obj.item()
    if hasattr(obj, "tolist"):
        return obj.tolist()
    return str(obj)


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(
        json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n",
        encoding="utf-8",
    )
    return path


def config_hash(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


class ManifestBuilder:
    """Collects outputs and timing for a single CLI run.

    The wall time field varies between runs and is excluded from any
    byte-determinism comparison; every other output is reproducible from
    (config, seed).
    """

    def __init__(self, command: str, config: dict, seed: int, version: str):
        self.command = command
        self.config = config
        self.seed = seed
        self.version = version
        self.outputs: list[str] = []
        self.passed: bool | None = None
        self._t0 = time.monotonic()

    def add(self, path) -> Path:
        self.outputs.append(str(path))
        return Path(path)

    def write(self, path) -> Path:
        return write_json(path, {
            "command": self.command,
            "config_hash": config_hash(self.config),
            "library_version": self.version,
            "seed": self.seed,
            "wall_time_s": round(time.monotonic() - self._t0, 3),
            "outputs": sorted(self.outputs),
            "passed": self.passed,
        })
