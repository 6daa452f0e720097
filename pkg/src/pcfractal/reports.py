"""Deterministic CSV/JSON artifact writing: stable schemas, atomic replace."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from . import __version__


def meta_block(doc: dict, seed: int) -> dict:
    from .definition import definition_digest

    # wall-clock deliberately excluded: outputs must be byte-stable across runs
    return {
        "tool_version": __version__,
        "definition_digest": definition_digest(doc),
        "seed": seed,
    }


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: Path, payload: dict):
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    lines.extend(",".join(str(c) for c in row) for row in rows)
    _atomic_write(path, "\n".join(lines) + "\n")


def fmt(x: float) -> str:
    """Canonical float formatting for CSV cells (repr round-trips, stable)."""
    return repr(float(x))
