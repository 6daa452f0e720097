"""Fractal-definition documents: JSON schema, embedded presets, ingestion."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .structure import SelfSimilarStructure, StructureError

PRESETS: dict[str, dict] = {
    "interval": {
        "name": "interval",
        "N": 2,
        "n0": 2,
        "gluings": [[1, 2, 2, 1]],
        "harmonic": {
            "D": [[1.0, -1.0], [-1.0, 1.0]],
            "r": [0.5, 0.5],
        },
        "measure": {"mu": [0.5, 0.5]},
    },
    "gasket": {
        "name": "gasket",
        "N": 3,
        "n0": 3,
        "gluings": [[1, 2, 2, 1], [2, 3, 3, 2], [1, 3, 3, 1]],
        "harmonic": {
            "D": [[2.0, -1.0, -1.0], [-1.0, 2.0, -1.0], [-1.0, -1.0, 2.0]],
            "r": [0.6, 0.6, 0.6],
        },
        "measure": {"mu": [1 / 3, 1 / 3, 1 / 3]},
    },
}


def load_definition(source: str) -> dict:
    """Load a definition document from a preset name or a JSON file path."""
    if source in PRESETS:
        return json.loads(json.dumps(PRESETS[source]))
    path = Path(source)
    if not path.exists():
        raise FileNotFoundError(f"definition file not found: {source}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise StructureError(f"malformed definition document {source}: {exc}") from exc
    if not isinstance(doc, dict):
        raise StructureError(f"definition document {source} must be a JSON object")
    return doc


def definition_digest(doc: dict) -> str:
    """Stable content hash of a definition document."""
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def structure_from_definition(doc: dict) -> SelfSimilarStructure:
    try:
        name = str(doc.get("name", "unnamed"))
        N = int(doc["N"])
        n0 = int(doc["n0"])
        raw = doc.get("gluings", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise StructureError(f"malformed definition document: {exc}") from exc
    gluings = []
    for g in raw:
        if len(g) != 4:
            raise StructureError(f"gluing must be [i,p,j,q], got {g!r}")
        i, p, j, q = (int(x) for x in g)
        gluings.append(((i, p), (j, q)))
    bmaps = tuple(int(b) for b in doc.get("boundary_maps", ()))
    return SelfSimilarStructure(
        name=name, N=N, n0=n0, gluings=tuple(gluings), boundary_maps=bmaps
    )


def harmonic_from_definition(doc: dict):
    from .harmonic import HarmonicStructure

    block = doc.get("harmonic")
    if block is None:
        raise StructureError("definition document has no 'harmonic' block")
    D = np.asarray(block["D"], dtype=float)
    r = np.asarray(block["r"], dtype=float)
    return HarmonicStructure(D=D, r=r)


def measure_from_definition(doc: dict, override=None):
    from .spectra import MeasureWeights

    if override is not None:
        mu = np.asarray(override, dtype=float)
    else:
        block = doc.get("measure")
        if block is None:
            raise StructureError("definition document has no 'measure' block")
        mu = np.asarray(block["mu"], dtype=float)
    return MeasureWeights(mu=mu)
