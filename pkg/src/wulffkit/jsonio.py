"""File formats and canonical JSON emission.

Function files carry an ambient polynomial: ``{"dimension": n, "terms":
[{"exponents": [e0, ..., en], "coeff": c}, ...]}``.  Sampled-function
files carry ``{"dimension": n, "samples": [{"theta": [...], "value":
r}, ...]}``.  Coefficients and values are written with 17 significant
digits, which round-trips doubles exactly.  Reports are serialized with
sorted keys and fixed separators so equal inputs give byte-identical
output.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .sphere_fn import SampledFunction, SphereFunction

__all__ = [
    "function_to_json",
    "function_from_json",
    "sampled_to_json",
    "sampled_from_json",
    "load_function",
    "dump_function",
    "canonical_dumps",
]


def _num(x: float) -> float:
    return float(f"{float(x):.17g}")


def function_to_json(f: SphereFunction) -> dict:
    return {
        "dimension": f.dimension,
        "terms": [
            {"exponents": list(e), "coeff": _num(c)} for e, c in f.terms
        ],
    }


def function_from_json(doc: dict) -> SphereFunction:
    try:
        n = int(doc["dimension"])
        terms = [(tuple(t["exponents"]), float(t["coeff"])) for t in doc["terms"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed function document: {exc}") from exc
    return SphereFunction(n, terms)


def sampled_to_json(f: SampledFunction) -> dict:
    return {
        "dimension": f.dimension,
        "samples": [
            {"theta": [_num(x) for x in th], "value": _num(v)}
            for th, v in zip(f.directions, f.values)
        ],
    }


def sampled_from_json(doc: dict) -> SampledFunction:
    try:
        n = int(doc["dimension"])
        dirs = np.array([s["theta"] for s in doc["samples"]], dtype=float)
        vals = np.array([s["value"] for s in doc["samples"]], dtype=float)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed sampled-function document: {exc}") from exc
    return SampledFunction(dimension=n, directions=dirs, values=vals)


def load_function(path: str) -> SphereFunction:
    with open(path, encoding="utf-8") as fh:
        return function_from_json(json.load(fh))


def dump_function(f: SphereFunction, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_dumps(function_to_json(f)))
        fh.write("\n")


def _plain(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays for the json encoder."""
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_plain(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(x) for x in obj]
    if isinstance(obj, float):
        return float(obj)
    return obj


def canonical_dumps(obj: Any) -> str:
    """Deterministic JSON: sorted keys, fixed separators, plain floats."""
    return json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"), allow_nan=False)
