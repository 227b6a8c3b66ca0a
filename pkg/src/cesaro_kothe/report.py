"""JSON report assembly, the report schema, and atomic file output."""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

from . import __version__

__all__ = ["ENTRY_SCHEMA", "REPORT_SCHEMA", "build_report", "to_jsonable", "write_atomic", "dumps"]

_TREND = {
    "type": ["object", "null"],
    "required": ["samples", "classification"],
    "properties": {
        "samples": {"type": "array", "items": {"type": "array", "minItems": 2, "maxItems": 2}},
        "classification": {"enum": ["vanishing", "bounded", "divergent", "unknown"]},
    },
}

ENTRY_SCHEMA = {
    "type": "object",
    "required": ["criterion", "family", "params", "status", "witness", "counterexample", "trend", "anchor"],
    "properties": {
        "criterion": {"type": "string"},
        "family": {"type": "string"},
        "params": {"type": "object"},
        "status": {"enum": ["Holds", "Fails", "Inconclusive"]},
        "witness": {
            "type": ["array", "null"],
            "items": {
                "type": "object",
                "required": ["n", "m", "i_range"],
                "properties": {"i_range": {"type": "array", "minItems": 2, "maxItems": 2}},
            },
        },
        "counterexample": {"type": ["object", "null"]},
        "trend": _TREND,
        "anchor": {"type": "string", "minLength": 1},
    },
}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["tool", "version", "command", "config", "entries"],
    "properties": {
        "tool": {"const": "cesaro-kothe"},
        "version": {"type": "string"},
        "command": {"type": "string"},
        "config": {"type": "object"},
        "entries": {"type": "array", "items": ENTRY_SCHEMA},
    },
}


def to_jsonable(obj):
    """Recursively convert numpy scalars, tuples and non-finite floats into JSON values."""
    if hasattr(obj, "to_json"):
        return to_jsonable(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj
    try:
        f = float(obj)
    except (TypeError, ValueError):
        return str(obj)
    if isinstance(obj, complex):
        return str(obj)
    if isinstance(obj, float) or type(obj).__module__ == "numpy":
        if math.isfinite(f):
            return int(f) if type(obj).__name__.startswith("int") else f
        return str(f)
    return str(obj)


def build_report(command: str, config: dict, entries=(), **sections) -> dict:
    report = {
        "tool": "cesaro-kothe",
        "version": __version__,
        "command": command,
        "config": to_jsonable(config),
        "entries": [to_jsonable(e) for e in entries],
    }
    for k, v in sections.items():
        report[k] = to_jsonable(v)
    return report


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=False)


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
