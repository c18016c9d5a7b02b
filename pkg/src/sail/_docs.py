"""Strict JSON loading helpers used by every document loader."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable

from .errors import SchemaError


def _no_duplicates(pairs):
    out = {}
    for key, value in pairs:
        if key in out:
            raise SchemaError(key, "duplicate field")
        out[key] = value
    return out


def loads_strict(text: str, where: str = "$") -> Any:
    try:
        return json.loads(text, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise SchemaError(where, f"invalid JSON: {exc.msg} at line {exc.lineno}") from None


def read_doc(doc: Any, where: str = "$") -> Any:
    """Accept a parsed document, JSON text, or a path to a JSON file."""
    if isinstance(doc, Path):
        return loads_strict(doc.read_text(encoding="utf-8"), str(doc))
    if isinstance(doc, (bytes, bytearray)):
        doc = doc.decode("utf-8")
    if isinstance(doc, str):
        return loads_strict(doc, where)
    return doc


def check_keys(obj: Any, path: str, required: Iterable[str], optional: Iterable[str] = ()) -> dict:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    required = tuple(required)
    allowed = set(required) | set(optional)
    for key in obj:
        if key not in allowed:
            raise SchemaError(f"{path}.{key}", "unknown field")
    for key in required:
        if key not in obj:
            raise SchemaError(f"{path}.{key}", "missing required field")
    return obj


def expect(value: Any, types, path: str, what: str) -> Any:
    if isinstance(value, bool) and bool not in (types if isinstance(types, tuple) else (types,)):
        raise SchemaError(path, f"expected {what}")
    if not isinstance(value, types):
        raise SchemaError(path, f"expected {what}")
    return value


def dumps_canonical(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"
