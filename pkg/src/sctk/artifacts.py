"""Canonical artifact serialization and content hashing.

All emitted files go through canonical_bytes so that identical inputs
produce byte-identical artifacts, which makes the content-hash chain
between pipeline stages meaningful.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .errors import FormatError


def canonical_bytes(doc) -> bytes:
    """Serialize a JSON document deterministically (key order = insertion order)."""
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def file_hash(path: str | Path) -> str:
    return sha256_hex(Path(path).read_bytes())


def load_json(path: str | Path) -> dict:
    raw = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: expected a JSON object at top level")
    return doc


def write_bytes(path: str | Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
