"""Deterministic JSON persistence helpers.

All artifacts are JSON: Python serialises floats via repr, which
round-trips float64 bit-exactly, and the byte stream carries no
timestamps, so identical inputs produce identical files.
"""

from __future__ import annotations

import hashlib
import json
import os

from .errors import DataError


def canonical_dumps(payload) -> str:
    """Key-sorted, whitespace-free dump used for digests."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)


def canonical_digest(payload) -> str:
    return hashlib.sha256(canonical_dumps(payload).encode("utf-8")).hexdigest()


def write_json(payload, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(payload, handle, indent=2, allow_nan=False)
        handle.write("\n")


def read_json(path):
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, "r", encoding="utf-8") as handle:
        try:
            return json.load(handle)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path} is not valid JSON: {exc}") from exc
