"""Deterministic JSON encoding for reports and configs.

Reals print with 12 significant digits, complex values as [re, im],
integers unquoted; key order is preserved (or sorted for hashing), so a
given record always serializes to the same bytes.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np


def _fmt(value, sort_keys: bool) -> str:
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (complex, np.complexfloating)):
        return "[%s, %s]" % (format(float(value.real), ".12g"),
                             format(float(value.imag), ".12g"))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        keys = sorted(value) if sort_keys else list(value)
        inner = ", ".join("%s: %s" % (json.dumps(str(k)), _fmt(value[k], sort_keys))
                          for k in keys)
        return "{" + inner + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v, sort_keys) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value)!r}")


def dumps(record: dict, sort_keys: bool = False) -> str:
    """One JSON object, deterministic bytes for identical content."""
    return _fmt(record, sort_keys)


def config_hash(config: dict) -> str:
    """Short stable digest of a config mapping (sorted-key canonical form)."""
    return hashlib.sha256(dumps(config, sort_keys=True).encode()).hexdigest()[:16]
