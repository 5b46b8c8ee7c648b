"""JSON writing with exact float round-trips plus small file helpers."""

from __future__ import annotations

import hashlib
import math
from pathlib import Path


def float_repr(x: float) -> str:
    """Render a float with 17 significant digits so parsing recovers it exactly."""
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    return format(float(x), ".17g")


def dumps(obj, sort_keys: bool = True) -> str:
    """Compact JSON with 17-significant-digit floats (stdlib json shortens them)."""
    pieces: list[str] = []
    _write(obj, pieces, sort_keys)
    return "".join(pieces)


def _write(obj, out: list[str], sort_keys: bool) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(float_repr(obj))
    elif isinstance(obj, str):
        out.append(_escape(obj))
    elif isinstance(obj, dict):
        out.append("{")
        keys = sorted(obj) if sort_keys else list(obj)
        for i, k in enumerate(keys):
            if i:
                out.append(",")
            if not isinstance(k, str):
                raise TypeError(f"JSON object keys must be strings, got {k!r}")
            out.append(_escape(k))
            out.append(":")
            _write(obj[k], out, sort_keys)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _write(item, out, sort_keys)
        out.append("]")
    else:
        # numpy scalars and similar duck-typed numbers
        if hasattr(obj, "item"):
            _write(obj.item(), out, sort_keys)
        else:
            raise TypeError(f"cannot serialize {type(obj).__name__} to JSON")


_ESCAPES = {'"': '\\"', "\\": "\\\\", "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _escape(s: str) -> str:
    parts = ['"']
    for ch in s:
        if ch in _ESCAPES:
            parts.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            parts.append(f"\\u{ord(ch):04x}")
        else:
            parts.append(ch)
    parts.append('"')
    return "".join(parts)


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: str | Path) -> str:
    return sha256_bytes(Path(path).read_bytes())
