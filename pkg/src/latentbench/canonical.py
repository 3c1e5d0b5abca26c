"""Canonical text serialization: UTF-8, sorted keys, 9-significant-digit floats.

The format is JSON-compatible but with a fixed float rendering so that
serialize -> parse -> serialize is byte-identical. Generators quantize every
stored float through :func:`round9` so in-memory values equal their on-disk
form and replay from file matches replay from memory.
"""

from __future__ import annotations

import json
from typing import Any


class CanonicalError(ValueError):
    """Raised on malformed canonical documents; carries a byte offset."""

    def __init__(self, message: str, offset: int = -1):
        super().__init__(message)
        self.offset = offset


def round9(x: float) -> float:
    """Quantize to 9 significant decimal digits (the storage precision)."""
    if x == 0.0:
        return 0.0
    return float(f"{x:.9g}")


def format_float(x: float) -> str:
    if x != x or x in (float("inf"), float("-inf")):
        raise CanonicalError(f"non-finite float not representable: {x!r}")
    if x == 0.0:
        return "0.0"
    text = f"{x:.9g}"
    # keep a decimal marker so ints and floats stay distinguishable
    if "." not in text and "e" not in text and "E" not in text:
        text += ".0"
    return text


def _render(value: Any, out: list[str]) -> None:
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        out.append(format_float(value))
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=False))
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _render(item, out)
        out.append("]")
    elif isinstance(value, dict):
        out.append("{")
        for i, key in enumerate(sorted(value)):
            if not isinstance(key, str):
                raise CanonicalError(f"non-string key: {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _render(value[key], out)
        out.append("}")
    else:
        raise CanonicalError(f"unsupported type: {type(value).__name__}")


def dumps(value: Any) -> str:
    out: list[str] = []
    _render(value, out)
    return "".join(out)


def dump_bytes(value: Any) -> bytes:
    return (dumps(value) + "\n").encode("utf-8")


def loads(text: str | bytes) -> Any:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CanonicalError(f"parse error: {exc.msg}", offset=exc.pos) from exc
