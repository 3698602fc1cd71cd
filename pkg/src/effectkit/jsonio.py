"""JSON serialization with a fixed float format.

All files this package reads and writes are plain JSON. Emission is fully
deterministic: floats are rendered with 17 significant digits (lossless for
IEEE doubles), keys keep insertion order, and there is exactly one layout per
(payload, pretty) pair, so output files can be compared byte for byte.
Parsing accepts any standard JSON number but rejects the NaN/Infinity
extensions.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .errors import SchemaError


def format_float(x: float) -> str:
    """Render a finite float with 17 significant digits."""
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite float in JSON payload")
    s = format(x, ".17g")
    if "." not in s and "e" not in s and "E" not in s:
        s += ".0"
    return s


def _emit(obj: Any, out: list[str], indent: int | None, level: int) -> None:
    if isinstance(obj, dict):
        _emit_container(obj.items(), "{", "}", out, indent, level, keyed=True)
    elif isinstance(obj, (list, tuple)):
        _emit_container(obj, "[", "]", out, indent, level, keyed=False)
    elif isinstance(obj, bool) or isinstance(obj, np.bool_):
        out.append("true" if obj else "false")
    elif obj is None:
        out.append("null")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(float(obj)))
    else:
        raise TypeError(f"cannot serialize value of type {type(obj).__name__}")


def _emit_container(items, open_ch, close_ch, out, indent, level, *, keyed):
    items = list(items)
    if not items:
        out.append(open_ch + close_ch)
        return
    out.append(open_ch)
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    closing = "" if indent is None else "\n" + " " * (indent * level)
    for i, item in enumerate(items):
        if i:
            out.append("," + (pad if indent is not None else " "))
        else:
            out.append(pad)
        if keyed:
            key, value = item
            if not isinstance(key, str):
                raise TypeError("JSON object keys must be strings")
            out.append(json.dumps(key) + ": ")
            _emit(value, out, indent, level + 1)
        else:
            _emit(item, out, indent, level + 1)
    out.append(closing + close_ch)


def dumps(obj: Any, pretty: bool = False) -> str:
    """Serialize to a JSON string (no trailing newline)."""
    out: list[str] = []
    _emit(obj, out, 2 if pretty else None, 0)
    return "".join(out)


def dump(obj: Any, path, pretty: bool = False) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj, pretty=pretty))
        fh.write("\n")


def _reject_constant(name: str):
    raise ValueError(f"non-finite JSON constant {name!r} is not accepted")


def loads(text: str) -> Any:
    return json.loads(text, parse_constant=_reject_constant)


def load(path) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())


def expect_dict(obj: Any, what: str) -> dict:
    if not isinstance(obj, dict):
        raise SchemaError(f"{what}: expected a JSON object, got {type(obj).__name__}")
    return obj


def expect_key(obj: dict, key: str, what: str) -> Any:
    if key not in obj:
        raise SchemaError(f"{what}: missing required key {key!r}")
    return obj[key]


def expect_list(obj: Any, what: str) -> list:
    if not isinstance(obj, list):
        raise SchemaError(f"{what}: expected a JSON array, got {type(obj).__name__}")
    return obj


def expect_int(obj: Any, what: str) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise SchemaError(f"{what}: expected an integer, got {obj!r}")
    return obj


def expect_number(obj: Any, what: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise SchemaError(f"{what}: expected a number, got {obj!r}")
    return float(obj)


def expect_str(obj: Any, what: str) -> str:
    if not isinstance(obj, str):
        raise SchemaError(f"{what}: expected a string, got {type(obj).__name__}")
    return obj
