"""Deterministic JSON writing with exact float round-trips.

The stdlib json encoder uses repr() for floats, which is fine for round
trips but leaves no way to pin the format contract explicitly. Here every
real number is rendered with '%.17g': 17 significant digits are enough to
recover any IEEE-754 double exactly, and the output is byte-stable across
runs and platforms for identical inputs. Keys keep insertion order, and
non-finite values are rejected because the wire format (and CSV reports)
must stay readable by any generic JSON parser.
"""

from __future__ import annotations

import json
import math
import numbers


def format_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("non-finite value cannot be serialized")
    return format(x, ".17g")


def dumps(obj) -> str:
    """Serialize obj to a single-line JSON string with '%.17g' floats."""
    out: list[str] = []
    _write(obj, out)
    return "".join(out)


def _write(obj, out: list[str]) -> None:
    # bool is an int subclass, so it must be checked first
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, numbers.Integral):
        out.append(str(int(obj)))
    elif isinstance(obj, numbers.Real):
        out.append(format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if not isinstance(k, str):
                raise TypeError(f"JSON object keys must be strings, got {type(k).__name__}")
            if i:
                out.append(",")
            out.append(json.dumps(k, ensure_ascii=False))
            out.append(":")
            _write(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _write(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
