"""Deterministic text serialization for run artifacts.

Reports, checkpoints, and tables must be byte-identical across reruns with
the same seed, so floats are always printed with 17 significant digits
(exact round-trip for float64) and key order follows insertion order.
"""

from __future__ import annotations

import numpy as np

__all__ = ["format_float", "dumps_json", "write_csv"]


def format_float(x: float) -> str:
    """Decimal text with 17 significant digits."""
    return format(float(x), ".17g")


def _emit(obj, parts: list, indent: int) -> None:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            parts.append("{}")
            return
        parts.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            parts.append(f'{pad}  "{k}": ')
            _emit(v, parts, indent + 1)
            parts.append(",\n" if i < len(obj) - 1 else "\n")
        parts.append(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            parts.append("[]")
            return
        simple = all(isinstance(v, (int, float, np.integer, np.floating, str, bool)) for v in seq)
        if simple:
            parts.append("[")
            for i, v in enumerate(seq):
                _emit(v, parts, indent)
                if i < len(seq) - 1:
                    parts.append(", ")
            parts.append("]")
        else:
            parts.append("[\n")
            for i, v in enumerate(seq):
                parts.append(pad + "  ")
                _emit(v, parts, indent + 1)
                parts.append(",\n" if i < len(seq) - 1 else "\n")
            parts.append(pad + "]")
    elif isinstance(obj, bool) or isinstance(obj, np.bool_):
        parts.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if np.isnan(x):
            parts.append('"nan"')
        elif np.isinf(x):
            parts.append('"inf"' if x > 0 else '"-inf"')
        else:
            parts.append(format_float(x))
    elif obj is None:
        parts.append("null")
    elif isinstance(obj, str):
        import json

        parts.append(json.dumps(obj))
    else:
        raise TypeError(f"cannot serialize {type(obj)!r}")


def dumps_json(obj) -> str:
    """JSON text with full-precision floats and stable formatting."""
    parts: list = []
    _emit(obj, parts, 0)
    return "".join(parts) + "\n"


def write_csv(path, header, rows) -> None:
    """Write rows of mixed scalars; floats get 17 significant digits."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                cells.append(format_float(v))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
