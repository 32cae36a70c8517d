"""CSV and JSON writers with a provenance block.

CSV files start with ``#``-prefixed provenance lines followed by a header
row; values are written with 6 significant digits.  JSON files hold
``provenance``, ``config`` and ``result`` objects at full precision.
Neither format contains timestamps, so equal inputs give byte-identical
files.
"""

from __future__ import annotations

import json
import os
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from .errors import CoopMacError

__all__ = ["ExportError", "provenance", "format_value", "write_csv", "write_json", "to_jsonable"]


class ExportError(CoopMacError):
    """Output could not be written."""


def provenance(config_sha256: str, seeds: Sequence[int], engine: Optional[dict]) -> dict:
    from . import __version__

    return {"tool": "coopmac", "version": __version__, "config_sha256": config_sha256,
            "seeds": [int(s) for s in seeds], "engine": engine}


def format_value(x: Any) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if v == 0.0:
            return "0"
        return f"{v:.6g}"
    return str(x)


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else None
    return obj


def _open(path: str):
    try:
        parent = os.path.dirname(os.path.abspath(path))
        os.makedirs(parent, exist_ok=True)
        return open(path, "w", newline="\n", encoding="utf-8")
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc}") from exc


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]], prov: dict) -> str:
    rows = list(rows)
    if not rows:
        raise ValueError("nothing to export")
    lines = [f"# {key}: {json.dumps(prov[key], sort_keys=True)}" for key in sorted(prov)]
    lines.append(",".join(header))
    for row in rows:
        if len(row) != len(header):
            raise ValueError("row length does not match header")
        lines.append(",".join(format_value(v) for v in row))
    with _open(path) as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def write_json(path: str, result: Any, prov: dict, config: Optional[dict] = None) -> str:
    if result is None or (hasattr(result, "__len__") and len(result) == 0):
        raise ValueError("nothing to export")
    doc = {"provenance": prov, "config": config, "result": to_jsonable(result)}
    with _open(path) as fh:
        fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path
