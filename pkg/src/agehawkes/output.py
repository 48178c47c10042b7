"""Deterministic CSV tables with provenance comments, plus JSON sidecars.

Every data file starts with ``# key=value`` comment lines echoing the
resolved configuration, followed by a column header and rows.  Floats are
written with 12 significant digits (round-trippable well beyond the 9 the
format guarantees).  The matching ``<name>.meta.json`` sidecar carries the
full configuration; the timestamp lives only there so the data files stay
byte-identical across reruns.
"""

from __future__ import annotations

import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence

ARTIFACT_VERSION = "0.1.0"


def fmt_value(v) -> str:
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return f"{v:.12g}"
    return str(v)


def write_table(
    path,
    columns: Mapping[str, Sequence],
    comments: Iterable[str] = (),
) -> None:
    """Write a comment-headed CSV; all columns must share one length."""
    names = list(columns)
    lengths = {len(columns[c]) for c in names}
    if len(lengths) > 1:
        raise ValueError(f"ragged columns: {dict((c, len(columns[c])) for c in names)}")
    n_rows = lengths.pop() if lengths else 0
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(names) + "\n")
        for r in range(n_rows):
            fh.write(",".join(fmt_value(columns[c][r]) for c in names) + "\n")


def write_meta(path, payload: dict, timestamp: bool = True) -> None:
    """Write the JSON sidecar; adds artifact version and (optionally) a timestamp."""
    payload = dict(payload)
    payload.setdefault("artifact_version", ARTIFACT_VERSION)
    if timestamp:
        payload["written_at"] = datetime.now(timezone.utc).isoformat()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_coerce)
        fh.write("\n")


def _coerce(obj):
    try:
        import numpy as np

        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, np.generic):
            return obj.item()
    except ImportError:  # pragma: no cover
        pass
    raise TypeError(f"not JSON serializable: {type(obj)}")


def read_table(path) -> tuple[dict[str, str], dict[str, list[str]]]:
    """Parse a comment-headed CSV back into (comments, string columns)."""
    comments: dict[str, str] = {}
    names: list[str] | None = None
    cols: dict[str, list[str]] = {}
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    comments[key.strip()] = val.strip()
                continue
            if names is None:
                names = line.split(",")
                cols = {c: [] for c in names}
                continue
            for c, v in zip(names, line.split(",")):
                cols[c].append(v)
    return comments, cols
