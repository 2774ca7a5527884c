"""Deterministic CSV/JSON writers with a provenance header."""
from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__

FLOAT_FORMAT = "{:.9g}"


def fmt(v) -> str:
    """Render one CSV cell; floats get 9 significant digits."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return FLOAT_FORMAT.format(v)
    try:
        import numpy as np

        if isinstance(v, np.floating):
            return fmt(float(v))
        if isinstance(v, np.integer):
            return str(int(v))
        if isinstance(v, np.bool_):
            return fmt(bool(v))
    except ImportError:  # pragma: no cover
        pass
    return str(v)


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def provenance(config: dict | None) -> dict:
    return {"package": "kerrspt", "version": __version__,
            "config_sha256": config_hash(config or {})}


def csv_text(columns: Sequence[str], rows: Iterable[Sequence], config: dict | None = None) -> str:
    prov = provenance(config)
    lines = [f"# {prov['package']} {prov['version']} config_sha256={prov['config_sha256']}",
             ",".join(columns)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path, columns, rows, config=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(columns, rows, config))
    return path


def _clean(obj):
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return str(obj)
        return obj
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    try:
        import numpy as np

        if isinstance(obj, np.generic):
            return _clean(obj.item())
        if isinstance(obj, np.ndarray):
            return _clean(obj.tolist())
    except ImportError:  # pragma: no cover
        pass
    return obj


def json_text(doc: dict, config: dict | None = None) -> str:
    out = {"provenance": provenance(config)}
    out.update(_clean(doc))
    return json.dumps(out, indent=2, sort_keys=True) + "\n"


def write_json(path, doc, config=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json_text(doc, config))
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Columns and raw string rows of a file written by `write_csv`."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    cols = lines[0].split(",")
    return cols, [ln.split(",") for ln in lines[1:]]
