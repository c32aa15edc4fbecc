"""Result serialization: atomic file writes, JSON/CSV rendering, run manifests.

Reals are rendered with 17 significant digits everywhere so written numbers
round-trip to the exact double that produced them.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from pathlib import Path

from .montecarlo import SweepTable
from .survey import SchemeComparison


def format_real(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite real {x!r}")
    return format(float(x), ".17g")


def render_json(obj, indent: int = 0) -> str:
    """JSON text with floats at 17 significant digits."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}{json.dumps(str(k))}: {render_json(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{render_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, float):
        return format_real(obj)
    if isinstance(obj, int):
        return str(obj)
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_real(v)
    return str(v)


def render_csv(columns, records) -> str:
    lines = [",".join(columns)]
    for rec in records:
        lines.append(",".join(_cell(rec[c]) for c in columns))
    return "\n".join(lines) + "\n"


def write_atomic(path: str | Path, text: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_table(table, fmt: str) -> str:
    if fmt == "csv":
        return render_csv(table.columns, table.records())
    if fmt == "json":
        return render_json(table.records()) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def render_record(record: dict, fmt: str) -> str:
    if fmt == "csv":
        return render_csv(list(record), [record])
    if fmt == "json":
        return render_json(record) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit_plot_data(table, path: str | Path) -> None:
    """Write a long-format x/y(/series) CSV projection of a results table."""
    if isinstance(table, SweepTable):
        if not table.rows:
            raise ValueError("empty sweep table")
        records = [
            {"theta1": r.theta1, "error_sum": r.alpha_hat + r.beta_hat, "bound": r.bound}
            for r in table.rows
        ]
        write_atomic(path, render_csv(("theta1", "error_sum", "bound"), records))
        return
    if isinstance(table, SchemeComparison):
        records = [{"scheme": s, "rmse": table.rmse[s]} for s in table.rmse]
        if not records:
            raise ValueError("empty comparison table")
        write_atomic(path, render_csv(("scheme", "rmse"), records))
        return
    raise TypeError(f"no plot projection for {type(table).__name__}")


def sha256_of(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def write_manifest(
    results_path: str | Path, results_text: str, config_record: dict, wall_time_s: float
) -> Path:
    """Write the reproducibility manifest next to a results file."""
    import platform

    import numpy
    import scipy

    from . import __version__

    results_path = Path(results_path)
    manifest = {
        "results_file": results_path.name,
        "results_sha256": sha256_of(results_text),
        "config": config_record,
        "versions": {
            "pxkit": __version__,
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "wall_time_s": wall_time_s,
    }
    manifest_path = results_path.with_name(results_path.name + ".manifest.json")
    write_atomic(manifest_path, render_json(manifest) + "\n")
    return manifest_path
