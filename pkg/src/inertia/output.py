"""Data and manifest writers.

All numeric output uses Python's round-trip ``repr`` formatting, so parsing
a written file recovers the exact doubles that were computed and re-running
with the same parameters reproduces files byte for byte. Manifests are
written atomically (temp file + rename) after the data files they describe.
"""

from __future__ import annotations

import json
import os

import numpy as np

from . import __version__
from .errors import InvalidArgument

__all__ = ["format_float", "write_csv", "write_json", "write_manifest"]


def format_float(x: float) -> str:
    return repr(float(x))


def _validate_columns(columns: dict) -> int:
    if not columns:
        raise InvalidArgument("no columns to write")
    lengths = {len(v) for v in columns.values()}
    if len(lengths) != 1:
        raise InvalidArgument(f"columns have unequal lengths: {sorted(lengths)}")
    return lengths.pop()


def write_csv(path, columns: dict[str, np.ndarray]) -> None:
    """Write named columns as CSV with a header row and LF line endings."""
    n = _validate_columns(columns)
    names = list(columns)
    arrays = [np.asarray(columns[name]) for name in names]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join(format_float(a[i]) for a in arrays) + "\n")


def write_json(path, columns: dict[str, np.ndarray]) -> None:
    """Columnar JSON mirror of the CSV schema."""
    _validate_columns(columns)
    doc = {name: [float(x) for x in np.asarray(col)] for name, col in columns.items()}
    with open(path, "w", newline="") as fh:
        json.dump({"columns": doc}, fh, indent=1)
        fh.write("\n")


def write_manifest(
    out_dir: str,
    experiment: str,
    parameters: dict,
    outputs: list[str],
    duration_seconds: float,
    seed: int | None = None,
    rng_algorithm: str | None = None,
) -> str:
    """Atomically write ``manifest.json`` describing a finished run."""
    manifest = {
        "experiment": experiment,
        "parameters": parameters,
        "seed": seed,
        "rng_algorithm": rng_algorithm,
        "version": __version__,
        "outputs": outputs,
        "duration_seconds": duration_seconds,
    }
    path = os.path.join(out_dir, "manifest.json")
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")
    os.replace(tmp, path)
    return path
