"""Deterministic CSV/JSON writers: no timestamps, shortest round-trip float text."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


def _plain(value):
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _cell(value):
    value = _plain(value)
    return repr(value) if isinstance(value, float) else value


def write_csv(path, header, rows):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def write_json(path, data):
    path = Path(path)
    path.write_text(json.dumps(_plain(data), indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")
    return path


def matrix_rows(u):
    """Interleaved (re, im) rows of a complex matrix, with a matching header."""
    u = np.asarray(u, dtype=complex)
    header = [f"c{j}_{part}" for j in range(u.shape[1]) for part in ("re", "im")]
    rows = [[x for z in row for x in (z.real, z.imag)] for row in u]
    return header, rows


def read_matrix_csv(path):
    with Path(path).open(encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        rows = [[float(x) for x in r] for r in reader]
    arr = np.array(rows)
    return arr[:, 0::2] + 1j * arr[:, 1::2]
