"""Graph file readers: whitespace edge lists and Matrix Market coordinate files."""

from __future__ import annotations

import os

import numpy as np
import scipy.io
import scipy.sparse as sp

from .errors import InputNotFound, ParseError
from .graph import WeightedGraph, graph_from_arrays


def _check_exists(path):
    if not os.path.isfile(path):
        raise InputNotFound(f"no such file: {path}")


def read_edge_list(path, n: int | None = None, merge_duplicates: bool = False) -> WeightedGraph:
    """Read ``u v [w]`` lines (0-indexed). ``#`` starts a comment line.

    The vertex count defaults to one more than the largest id seen.
    """
    _check_exists(path)
    us, vs, ws = [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise ParseError(f"{path}:{lineno}: expected 'u v [w]', got {line!r}")
            try:
                a, b = int(parts[0]), int(parts[1])
                c = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
            us.append(a)
            vs.append(b)
            ws.append(c)
    if not us and n is None:
        raise ParseError(f"{path}: no edges")
    if n is None:
        n = max(max(us), max(vs)) + 1
    return graph_from_arrays(n, us, vs, ws, merge_duplicates=merge_duplicates)


def read_matrix_market(path, merge_duplicates: bool = False) -> WeightedGraph:
    """Read a symmetric Matrix Market coordinate file (pattern or real)."""
    _check_exists(path)
    try:
        m = scipy.io.mmread(path)
    except Exception as exc:  # scipy raises a mix of ValueError/IndexError
        raise ParseError(f"{path}: {exc}") from None
    if not sp.issparse(m):
        raise ParseError(f"{path}: expected coordinate format")
    m = sp.coo_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ParseError(f"{path}: matrix is not square {m.shape}")
    if np.iscomplexobj(m.data):
        raise ParseError(f"{path}: complex entries are not supported")
    rows, cols, vals = m.row, m.col, m.data.astype(float)
    if (abs(m - m.T) > 0).nnz:
        raise ParseError(f"{path}: matrix is not symmetric")
    upper = rows <= cols
    return graph_from_arrays(m.shape[0], rows[upper], cols[upper], vals[upper],
                             merge_duplicates=merge_duplicates)


def read_graph(path, merge_duplicates: bool = False) -> WeightedGraph:
    """Dispatch on content: files starting with ``%%MatrixMarket`` use the MM reader."""
    _check_exists(path)
    with open(path, encoding="utf-8", errors="replace") as fh:
        head = fh.readline()
    if head.startswith("%%MatrixMarket"):
        return read_matrix_market(path, merge_duplicates)
    return read_edge_list(path, merge_duplicates=merge_duplicates)


def read_labels(path, n: int) -> list[str]:
    _check_exists(path)
    with open(path, encoding="utf-8") as fh:
        labels = [line.rstrip("\n") for line in fh if line.strip()]
    if len(labels) != n:
        raise ParseError(f"{path}: {len(labels)} labels for {n} vertices")
    return labels
