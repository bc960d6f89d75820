"""Weighted undirected graphs, expansion metrics and exact small-graph oracles."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import (
    DuplicateEdge,
    EmptySet,
    IsolatedVertex,
    NonPositiveWeight,
    SelfLoop,
    TooLarge,
    ValidationError,
)

EXACT_CAP = 12


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Immutable undirected graph with strictly positive edge weights.

    Edges are stored once per unordered pair with ``u < v``, sorted
    lexicographically. Use :func:`build_graph` to construct one.
    """

    n: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    degree: np.ndarray = field(repr=False)

    @property
    def num_edges(self) -> int:
        return int(self.w.size)

    @cached_property
    def total_weight(self) -> float:
        return float(self.degree.sum())

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric weighted adjacency matrix in CSR form."""
        rows = np.concatenate([self.u, self.v])
        cols = np.concatenate([self.v, self.u])
        vals = np.concatenate([self.w, self.w])
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.n, self.n))

    def edges(self) -> list[tuple[int, int, float]]:
        return [(int(a), int(b), float(c)) for a, b, c in zip(self.u, self.v, self.w)]

    def set_weight(self, mask: np.ndarray) -> float:
        return float(self.degree[mask].sum())

    def components(self) -> tuple[int, np.ndarray]:
        """Number of connected components and a label per vertex."""
        count, labels = connected_components(self.adjacency, directed=False)
        return int(count), labels


@dataclass(frozen=True)
class CutMetrics:
    set: tuple[int, ...]
    cut_weight: float
    set_weight: float
    expansion: float


def build_graph(n: int, edge_list: Iterable[Sequence], merge_duplicates: bool = False) -> WeightedGraph:
    """Validate an edge list and return the canonical graph.

    Each entry is ``(u, v)`` or ``(u, v, w)``; a missing weight means 1.0.
    Duplicate pairs raise unless ``merge_duplicates`` is set, in which case
    their weights are summed.
    """
    if n < 1:
        raise ValidationError(f"vertex count must be positive, got {n}")
    us, vs, ws = [], [], []
    for item in edge_list:
        if len(item) == 2:
            a, b = item
            c = 1.0
        else:
            a, b, c = item[:3]
        a, b, c = int(a), int(b), float(c)
        if not (0 <= a < n and 0 <= b < n):
            raise ValidationError(f"edge ({a}, {b}) out of range for n={n}")
        if a == b:
            raise SelfLoop(f"self-loop at vertex {a}")
        if not (c > 0.0) or not np.isfinite(c):
            raise NonPositiveWeight(f"edge ({a}, {b}) has weight {c}")
        if a > b:
            a, b = b, a
        us.append(a)
        vs.append(b)
        ws.append(c)
    u = np.asarray(us, dtype=np.int64)
    v = np.asarray(vs, dtype=np.int64)
    w = np.asarray(ws, dtype=np.float64)
    return _from_arrays(n, u, v, w, merge_duplicates)


def _from_arrays(n, u, v, w, merge_duplicates=False) -> WeightedGraph:
    order = np.lexsort((v, u))
    u, v, w = u[order], v[order], w[order]
    if u.size > 1:
        same = (u[1:] == u[:-1]) & (v[1:] == v[:-1])
        if same.any():
            if not merge_duplicates:
                i = int(np.flatnonzero(same)[0])
                raise DuplicateEdge(f"duplicate edge ({u[i]}, {v[i]})")
            start = np.concatenate([[True], ~same])
            idx = np.cumsum(start) - 1
            w = np.bincount(idx, weights=w)
            u, v = u[start], v[start]
    degree = np.bincount(u, weights=w, minlength=n) + np.bincount(v, weights=w, minlength=n)
    isolated = np.flatnonzero(degree <= 0.0)
    if isolated.size:
        raise IsolatedVertex(f"vertex {int(isolated[0])} has zero weighted degree")
    return WeightedGraph(n, _frozen(u), _frozen(v), _frozen(w.astype(np.float64)), _frozen(degree))


def graph_from_arrays(n: int, u, v, w=None, merge_duplicates: bool = False) -> WeightedGraph:
    """Vectorized :func:`build_graph` for generators and file readers."""
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    w = np.ones(u.size) if w is None else np.asarray(w, dtype=np.float64)
    if u.size and (u.min() < 0 or v.min() < 0 or u.max() >= n or v.max() >= n):
        raise ValidationError("edge endpoint out of range")
    if np.any(u == v):
        raise SelfLoop(f"self-loop at vertex {int(u[u == v][0])}")
    if np.any(~(w > 0)) or not np.all(np.isfinite(w)):
        raise NonPositiveWeight("edge weights must be positive and finite")
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    return _from_arrays(n, lo, hi, w, merge_duplicates)


def as_mask(n: int, S) -> np.ndarray:
    """Boolean membership mask from a vertex iterable or an existing mask."""
    arr = np.asarray(S)
    if arr.dtype == bool and arr.shape == (n,):
        return arr
    mask = np.zeros(n, dtype=bool)
    idx = np.asarray(list(S) if not isinstance(S, np.ndarray) else S, dtype=np.int64)
    mask[idx] = True
    return mask


def cut_weight(g: WeightedGraph, mask: np.ndarray) -> float:
    crossing = mask[g.u] != mask[g.v]
    return float(g.w[crossing].sum())


def expansion(g: WeightedGraph, S) -> CutMetrics:
    """Dirichlet conductance w(E(S, S^c)) / w(S) of a nonempty vertex set."""
    mask = as_mask(g.n, S)
    if not mask.any():
        raise EmptySet("expansion of an empty set is undefined")
    cw = cut_weight(g, mask)
    sw = g.set_weight(mask)
    return CutMetrics(tuple(int(i) for i in np.flatnonzero(mask)), cw, sw, cw / sw)


def subset_expansions(g: WeightedGraph) -> np.ndarray:
    """Expansion of every subset, indexed by bitmask; entry 0 is +inf."""
    n = g.n
    masks = np.arange(1 << n, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    sw = bits @ g.degree
    cross = bits[:, g.u] != bits[:, g.v]
    cw = cross @ g.w
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.where(sw > 0, cw / np.where(sw > 0, sw, 1.0), np.inf)
    phi[0] = np.inf
    return phi


def _ternary_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    """All (C, A) with A a nonempty submask of C, as two bitmask arrays."""
    idx = np.arange(3**n, dtype=np.int64)
    C = np.zeros_like(idx)
    A = np.zeros_like(idx)
    for j in range(n):
        digit = (idx // 3**j) % 3
        C |= (digit > 0).astype(np.int64) << j
        A |= (digit == 2).astype(np.int64) << j
    keep = A > 0
    return C[keep], A[keep]


def k_way_expansion_exact(g: WeightedGraph, k: int, cap: int = EXACT_CAP):
    """Exact k-way expansion constant by exhaustive search.

    Returns ``(rho, witness)`` where ``witness`` is a list of k disjoint
    vertex tuples attaining the minimum of the maximum expansion.
    Runs in O(k 3^n); refuses graphs larger than ``cap``.
    """
    n = g.n
    if n > cap:
        raise TooLarge(f"exact k-way expansion limited to n <= {cap}, got {n}")
    if not 1 <= k <= n:
        raise ValidationError(f"k must lie in [1, {n}], got {k}")
    phi = subset_expansions(g)
    C, A = _ternary_pairs(n)
    rest = C ^ A
    size = 1 << n
    # best[C] for j sets inside C; j = 0 is "no constraint"
    best = np.full(size, -np.inf)
    choices = []
    for _ in range(k):
        cand = np.maximum(phi[A], best[rest])
        nxt = np.full(size, np.inf)
        np.minimum.at(nxt, C, cand)
        # first A attaining the minimum, for a deterministic witness
        hit = cand == nxt[C]
        arg = np.full(size, -1, dtype=np.int64)
        idx = np.flatnonzero(hit)[::-1]
        arg[C[idx]] = A[idx]
        choices.append(arg)
        best = nxt
    full = size - 1
    rho = float(best[full])
    witness = []
    mask = full
    for arg in reversed(choices):
        a = int(arg[mask])
        witness.append(tuple(i for i in range(n) if a >> i & 1))
        mask ^= a
    witness.sort()
    return rho, witness
