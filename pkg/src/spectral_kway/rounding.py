"""Cheeger sweep rounding of vertex maps into low-expansion sets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyGroup, EmptyInput, Overlap, ValidationError, ZeroFunction
from .graph import WeightedGraph, as_mask, cut_weight


@dataclass(frozen=True)
class SweepResult:
    set: tuple[int, ...]
    threshold: float
    expansion: float
    cut_weight: float
    set_weight: float
    source: object = None

    @property
    def size(self) -> int:
        return len(self.set)


def squared_norms(psi) -> np.ndarray:
    a = np.asarray(psi, dtype=float)
    return a * a if a.ndim == 1 else np.einsum("ij,ij->i", a, a)


def sweep_profile(g: WeightedGraph, values: np.ndarray, scope: np.ndarray):
    """Cut and set weight of every superlevel set ``{v in scope : values[v] >= t}``.

    ``t`` runs over the distinct positive values in scope, descending.
    Returns ``(thresholds, order, level_of_vertex, cut, weight)``. O(|E| + n log n).
    """
    live = scope & (values > 0)
    cand = np.flatnonzero(live)
    if cand.size == 0:
        raise ZeroFunction("map vanishes on the sweep scope")
    thresholds, inv = np.unique(-values[cand], return_inverse=True)
    thresholds = -thresholds
    nlev = thresholds.size
    level = np.full(g.n, nlev, dtype=np.int64)  # nlev = never included
    level[cand] = inv.reshape(-1)
    weight = np.cumsum(np.bincount(level[cand], weights=g.degree[cand], minlength=nlev))
    lu, lv = level[g.u], level[g.v]
    lo, hi = np.minimum(lu, lv), np.maximum(lu, lv)
    # an edge is cut at levels lo <= j < hi
    enter = np.bincount(lo[lo < nlev], weights=g.w[lo < nlev], minlength=nlev)
    inner = hi < nlev
    leave = np.bincount(hi[inner], weights=g.w[inner], minlength=nlev)
    cut = np.maximum(np.cumsum(enter) - np.cumsum(leave), 0.0)
    return thresholds, level, cut, weight


def cheeger_sweep(g: WeightedGraph, psi, scope=None, source=None) -> SweepResult:
    """Best superlevel set of ``||psi(v)||^2`` by expansion.

    Only vertices in ``scope`` (default: all) may join the set, but every
    edge leaving the set counts toward the cut. Ties go to the lighter set.
    The winning set's metrics are recomputed exactly from its edges.
    """
    q = squared_norms(psi)
    if q.shape[0] != g.n:
        raise ValidationError(f"map has {q.shape[0]} entries for {g.n} vertices")
    scope = np.ones(g.n, dtype=bool) if scope is None else as_mask(g.n, scope)
    if not np.any(q > 0):
        raise ZeroFunction("cannot sweep the zero map")
    thresholds, level, cut, weight = sweep_profile(g, q, scope)
    phi = cut / weight
    lo = phi.min()
    near = np.flatnonzero(phi <= lo + 1e-9 * max(lo, 1e-12))
    best = None
    for j in near:  # nested candidates, increasing weight
        mask = level <= j
        cw = cut_weight(g, mask)
        sw = float(g.degree[mask].sum())
        key = (cw / sw, sw)
        if best is None or key < best[0]:
            best = (key, j, mask, cw, sw)
    _, j, mask, cw, sw = best
    return SweepResult(tuple(int(i) for i in np.flatnonzero(mask)), float(thresholds[j]),
                       cw / sw, cw, sw, source)


def multiway_threshold_round(g: WeightedGraph, F, groups, r: int) -> list:
    """Sweep ``||F||^2`` inside each group and keep the r best sets.

    Results are ordered by expansion, then weight, then vertex list.
    """
    if r < 1:
        raise ValidationError(f"r must be positive, got {r}")
    q = squared_norms(F)
    results = []
    seen = np.zeros(g.n, dtype=bool)
    for i, T in enumerate(groups):
        T = np.asarray(T, dtype=np.int64)
        if T.size == 0 or not np.any(q[T] > 0):
            raise EmptyGroup(f"group {i} has no vertex with nonzero F")
        if seen[T].any():
            raise Overlap(f"group {i} overlaps an earlier group")
        seen[T] = True
        results.append(cheeger_sweep(g, F, scope=T, source=i))
    results.sort(key=lambda s: (s.expansion, s.set_weight, s.set))
    if len(results) < r:
        raise ValidationError(f"{len(results)} groups cannot supply {r} sets")
    return results[:r]


@dataclass(frozen=True)
class CompletedPartition:
    sets: list
    expansions: list
    certified_bound: float
    completion_expansion: float

    @property
    def max_expansion(self) -> float:
        return max(self.expansions)


def complete_to_partition(g: WeightedGraph, sets) -> CompletedPartition:
    """Order sets by weight and replace the heaviest with the complement of the rest.

    The replacement set's expansion is at most k times the largest input
    expansion; that product is returned as ``certified_bound``.
    """
    if not sets:
        raise EmptyInput("no sets to complete")
    masks = []
    used = np.zeros(g.n, dtype=bool)
    for i, S in enumerate(sets):
        m = as_mask(g.n, S)
        if not m.any():
            raise EmptyInput(f"set {i} is empty")
        if (used & m).any():
            raise Overlap(f"set {i} overlaps an earlier set")
        used |= m
        masks.append(m)
    weights = [float(g.degree[m].sum()) for m in masks]
    keys = [(w, tuple(np.flatnonzero(m))) for w, m in zip(weights, masks)]
    order = sorted(range(len(masks)), key=lambda i: keys[i])
    masks = [masks[i] for i in order]
    input_phi = [cut_weight(g, m) / g.degree[m].sum() for m in masks]
    rest = np.zeros(g.n, dtype=bool)
    for m in masks[:-1]:
        rest |= m
    last = ~rest
    masks[-1] = last
    out = [tuple(int(i) for i in np.flatnonzero(m)) for m in masks]
    phis = [float(cut_weight(g, m) / g.degree[m].sum()) for m in masks]
    k = len(masks)
    return CompletedPartition(out, phis, float(k * max(input_phi)), phis[-1])
