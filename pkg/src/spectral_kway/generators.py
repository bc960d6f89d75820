"""Deterministic and seeded graph families."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import DegenerateParameters, DimensionTooLarge, ValidationError
from .graph import WeightedGraph, graph_from_arrays

HYPERCUBE_DENSE_CAP = 14


def path(n: int) -> WeightedGraph:
    if n < 2:
        raise ValidationError("a path needs at least 2 vertices")
    i = np.arange(n - 1)
    return graph_from_arrays(n, i, i + 1)


def cycle(n: int) -> WeightedGraph:
    if n < 3:
        raise ValidationError("a cycle needs at least 3 vertices")
    i = np.arange(n)
    return graph_from_arrays(n, i, (i + 1) % n)


def grid(a: int, b: int) -> WeightedGraph:
    """a x b grid; vertex (i, j) has id ``i * b + j``."""
    if a < 1 or b < 1 or a * b < 2:
        raise ValidationError("grid needs at least 2 vertices")
    ids = np.arange(a * b).reshape(a, b)
    u = np.concatenate([ids[:, :-1].ravel(), ids[:-1, :].ravel()])
    v = np.concatenate([ids[:, 1:].ravel(), ids[1:, :].ravel()])
    return graph_from_arrays(a * b, u, v)


def complete(n: int) -> WeightedGraph:
    if n < 2:
        raise ValidationError("complete graph needs at least 2 vertices")
    u, v = np.triu_indices(n, 1)
    return graph_from_arrays(n, u, v)


def clique_union(c: int, s: int, bridge_w: float, ring: bool = False) -> WeightedGraph:
    """c cliques of size s; consecutive cliques joined by one bridge of weight ``bridge_w``.

    Clique i occupies ids ``i*s .. i*s+s-1``; the bridge runs from its last
    vertex to the first vertex of clique i+1 (and back to clique 0 when
    ``ring``). ``bridge_w = 0`` leaves the cliques disconnected.
    """
    if c < 1 or s < 2:
        raise ValidationError("need c >= 1 cliques of size s >= 2")
    if bridge_w < 0:
        raise ValidationError("bridge weight must be non-negative")
    iu, iv = np.triu_indices(s, 1)
    us = [iu + i * s for i in range(c)]
    vs = [iv + i * s for i in range(c)]
    ws = [np.ones(iu.size) for _ in range(c)]
    if bridge_w > 0 and c > 1:
        links = c if ring and c > 2 else c - 1
        a = np.array([i * s + s - 1 for i in range(links)])
        b = np.array([((i + 1) % c) * s for i in range(links)])
        us.append(a)
        vs.append(b)
        ws.append(np.full(links, float(bridge_w)))
    return graph_from_arrays(c * s, np.concatenate(us), np.concatenate(vs), np.concatenate(ws))


def clique_union_truth(c: int, s: int) -> list:
    return [list(range(i * s, (i + 1) * s)) for i in range(c)]


def planted_partition(k: int, size: int, p_in: float, p_out: float, seed: int):
    """Stochastic block model with k equal clusters. Returns ``(graph, clusters)``.

    A vertex left without edges is tied to a random member of its own cluster.
    """
    if not (0 <= p_out <= 1 and 0 <= p_in <= 1):
        raise DegenerateParameters("probabilities must lie in [0, 1]")
    if p_in < p_out:
        raise DegenerateParameters("need p_in >= p_out")
    if k < 1 or size < 2:
        raise DegenerateParameters("need k >= 1 clusters of size >= 2")
    n = k * size
    rng = np.random.Generator(np.random.Philox(seed))
    u, v = np.triu_indices(n, 1)
    same = (u // size) == (v // size)
    p = np.where(same, p_in, p_out)
    keep = rng.random(u.size) < p
    u, v = u[keep], v[keep]
    deg = np.bincount(u, minlength=n) + np.bincount(v, minlength=n)
    extra_u, extra_v = [], []
    for x in np.flatnonzero(deg == 0):
        c = x // size
        others = [y for y in range(c * size, (c + 1) * size) if y != x]
        y = int(rng.choice(others))
        extra_u.append(min(x, y))
        extra_v.append(max(x, y))
    if extra_u:
        pairs = set(zip(u.tolist(), v.tolist()))
        new = [(a, b) for a, b in zip(extra_u, extra_v) if (a, b) not in pairs]
        new = sorted(set(new))
        if new:
            u = np.concatenate([u, [a for a, _ in new]])
            v = np.concatenate([v, [b for _, b in new]])
    clusters = [list(range(i * size, (i + 1) * size)) for i in range(k)]
    return graph_from_arrays(n, u, v), clusters


def gnp(n: int, p: float, seed: int, connect: bool = True) -> WeightedGraph:
    """Erdos-Renyi graph; with ``connect`` a random spanning path is overlaid so w(v) > 0."""
    rng = np.random.Generator(np.random.Philox(seed))
    u, v = np.triu_indices(n, 1)
    keep = rng.random(u.size) < p
    u, v = u[keep], v[keep]
    if connect:
        perm = rng.permutation(n)
        a, b = np.minimum(perm[:-1], perm[1:]), np.maximum(perm[:-1], perm[1:])
        u = np.concatenate([u, a])
        v = np.concatenate([v, b])
    return graph_from_arrays(n, u, v, merge_duplicates=True)


def noisy_hypercube(dim: int, eps: float, truncate: float | None = None) -> WeightedGraph:
    """Complete graph on {0,1}^dim with w(x, y) = eps ** hamming(x, y), no self-loops.

    Every weighted degree equals (1 + eps)^dim - 1. With ``truncate`` set,
    weights below it are dropped (approximate, sparse; allowed past the dense cap).
    """
    if not 0 < eps < 1:
        raise ValidationError(f"eps must lie in (0, 1), got {eps}")
    if dim < 1:
        raise ValidationError("dimension must be at least 1")
    if dim > HYPERCUBE_DENSE_CAP and truncate is None:
        raise DimensionTooLarge(f"dense noisy hypercube limited to dim <= {HYPERCUBE_DENSE_CAP}")
    n = 1 << dim
    if truncate is None:
        u, v = np.triu_indices(n, 1)
        d = _popcount(u ^ v)
        return graph_from_arrays(n, u, v, eps ** d.astype(float))
    max_d = dim if truncate <= 0 else min(dim, int(math.floor(math.log(truncate) / math.log(eps))))
    us, vs, ws = [], [], []
    x = np.arange(n)
    for d in range(1, max_d + 1):
        for flips in combinations(range(dim), d):
            mask = sum(1 << i for i in flips)
            y = x ^ mask
            keep = x < y
            us.append(x[keep])
            vs.append(y[keep])
            ws.append(np.full(int(keep.sum()), eps ** d))
    return graph_from_arrays(n, np.concatenate(us), np.concatenate(vs), np.concatenate(ws))


def _popcount(a: np.ndarray) -> np.ndarray:
    a = a.astype(np.int64)
    count = np.zeros_like(a)
    while np.any(a):
        count += a & 1
        a >>= 1
    return count


def hypercube_auto_eps(dim: int, C: float = 1.0) -> float:
    """eps = log 2 / log(dim / C), the choice that forces expansion >= 1/2 on small sets."""
    if dim / C <= 2:
        raise ValidationError("auto eps needs dim / C > 2")
    return math.log(2.0) / math.log(dim / C)


@dataclass
class FamilySpec:
    """Named graph family plus parameters, as accepted by the CLI."""

    family: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    FAMILIES = ("path", "cycle", "grid", "complete", "clique-union", "planted-partition",
                "gnp", "noisy-hypercube")


def generate(spec: FamilySpec):
    """Build the graph for a family spec. Returns ``(graph, ground_truth or None)``."""
    p = spec.params
    f = spec.family

    def need(*names):
        missing = [x for x in names if p.get(x) is None]
        if missing:
            raise ValidationError(f"family {f!r} needs parameters: {', '.join(missing)}")
        return [p[x] for x in names]

    if f == "path":
        (n,) = need("n")
        return path(int(n)), None
    if f == "cycle":
        (n,) = need("n")
        return cycle(int(n)), None
    if f == "grid":
        a, b = need("rows", "cols")
        return grid(int(a), int(b)), None
    if f == "complete":
        (n,) = need("n")
        return complete(int(n)), None
    if f == "clique-union":
        c, s = need("clusters", "size")
        bw = float(p.get("bridge", 0.0) or 0.0)
        return clique_union(int(c), int(s), bw, ring=bool(p.get("ring", False))), clique_union_truth(int(c), int(s))
    if f == "planted-partition":
        c, s, pin, pout = need("clusters", "size", "p_in", "p_out")
        return planted_partition(int(c), int(s), float(pin), float(pout), spec.seed)
    if f == "gnp":
        n, q = need("n", "p")
        return gnp(int(n), float(q), spec.seed), None
    if f == "noisy-hypercube":
        (dim,) = need("dim")
        eps = p.get("eps", "auto")
        eps = hypercube_auto_eps(int(dim)) if eps in (None, "auto") else float(eps)
        return noisy_hypercube(int(dim), eps, p.get("truncate")), None
    raise ValidationError(f"unknown family {f!r}; choose from {', '.join(FamilySpec.FAMILIES)}")
