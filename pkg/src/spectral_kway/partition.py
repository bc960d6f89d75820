"""Random geometric partitions of embedded vertices and mass-based grouping of cells."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientMass, ValidationError
from .geometry import MetricView


@dataclass(frozen=True, eq=False)
class RandomPartition:
    """Disjoint cells over a vertex set, with a per-cell mass.

    ``cells[i]`` is a sorted array of vertex ids. ``total_mass`` is the mass
    of the whole embedding, which may exceed ``masses.sum()`` once cells have
    been trimmed (see :meth:`restrict`).
    """

    cells: list
    scheme: str
    Delta: float
    seed: int | None
    masses: np.ndarray
    total_mass: float
    fallback_cells: int = 0

    @property
    def m(self) -> int:
        return len(self.cells)

    def labels(self, n: int) -> np.ndarray:
        lab = np.full(n, -1, dtype=np.int64)
        for i, c in enumerate(self.cells):
            lab[c] = i
        return lab

    def restrict(self, keep: np.ndarray, vertex_mass: np.ndarray) -> "RandomPartition":
        """Cells intersected with a vertex mask; emptied cells are dropped."""
        cells = [c[keep[c]] for c in self.cells]
        cells = [c for c in cells if c.size]
        masses = np.array([vertex_mass[c].sum() for c in cells])
        return RandomPartition(cells, self.scheme, self.Delta, self.seed, masses,
                               self.total_mass, self.fallback_cells)


def _cells_from_labels(vertices, labels, vertex_mass):
    # cells ordered by first appearance in label order; vertices sorted inside
    order = np.argsort(labels, kind="stable")
    lab_sorted = labels[order]
    splits = np.flatnonzero(np.diff(lab_sorted)) + 1
    cells = [np.sort(vertices[idx]) for idx in np.split(order, splits)] if labels.size else []
    masses = np.array([vertex_mass[c].sum() for c in cells]) if vertex_mass is not None else np.zeros(len(cells))
    return cells, masses


def shifted_grid_partition(points, Delta: float, seed: int, vertices=None,
                           vertex_mass=None) -> RandomPartition:
    """Randomly shifted axis-aligned grid with cube side ``Delta / sqrt(h)``.

    Cells are half-open cubes, so every cell has Euclidean diameter below
    ``Delta``. ``points[i]`` is the image of ``vertices[i]``.
    """
    points = np.asarray(points, dtype=float)
    if not Delta > 0:
        raise ValidationError(f"Delta must be positive, got {Delta}")
    m, h = points.shape
    vertices = np.arange(m) if vertices is None else np.asarray(vertices)
    side = Delta / math.sqrt(h)
    rng = np.random.Generator(np.random.Philox(seed))
    offset = rng.uniform(0.0, side, size=h)
    keys = np.floor((points + offset) / side).astype(np.int64)
    _, labels = np.unique(keys, axis=0, return_inverse=True)
    labels = labels.reshape(-1)
    # renumber cells by their lowest vertex so output order does not depend on coordinates
    first = np.full(labels.max() + 1 if m else 0, np.iinfo(np.int64).max)
    np.minimum.at(first, labels, vertices)
    labels = np.argsort(np.argsort(first, kind="stable"), kind="stable")[labels]
    vm = None if vertex_mass is None else np.asarray(vertex_mass, dtype=float)
    cells, masses = _cells_from_labels(vertices, labels, vm)
    total = float(vm.sum()) if vm is not None else 0.0
    return RandomPartition(cells, "shifted-grid", Delta, seed, masses, total)


def _uniform_ball(rng, size, h):
    x = rng.standard_normal((size, h))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    r = rng.uniform(0.0, 1.0, size=size) ** (1.0 / h)
    return x * r[:, None]


def ball_carving(points, R: float, seed: int, vertices=None, vertex_mass=None,
                 batch: int = 256, dead_draw_factor: int = 64) -> RandomPartition:
    """Carve cells ``B(x_i, R)`` minus earlier balls, with centers uniform in the unit ball.

    Points are expected on the unit sphere. After ``dead_draw_factor * m``
    draws the remaining points are carved by balls centered on the
    lexicographically smallest uncovered point, which guarantees termination.
    Cell diameters are at most ``2R``.
    """
    points = np.asarray(points, dtype=float)
    if not 0.0 < R <= 1.0:
        raise ValidationError(f"R must lie in (0, 1], got {R}")
    m, h = points.shape
    vertices = np.arange(m) if vertices is None else np.asarray(vertices)
    rng = np.random.Generator(np.random.Philox(seed))
    labels = np.full(m, -1, dtype=np.int64)
    uncovered = np.arange(m)
    draws = 0
    R2 = R * R
    pn = (points * points).sum(1)
    while uncovered.size and draws < dead_draw_factor * max(m, 1):
        C = _uniform_ball(rng, batch, h)
        P = points[uncovered]
        sq = pn[uncovered][None, :] + (C * C).sum(1)[:, None] - 2.0 * C @ P.T
        hit = sq <= R2
        any_hit = hit.any(axis=0)
        first = np.argmax(hit, axis=0)
        labels[uncovered[any_hit]] = draws + first[any_hit]
        uncovered = uncovered[~any_hit]
        draws += batch
    fallback = 0
    next_label = draws
    while uncovered.size:
        P = points[uncovered]
        lead = uncovered[np.lexsort(P.T[::-1])[0]]
        d2 = ((points[uncovered] - points[lead]) ** 2).sum(1)
        take = d2 <= R2
        labels[uncovered[take]] = next_label
        uncovered = uncovered[~take]
        next_label += 1
        fallback += 1
    vm = None if vertex_mass is None else np.asarray(vertex_mass, dtype=float)
    cells, masses = _cells_from_labels(vertices, labels, vm)
    total = float(vm.sum()) if vm is not None else 0.0
    return RandomPartition(cells, "ball-carving", 2.0 * R, seed, masses, total, fallback)


def metric_ball_partition(mv: MetricView, Delta: float, seed: int, vertex_mass=None) -> RandomPartition:
    """Random-order ball partition in the induced path metric.

    Centers are taken in a random order with a common radius drawn from
    ``[Delta/4, Delta/2]``; each vertex joins the first center within that
    radius. Cells have path-metric (hence radial) diameter at most ``Delta``.
    Only vertices with nonzero F take part.
    """
    if not Delta > 0:
        raise ValidationError(f"Delta must be positive, got {Delta}")
    rng = np.random.Generator(np.random.Philox(seed))
    radius = rng.uniform(Delta / 4.0, Delta / 2.0)
    live = np.flatnonzero(mv.nonzero)
    perm = rng.permutation(live)
    D = mv.induced_all(limit=radius * (1 + 1e-12))
    within = D[np.ix_(perm, live)] <= radius
    labels = np.argmax(within, axis=0)  # each vertex is within 0 of itself
    vm = None if vertex_mass is None else np.asarray(vertex_mass, dtype=float)
    cells, masses = _cells_from_labels(live, labels, vm)
    total = float(vm.sum()) if vm is not None else 0.0
    return RandomPartition(cells, "metric-ball", Delta, seed, masses, total)


def padded_core(mv: MetricView, p: RandomPartition, radius: float) -> np.ndarray:
    """Mask of vertices whose closed path-metric ball of ``radius`` stays in their cell."""
    lab = p.labels(mv.n)
    core = lab >= 0
    if radius <= 0:
        return core
    lengths = mv.edge_lengths()
    g = mv.graph
    crossing = (lab[g.u] != lab[g.v]) & np.isfinite(lengths)
    if not crossing.any() or lengths[crossing].min() > radius:
        return core
    D = mv.induced_all(limit=radius * (1 + 1e-12))
    near = D <= radius
    for v in np.flatnonzero(core):
        nbrs = np.flatnonzero(near[v])
        if np.any(lab[nbrs] != lab[v]):
            core[v] = False
    return core


def cell_diameters(points, p: RandomPartition, vertices=None, sample_limit: int = 512,
                   seed: int = 0) -> np.ndarray:
    """Euclidean diameter of each cell; exact up to ``sample_limit`` members, sampled beyond."""
    points = np.asarray(points, dtype=float)
    pos = None
    if vertices is not None:
        pos = np.full(int(np.max(vertices)) + 1, -1)
        pos[np.asarray(vertices)] = np.arange(len(vertices))
    rng = np.random.default_rng(seed)
    out = np.zeros(p.m)
    for i, c in enumerate(p.cells):
        idx = pos[c] if pos is not None else c
        if idx.size > sample_limit:
            idx = rng.choice(idx, size=sample_limit, replace=False)
        X = points[idx]
        sq = (X * X).sum(1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * X @ X.T
        out[i] = math.sqrt(max(0.0, float(d2.max())))
    return out


@dataclass
class GroupedPartition:
    """Disjoint vertex groups built as unions of partition cells."""

    groups: list
    masses: np.ndarray
    k: int
    members: list = field(default_factory=list)
    delta: float | None = None
    total_mass: float = 0.0
    counting_check: bool | None = None


def group_cells_lemma(p: RandomPartition, k: int, r: int, masses=None) -> GroupedPartition:
    """Pack cells into r disjoint groups each holding at least 1/(2k) of the total mass.

    Cells are taken in descending mass order and poured into the current
    group until it reaches the threshold. Raises :class:`InsufficientMass`
    when a cell exceeds the per-cell cap ``(1/k + (k-r+1)/(8kr))`` of the
    total, or when fewer than r groups can be filled.
    """
    if not (k / 2.0 <= r <= k):
        raise ValidationError(f"need k/2 <= r <= k, got k={k}, r={r}")
    masses = p.masses if masses is None else np.asarray(masses, dtype=float)
    total = p.total_mass if p.total_mass > 0 else float(masses.sum())
    cap = (1.0 / k + (k - r + 1) / (8.0 * k * r)) * total
    if masses.size and masses.max() > cap * (1 + 1e-12):
        i = int(np.argmax(masses))
        raise InsufficientMass(
            f"cell {i} holds {masses[i] / total:.4f} of the mass, cap is {cap / total:.4f}")
    threshold = total / (2.0 * k)
    order = np.argsort(-masses, kind="stable")
    groups, gm, members = [], [], []
    cur, cur_mass = [], 0.0
    for i in order:
        if len(groups) == r:
            break
        cur.append(int(i))
        cur_mass += masses[i]
        if cur_mass >= threshold:
            members.append(cur)
            groups.append(np.sort(np.concatenate([p.cells[j] for j in cur])))
            gm.append(cur_mass)
            cur, cur_mass = [], 0.0
    if len(groups) < r:
        raise InsufficientMass(f"only {len(groups)} of {r} groups reach mass 1/(2k)")
    gm = np.array(gm)
    bound = (1.0 - (k - r + 1) / (4.0 * r) - 1.0 / (2.0 * k)) * total
    counting = bool(gm[: r - 1].sum() <= bound * (1 + 1e-12))
    return GroupedPartition(groups, gm, k, members, total_mass=total, counting_check=counting)


def balance_groups(p: RandomPartition, k_prime: int) -> GroupedPartition:
    """Keep the ``k'`` heaviest cells as groups and merge each remaining cell,
    heaviest first, into the currently lightest group (lowest index on ties)."""
    if p.m < 1:
        raise ValidationError("cannot balance an empty partition")
    order = np.argsort(-p.masses, kind="stable")
    q = min(p.m, k_prime)
    members = [[int(i)] for i in order[:q]]
    gm = [float(p.masses[i]) for i in order[:q]]
    for i in order[q:]:
        ell = int(np.argmin(gm))
        members[ell].append(int(i))
        gm[ell] += float(p.masses[i])
    groups = [np.sort(np.concatenate([p.cells[j] for j in mem])) for mem in members]
    return GroupedPartition(groups, np.array(gm), k_prime, members, total_mass=p.total_mass)
