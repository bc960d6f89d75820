"""Radial projection distance, its induced path metric, spreading checks and
Gaussian dimension reduction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .errors import DimensionMismatch, RetriesExhausted, ValidationError, ZeroFunction
from .graph import WeightedGraph
from .spectral import edge_energy, mass

# scipy's csgraph drops explicit zeros, so zero-length edges are stored with this length
# and distances below _ZERO_SNAP are reported as exactly 0.
_TINY_LENGTH = 1e-300
_ZERO_SNAP = 1e-280


class MetricView:
    """Distances induced by a vertex map ``F: V -> R^h``.

    ``mode="radial"`` evaluates d_F, the Euclidean distance between the unit
    directions of F(u) and F(v) (0 if both vanish, inf if exactly one does).
    ``mode="induced-path"`` evaluates the shortest-path metric on ``graph``
    with edge lengths d_F.
    """

    def __init__(self, F, graph: WeightedGraph | None = None, mode: str = "radial"):
        F = np.asarray(F, dtype=float)
        if F.ndim == 1:
            F = F[:, None]
        if mode not in ("radial", "induced-path"):
            raise ValidationError(f"unknown metric mode {mode!r}")
        if mode == "induced-path" and graph is None:
            raise ValidationError("induced-path mode needs a graph")
        if graph is not None and graph.n != F.shape[0]:
            raise DimensionMismatch(f"F has {F.shape[0]} rows, graph has {graph.n} vertices")
        self.F = F
        self.graph = graph
        self.mode = mode
        self.norms = np.linalg.norm(F, axis=1)
        self.nonzero = self.norms > 0
        unit = np.zeros_like(F)
        unit[self.nonzero] = F[self.nonzero] / self.norms[self.nonzero, None]
        self.unit = unit
        self._lengths = None

    @property
    def n(self) -> int:
        return self.F.shape[0]

    def radial(self, u: int, v: int) -> float:
        zu, zv = not self.nonzero[u], not self.nonzero[v]
        if zu and zv:
            return 0.0
        if zu or zv:
            return math.inf
        return float(np.linalg.norm(self.unit[u] - self.unit[v]))

    def radial_rows(self, rows, cols=None) -> np.ndarray:
        """Block of radial distances, honoring the zero-vector conventions."""
        rows = np.asarray(rows)
        cols = np.arange(self.n) if cols is None else np.asarray(cols)
        X, Y = self.unit[rows], self.unit[cols]
        sq = (X * X).sum(1)[:, None] + (Y * Y).sum(1)[None, :] - 2.0 * X @ Y.T
        D = np.sqrt(np.maximum(sq, 0.0))
        # the Gram form cancels badly for close directions; redo those directly
        close = np.argwhere(sq < 1e-6)
        if close.size:
            i, j = close[:, 0], close[:, 1]
            D[i, j] = np.linalg.norm(X[i] - Y[j], axis=1)
        zr, zc = ~self.nonzero[rows], ~self.nonzero[cols]
        D[np.logical_xor(zr[:, None], zc[None, :])] = math.inf
        D[np.logical_and(zr[:, None], zc[None, :])] = 0.0
        return D

    def edge_lengths(self) -> np.ndarray:
        """d_F on every edge of the graph (inf where exactly one end vanishes)."""
        if self._lengths is None:
            g = self.graph
            d = np.linalg.norm(self.unit[g.u] - self.unit[g.v], axis=1)
            zu, zv = ~self.nonzero[g.u], ~self.nonzero[g.v]
            d[zu & zv] = 0.0
            d[zu ^ zv] = math.inf
            self._lengths = d
        return self._lengths

    def _length_graph(self) -> sp.csr_matrix:
        g = self.graph
        d = self.edge_lengths()
        ok = np.isfinite(d)
        lengths = np.where(d[ok] > 0, d[ok], _TINY_LENGTH)
        u, v = g.u[ok], g.v[ok]
        return sp.csr_matrix((np.concatenate([lengths, lengths]),
                              (np.concatenate([u, v]), np.concatenate([v, u]))),
                             shape=(g.n, g.n))

    def induced(self, sources, limit: float = math.inf) -> np.ndarray:
        """Distance from the nearest vertex in ``sources`` under the path metric.

        One multi-source Dijkstra pass; unreachable vertices get inf.
        """
        if self.graph is None:
            raise ValidationError("induced path distances need a graph")
        src = np.atleast_1d(np.asarray(sources, dtype=np.int64))
        if src.size == 0:
            return np.full(self.n, math.inf)
        dist = dijkstra(self._length_graph(), directed=False, indices=src,
                        min_only=True, limit=limit)
        dist = np.asarray(dist, dtype=float)
        dist[dist < _ZERO_SNAP] = 0.0
        dist[src] = 0.0
        return dist

    def induced_all(self, limit: float = math.inf) -> np.ndarray:
        """All-pairs path-metric distances, optionally truncated at ``limit``."""
        D = dijkstra(self._length_graph(), directed=False, limit=limit)
        D[D < _ZERO_SNAP] = 0.0
        np.fill_diagonal(D, 0.0)
        return D


def radial_distance(mv: MetricView, u: int, v: int) -> float:
    return mv.radial(u, v)


def induced_path_distance(mv: MetricView, source) -> np.ndarray:
    return mv.induced([source] if np.isscalar(source) else source)


@dataclass
class LipschitzReport:
    pairs_checked: int
    max_slack: float
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_norm_lipschitz(mv: MetricView, all_pairs: bool | None = None, tol: float = 1e-12) -> LipschitzReport:
    """Check ``d_F(u,v) ||F(u)|| <= 2 ||F(u) - F(v)||``.

    Only pairs with both vectors nonzero are checked: when exactly one
    vanishes, d_F is infinite and the inequality has no content. Edges are
    always checked (both orientations); all ordered pairs too when
    ``all_pairs`` is set (default for n <= 256 or when there is no graph).
    ``max_slack`` is the largest ``lhs - rhs`` seen (<= 0 when it holds).
    """
    if all_pairs is None:
        all_pairs = mv.graph is None or mv.n <= 256
    if all_pairs:
        idx = np.arange(mv.n)
        a, b = np.repeat(idx, mv.n), np.tile(idx, mv.n)
    else:
        g = mv.graph
        a = np.concatenate([g.u, g.v])
        b = np.concatenate([g.v, g.u])
    keep = mv.nonzero[a] & mv.nonzero[b]
    a, b = a[keep], b[keep]
    d = np.linalg.norm(mv.unit[a] - mv.unit[b], axis=1)
    lhs = d * mv.norms[a]
    rhs = 2.0 * np.linalg.norm(mv.F[a] - mv.F[b], axis=1)
    slack = lhs - rhs
    bad = slack > tol * np.maximum(1.0, rhs)
    viol = [(int(x), int(y), float(s)) for x, y, s in zip(a[bad], b[bad], slack[bad])]
    return LipschitzReport(int(a.size), float(slack.max()) if slack.size else 0.0, viol)


@dataclass
class SpreadingCertificate:
    delta: float
    eta: float
    checked_sets: int
    violations: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations


def spreading_check(g: WeightedGraph, mv: MetricView, Delta: float, eta: float,
                    probes: int | None = None, seed: int = 0,
                    exhaustive_limit: int = 4096) -> SpreadingCertificate:
    """Probe ``(Delta, eta)``-spreading with d_F-balls of radius Delta/2.

    Each probe is the closed ball around a vertex with nonzero F; its mass
    ``sum w(v) ||F(v)||^2`` must not exceed ``eta`` times the total. Every
    center is probed when n <= ``exhaustive_limit`` and ``probes`` is None.
    """
    if not 0.0 < Delta:
        raise ValidationError(f"Delta must be positive, got {Delta}")
    vmass = g.degree * mv.norms**2
    total = float(vmass.sum())
    if total <= 0:
        raise ZeroFunction("spreading of the zero map")
    centers = np.flatnonzero(mv.nonzero)
    if probes is not None or g.n > exhaustive_limit:
        rng = np.random.default_rng(seed)
        m = min(probes or 1024, centers.size)
        centers = np.sort(rng.choice(centers, size=m, replace=False))
    radius = Delta / 2.0
    cap = eta * total * (1.0 + 1e-12)
    violations = []
    for start in range(0, centers.size, 512):
        block = centers[start:start + 512]
        D = mv.radial_rows(block)
        ball_mass = (D <= radius) @ vmass
        for c, m in zip(block[ball_mass > cap], ball_mass[ball_mass > cap]):
            violations.append((int(c), float(m / total)))
    return SpreadingCertificate(Delta, eta, int(centers.size), violations)


def spreading_eta(k: int, Delta: float) -> float:
    """Mass fraction bound 1/(k(1 - Delta^2)) for an orthonormal k-system."""
    return 1.0 / (k * (1.0 - Delta**2))


@dataclass(frozen=True, eq=False)
class GaussianProjection:
    """Random linear map ``x -> h^{-1/2} G x`` with i.i.d. standard normal G."""

    k: int
    h: int
    seed: int
    matrix: np.ndarray = field(repr=False)

    @classmethod
    def sample(cls, k: int, h: int, seed: int) -> "GaussianProjection":
        rng = np.random.Generator(np.random.Philox(seed))
        G = rng.standard_normal((h, k)) / math.sqrt(h)
        G.flags.writeable = False
        return cls(k, h, seed, G)

    def __call__(self, x):
        return project(self, x)


def project(gp: GaussianProjection, F) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    if F.shape[-1] != gp.k:
        raise DimensionMismatch(f"projection expects dimension {gp.k}, got {F.shape[-1]}")
    return F @ gp.matrix.T


def projection_dimension(k: int, Delta: float) -> int:
    """Smallest h with ``2 exp(-d^2 h / 12) <= d^2 k^-3 / 128`` where d = Delta/16."""
    d = Delta / 16.0
    return int(math.ceil((12.0 / d**2) * math.log(256.0 * k**3 / d**2)))


@dataclass
class ReductionReport:
    h: int
    attempts: int
    rayleigh_ratio: float
    mass_ratio: float
    out_of_band_fraction: float
    identity: bool
    seed: int | None


def reduce_dimension(g: WeightedGraph, F, Delta: float, retries: int = 16, seed: int = 0,
                     h: int | None = None, check_mass: bool | None = None):
    """Project F to fewer dimensions while keeping its Rayleigh quotient.

    ``h`` defaults to :func:`projection_dimension`; when it is at least the
    input dimension F is returned unchanged. An attempt is accepted when the
    Rayleigh quotient grows by at most 8x and (if ``check_mass``) the total
    mass stays within a factor ``1 +- Delta/8``. The mass test defaults to
    on only when ``h`` comes from :func:`projection_dimension`; a caller-chosen
    small ``h`` cannot meet a band that tight. Returns ``(F', h, report)``.
    """
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    if not 0.0 < Delta <= 1.0:
        raise ValidationError(f"Delta must lie in (0, 1], got {Delta}")
    k = F.shape[1]
    base_mass = mass(g, F)
    if base_mass <= 0:
        raise ZeroFunction("cannot project the zero map")
    base_energy = edge_energy(g, F)
    if check_mass is None:
        check_mass = h is None
    if h is None:
        h = projection_dimension(k, Delta)
    if h >= k:
        return F, k, ReductionReport(k, 0, 1.0, 1.0, 0.0, True, None)
    band = Delta / 16.0
    sq = (F * F).sum(1)
    live = sq > 0
    for attempt in range(retries):
        s = seed * 1_000_003 + attempt
        gp = GaussianProjection.sample(k, h, s)
        P = project(gp, F)
        new_mass = mass(g, P)
        if new_mass <= 0:
            continue
        ratio = (edge_energy(g, P) / new_mass) / (base_energy / base_mass) if base_energy > 0 else (
            0.0 if edge_energy(g, P) == 0 else math.inf)
        mass_ratio = new_mass / base_mass
        if ratio > 8.0:
            continue
        if check_mass and not (1 - 2 * band <= mass_ratio <= 1 + 2 * band):
            continue
        psq = (P * P).sum(1)
        out = live & ((psq < (1 - band) * sq) | (psq > (1 + band) * sq))
        frac = float(out.sum() / max(1, live.sum()))
        return P, h, ReductionReport(h, attempt + 1, float(ratio), float(mass_ratio), frac, False, s)
    raise RetriesExhausted(f"no projection to h={h} passed after {retries} attempts")
