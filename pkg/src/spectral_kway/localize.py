"""Smooth localization of an embedding onto neighborhoods of vertex sets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySet, MassTooSmall, SeparationViolated, ValidationError
from .geometry import MetricView
from .graph import WeightedGraph, as_mask
from .spectral import best_coordinate, edge_energy, mass, rayleigh


@dataclass(frozen=True, eq=False)
class LocalizedFunction:
    """``psi(v) = theta(v) F(v)`` with ``theta = max(0, 1 - dist(v, S) / eps)``."""

    psi: np.ndarray
    theta: np.ndarray
    distance: np.ndarray
    source_set: np.ndarray
    eps: float

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(np.any(self.psi != 0, axis=1) if self.psi.ndim == 2 else self.psi != 0)


def cutoff(distance: np.ndarray, eps: float) -> np.ndarray:
    if math.isinf(eps):
        return np.where(np.isfinite(distance), 1.0, 0.0)
    with np.errstate(invalid="ignore"):
        theta = 1.0 - distance / eps
    theta[~np.isfinite(distance)] = 0.0
    return np.clip(theta, 0.0, 1.0)


def bump_localize(g: WeightedGraph, F, S, eps: float, mv: MetricView | None = None) -> LocalizedFunction:
    """Multiply F by a cutoff that is 1 on S and decays linearly in the
    induced path distance to S, vanishing from distance ``eps`` on."""
    F = np.asarray(F, dtype=float)
    F2 = F[:, None] if F.ndim == 1 else F
    if not eps > 0:
        raise ValidationError(f"eps must be positive, got {eps}")
    mask = as_mask(g.n, S)
    if not mask.any():
        raise EmptySet("cannot localize onto an empty set")
    if mv is None:
        mv = MetricView(F2, g, mode="induced-path")
    dist = mv.induced(np.flatnonzero(mask))
    theta = cutoff(dist, eps)
    theta[mask] = 1.0
    psi = theta[:, None] * F2
    return LocalizedFunction(psi if F.ndim == 2 else psi[:, 0], theta, dist, np.flatnonzero(mask), eps)


@dataclass
class BumpCertificate:
    """Per-run checks for :func:`disjoint_bumps`."""

    beta: float
    mass_fraction: float
    rayleigh_F: float
    bounds: np.ndarray
    rayleigh: np.ndarray
    energy_total: float
    energy_bound: float
    disjoint: bool
    separations: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (self.disjoint
                and bool(np.all(self.rayleigh <= self.bounds * (1 + 1e-9) + 1e-15))
                and self.energy_total <= self.energy_bound * (1 + 1e-9) + 1e-15)


@dataclass
class BumpResult:
    functions: list
    coordinates: list
    localized: list
    order: list
    certificate: BumpCertificate


def group_distances(mv: MetricView, groups) -> list:
    return [mv.induced(np.asarray(T)) for T in groups]


def min_separation(groups, dists) -> tuple[float, tuple]:
    best, pair = math.inf, (-1, -1)
    for i, d in enumerate(dists):
        for j, T in enumerate(groups):
            if j <= i:
                continue
            s = float(d[np.asarray(T)].min()) if len(T) else math.inf
            if s < best:
                best, pair = s, (i, j)
    return best, pair


def disjoint_bumps(g: WeightedGraph, F, groups, beta: float | None = None,
                   mass_fraction: float | None = None, mv: MetricView | None = None) -> BumpResult:
    """Localize F onto each group with ``eps = beta / 2`` and scalarize.

    The groups must be pairwise at least ``beta`` apart in the induced path
    metric; when ``beta`` is None the measured minimum separation is used.
    Each group must carry at least ``mass_fraction`` of the total mass
    (defaults to the smallest fraction present). Functions come back sorted
    by Rayleigh quotient, each reduced to its best coordinate.
    """
    F = np.asarray(F, dtype=float)
    F2 = F[:, None] if F.ndim == 1 else F
    if not groups:
        raise ValidationError("no groups to localize")
    if mv is None:
        mv = MetricView(F2, g, mode="induced-path")
    groups = [np.asarray(T, dtype=np.int64) for T in groups]
    if any(T.size == 0 for T in groups):
        raise EmptySet("empty group")
    dists = group_distances(mv, groups)
    sep, pair = min_separation(groups, dists)
    if beta is None:
        beta = sep
    elif sep < beta * (1 - 1e-12):
        raise SeparationViolated(pair, sep, beta)
    if not beta > 0:
        raise SeparationViolated(pair, sep, beta)

    vmass = g.degree * (F2 * F2).sum(1)
    total = float(vmass.sum())
    fractions = np.array([vmass[T].sum() / total for T in groups])
    if mass_fraction is None:
        mass_fraction = float(fractions.min())
    elif np.any(fractions < mass_fraction * (1 - 1e-12)):
        i = int(np.argmin(fractions))
        raise MassTooSmall(f"group {i} holds {fractions[i]:.4g} of the mass, need {mass_fraction:.4g}")

    eps = beta / 2.0
    localized = []
    for T, d in zip(groups, dists):
        theta = cutoff(d, eps)
        theta[T] = 1.0
        localized.append(LocalizedFunction(theta[:, None] * F2, theta, d, T, eps))

    supports = [set(lf.support.tolist()) for lf in localized]
    disjoint = all(not (supports[i] & supports[j])
                   for i in range(len(supports)) for j in range(i + 1, len(supports)))

    energy_F = edge_energy(g, F2)
    rF = energy_F / total
    energy_total = sum(edge_energy(g, lf.psi) for lf in localized)
    stretch = (1.0 + 4.0 / beta) ** 2 if math.isfinite(beta) else 1.0
    energy_bound = 2.0 * stretch * energy_F

    scalars, coords = [], []
    for lf in localized:
        j, s = best_coordinate(g, lf.psi)
        scalars.append(s)
        coords.append(j)
    rq = np.array([rayleigh(g, s) for s in scalars])
    order = list(np.argsort(rq, kind="stable"))
    r = len(groups)
    bounds = np.array([2.0 / (mass_fraction * (r - i)) * stretch * rF for i in range(r)])
    cert = BumpCertificate(beta, mass_fraction, rF, bounds, rq[order], energy_total,
                           energy_bound, disjoint, {"min": sep, "pair": pair})
    return BumpResult([scalars[i] for i in order], [coords[i] for i in order],
                      [localized[i] for i in order], [int(i) for i in order], cert)
