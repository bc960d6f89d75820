"""End-to-end multi-way partitioning algorithms.

Each algorithm runs ``trials`` independently seeded attempts and keeps the
best output. Inside a trial the partition diameter is swept over a ladder
that starts at the value the guarantees call for and doubles up to 1; the
guaranteed setting is always among the attempts, so keeping the best can
only improve on it.
"""

from __future__ import annotations

import math
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ComputationError, PipelineFailure, ValidationError
from .geometry import MetricView, reduce_dimension
from .graph import WeightedGraph
from .localize import disjoint_bumps
from .partition import (
    balance_groups,
    ball_carving,
    group_cells_lemma,
    metric_ball_partition,
    padded_core,
    shifted_grid_partition,
)
from .rounding import cheeger_sweep, complete_to_partition, multiway_threshold_round
from .spectral import SpectralEmbedding, eigenbasis, rayleigh


@dataclass
class PipelineConfig:
    k: int
    delta: float | None = None
    seed: int = 0
    trials: int = 16
    metric: str = "radial"
    project: bool = True
    tol: float = 1e-8
    exact_cap: int = 12
    k_prime: int | None = None
    eig_factor: float = 2.0
    project_dim: int | None = None
    projection_retries: int = 16
    diameter: float | None = None
    ladder: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError(f"k must be at least 1, got {self.k}")
        if self.delta is None:
            self.delta = 1.0 / (2 * self.k)
        if not 0.0 < self.delta < 1.0:
            raise ValidationError(f"delta must lie in (0, 1), got {self.delta}")
        if self.trials < 1:
            raise ValidationError("trials must be at least 1")
        if self.metric not in ("radial", "induced-path"):
            raise ValidationError(f"unknown metric {self.metric!r}")
        if self.diameter is not None and not 0.0 < self.diameter <= 1.0:
            raise ValidationError("diameter must lie in (0, 1]")
        if self.threads < 1:
            raise ValidationError("threads must be at least 1")


@dataclass
class PipelineReport:
    algorithm: str
    k: int
    delta: float
    r: int
    sets: list = field(default_factory=list)
    expansions: list = field(default_factory=list)
    functions: list = field(default_factory=list)
    rayleigh: list = field(default_factory=list)
    eigenvalues: list = field(default_factory=list)
    ratios: dict = field(default_factory=dict)
    chosen: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    seed: int = 0
    wall_time: float = 0.0
    attempts: list = field(default_factory=list)

    def to_dict(self) -> dict:
        """JSON-ready view; the per-attempt log is left out (see ``attempts``)."""
        d = asdict(self)
        d.pop("attempts")
        d["functions"] = [[float(x) for x in f] for f in self.functions]
        return d


def trial_seed(seed: int, i: int) -> int:
    """Seed of trial i; independent of how many trials run, so seed sequences nest."""
    return int(np.random.SeedSequence([seed, i]).generate_state(1, np.uint64)[0] >> 1)


def clamp_delta(delta: float) -> float:
    return min(delta, 0.5)


def spreading_diameter(delta: float) -> float:
    """Largest Delta with 1/(1 - Delta^2) <= 1 + delta/48."""
    return math.sqrt(delta / (48.0 + delta))


def projected_diameter(delta: float, slack: float = 48.0) -> float:
    """Largest Delta with (1 + 4 Delta)/(1 - 16 Delta^2) <= 1 + delta/slack, by bisection."""
    target = 1.0 + delta / slack

    def ok(D):
        return 16 * D * D < 1 and (1 + 4 * D) / (1 - 16 * D * D) <= target

    lo, hi = 0.0, 0.25
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return lo


def diameter_ladder(base: float, cfg: PipelineConfig, top: float = 1.0) -> list:
    if cfg.diameter is not None:
        return [cfg.diameter]
    if not cfg.ladder:
        return [base]
    out, d = [], base
    while d < top:
        out.append(d)
        d *= 2.0
    out.append(top)
    return out


def default_projection_dim(m: int) -> int:
    return max(1, min(m, int(math.ceil(4.0 * math.log(max(m, 2))))))


def _run_trials(fn, cfg: PipelineConfig):
    """Run ``fn(i, seed, failures)`` per trial; results come back in trial order."""
    seeds = [trial_seed(cfg.seed, i) for i in range(cfg.trials)]
    counters = [Counter() for _ in seeds]
    if cfg.threads > 1 and cfg.trials > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as ex:
            results = list(ex.map(fn, range(cfg.trials), seeds, counters))
    else:
        results = [fn(i, s, c) for i, s, c in zip(range(cfg.trials), seeds, counters)]
    failures = sum(counters, Counter())
    return [c for batch in results for c in batch], failures


def _sign_split(emb: SpectralEmbedding) -> list:
    f = emb.F[:, 1]
    return [np.maximum(f, 0.0), np.maximum(-f, 0.0)]


# ---------------------------------------------------------------- functions


def _function_candidates(g: WeightedGraph, k: int, delta: float, cfg: PipelineConfig,
                         reduced: bool, emb: SpectralEmbedding):
    delta = clamp_delta(delta)
    r_groups = int(math.ceil((1 - delta / 2) * k))
    r_out = int(math.ceil((1 - delta) * k))
    F0 = emb.F
    if reduced:
        base = projected_diameter(delta)
    else:
        base = spreading_diameter(delta)
    ladder = diameter_ladder(base, cfg)

    def one_trial(t, seed, failures):
        out = []
        F, h, red = F0, F0.shape[1], None
        if reduced:
            try:
                F, h, red = reduce_dimension(g, F0, base, retries=cfg.projection_retries, seed=seed,
                                             h=cfg.project_dim)
            except ComputationError as exc:
                failures[exc.kind] += 1
                return out
        mv = MetricView(F, g, mode="induced-path")
        vmass = g.degree * mv.norms**2
        live = np.flatnonzero(mv.nonzero)
        for j, Delta in enumerate(ladder):
            pseed = seed * 7919 + j
            try:
                if cfg.metric == "radial":
                    p = shifted_grid_partition(mv.unit[live], Delta, pseed, vertices=live, vertex_mass=vmass)
                else:
                    p = metric_ball_partition(mv, Delta, pseed, vertex_mass=vmass)
                alpha = 4.0 * h**1.5 / (delta / 24.0)
                core = padded_core(mv, p, Delta / alpha)
                cores = p.restrict(core, vmass)
                grouped = group_cells_lemma(cores, k, r_groups)
                bumps = disjoint_bumps(g, F, grouped.groups, mass_fraction=1.0 / (2 * k), mv=mv)
            except ComputationError as exc:
                failures[exc.kind] += 1
                continue
            except ValidationError as exc:
                failures[exc.kind] += 1
                continue
            funcs = bumps.functions[:r_out]
            rq = [float(x) for x in bumps.certificate.rayleigh[:r_out]]
            out.append({
                "functions": funcs, "rayleigh": rq, "objective": max(rq),
                "trial": t, "seed": seed, "Delta": Delta, "h": h,
                "cells": p.m, "beta": bumps.certificate.beta,
                "certificate_ok": bumps.certificate.ok,
                "projection": None if red is None else asdict(red),
            })
        return out

    cands, failures = _run_trials(one_trial, cfg)
    if k == 2 and r_out <= 2:
        funcs = _sign_split(emb)
        if all(np.any(f > 0) for f in funcs):
            rq = [rayleigh(g, f) for f in funcs]
            order = np.argsort(rq, kind="stable")[:r_out]
            cands.append({"functions": [funcs[i] for i in order], "rayleigh": [rq[i] for i in order],
                          "objective": max(rq[i] for i in order), "trial": None, "seed": None,
                          "Delta": None, "h": emb.k, "cells": 2, "beta": None,
                          "certificate_ok": True, "projection": None, "route": "sign-split"})
    return cands, failures, r_out


def _pick(cands, key):
    best = None
    for c in cands:
        v = key(c)
        if best is None or v < best[0]:
            best = (v, c)
    return best[1]


def _chosen(c):
    keys = ("trial", "seed", "Delta", "h", "cells", "beta", "certificate_ok", "route")
    return {k: c.get(k) for k in keys if k in c}


def _attempts(cands, key="objective"):
    return [{"trial": c.get("trial"), "Delta": c.get("Delta"), "h": c.get("h"),
             "cells": c.get("cells"), "objective": float(c[key]), "route": c.get("route", "grid")}
            for c in cands]


def _ratio(num, den):
    return None if den <= 1e-12 else float(num / den)


def _embedding(g, m, cfg):
    return eigenbasis(g, m, tol=cfg.tol, seed=cfg.seed)


def disjoint_support_functions(g: WeightedGraph, k: int, delta: float | None = None,
                               cfg: PipelineConfig | None = None, reduced: bool = False) -> PipelineReport:
    """At least ceil((1 - delta) k) disjointly supported scalar functions with
    small Rayleigh quotients relative to lambda_k.

    With ``reduced`` the eigenfunction embedding is first randomly projected
    (see :func:`geometry.reduce_dimension`).
    """
    t0 = time.perf_counter()
    cfg = cfg or PipelineConfig(k=k)
    delta = cfg.delta if delta is None else delta
    if not 1 <= k <= g.n:
        raise ValidationError(f"k must lie in [1, {g.n}], got {k}")
    emb = _embedding(g, k, cfg)
    cands, failures, r_out = _function_candidates(g, k, delta, cfg, reduced, emb)
    if not cands:
        raise PipelineFailure("no trial produced enough separated heavy groups",
                              {"failures": dict(failures), "trials": cfg.trials})
    best = _pick(cands, lambda c: c["objective"])
    lam_k = float(emb.eigenvalues[-1])
    return PipelineReport(
        algorithm="functions-reduced" if reduced else "functions", k=k, delta=delta, r=r_out,
        functions=[np.asarray(f) for f in best["functions"]], rayleigh=best["rayleigh"],
        eigenvalues=[float(x) for x in emb.eigenvalues],
        ratios={"max_rayleigh_over_lambda_k": _ratio(best["objective"], lam_k)},
        chosen=_chosen(best) | {"projection": best["projection"]},
        diagnostics={"candidates": len(cands), "failures": dict(sorted(failures.items()))},
        seed=cfg.seed, wall_time=time.perf_counter() - t0, attempts=_attempts(cands))


def disjoint_support_functions_reduced(g, k, delta=None, cfg=None) -> PipelineReport:
    return disjoint_support_functions(g, k, delta, cfg, reduced=True)


# ---------------------------------------------------------------- partition


def k_way_partition(g: WeightedGraph, k: int, cfg: PipelineConfig | None = None) -> PipelineReport:
    """Partition V into k sets, each of small expansion relative to sqrt(lambda_k).

    Disjoint functions at delta = 1/(2k), one sweep per function, then the
    heaviest set is replaced by the complement of the others.
    """
    t0 = time.perf_counter()
    cfg = cfg or PipelineConfig(k=k)
    if not 1 <= k <= g.n:
        raise ValidationError(f"k must lie in [1, {g.n}], got {k}")
    delta = 1.0 / (2 * k)
    emb = _embedding(g, k, cfg)
    cands, failures, r_out = _function_candidates(g, k, delta, cfg, False, emb)
    scored = []
    for c in cands:
        sweeps = [cheeger_sweep(g, f) for f in c["functions"]]
        done = complete_to_partition(g, [s.set for s in sweeps])
        if any(len(s) == 0 for s in done.sets):
            failures["EmptyCompletion"] += 1
            continue
        scored.append(c | {"partition": done, "objective_phi": done.max_expansion})
    if not scored:
        raise PipelineFailure("no trial produced a k-partition",
                              {"failures": dict(failures), "trials": cfg.trials})
    best = _pick(scored, lambda c: (c["objective_phi"], c["objective"]))
    part = best["partition"]
    lam_k = float(emb.eigenvalues[-1])
    mx = part.max_expansion
    return PipelineReport(
        algorithm="partition", k=k, delta=delta, r=k,
        sets=[list(s) for s in part.sets], expansions=list(part.expansions),
        rayleigh=best["rayleigh"], eigenvalues=[float(x) for x in emb.eigenvalues],
        ratios={"max_phi_over_sqrt_lambda_k": _ratio(mx, math.sqrt(max(lam_k, 0.0))),
                "completion_bound": part.certified_bound},
        chosen=_chosen(best),
        diagnostics={"candidates": len(scored), "failures": dict(sorted(failures.items()))},
        seed=cfg.seed, wall_time=time.perf_counter() - t0, attempts=_attempts(scored, "objective_phi"))


# ---------------------------------------------------------------- sparse cuts


def k_sparse_cuts(g: WeightedGraph, k: int, delta: float | None = None,
                  cfg: PipelineConfig | None = None) -> PipelineReport:
    """At least ceil((1 - delta) k) disjoint sets of small expansion.

    Embeds with ``eig_factor * k`` eigenfunctions, projects to
    O(log k) dimensions, carves the sphere with random balls, balances the
    cells into ceil(3k/2) groups and sweeps each group.
    """
    t0 = time.perf_counter()
    cfg = cfg or PipelineConfig(k=k)
    delta = cfg.delta if delta is None else delta
    if not 0 < delta < 1:
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")
    m = int(math.ceil(cfg.eig_factor * k))
    if not 1 <= k or m > g.n:
        raise ValidationError(f"{m} eigenfunctions requested for a graph on {g.n} vertices")
    r = int(math.ceil((1 - delta) * k))
    k_prime = cfg.k_prime or int(math.ceil(1.5 * k))
    emb = _embedding(g, m, cfg)
    F0 = emb.F
    base = projected_diameter(delta, slack=4.0)
    ladder = [d / 2.0 for d in diameter_ladder(base, cfg, top=2.0)]
    h_target = cfg.project_dim or default_projection_dim(m)

    def one_trial(t, seed, failures):
        out = []
        F, h, red = F0, m, None
        if cfg.project and h_target < m:
            try:
                F, h, red = reduce_dimension(g, F0, max(base, 1e-6), retries=cfg.projection_retries,
                                             seed=seed, h=h_target, check_mass=False)
            except ComputationError as exc:
                failures[exc.kind] += 1
                return out
        mv = MetricView(F, g)
        vmass = g.degree * mv.norms**2
        live = np.flatnonzero(mv.nonzero)
        for j, R in enumerate(ladder):
            pseed = seed * 7919 + j
            p = ball_carving(mv.unit[live], R, pseed, vertices=live, vertex_mass=vmass)
            grouped = balance_groups(p, k_prime)
            if len(grouped.groups) < r:
                failures["TooFewCells"] += 1
                continue
            try:
                res = multiway_threshold_round(g, F, grouped.groups, r)
            except (ValidationError, ComputationError) as exc:
                failures[exc.kind] += 1
                continue
            out.append({"sets": res, "objective": max(s.expansion for s in res),
                        "trial": t, "seed": seed, "Delta": 2 * R, "h": h, "cells": p.m,
                        "fallback_cells": p.fallback_cells,
                        "projection": None if red is None else asdict(red)})
        return out

    cands, failures = _run_trials(one_trial, cfg)
    if k == 2 and m >= 2:
        sweeps = [cheeger_sweep(g, f, source=s) for f, s in zip(_sign_split(emb), ("f2+", "f2-"))
                  if np.any(f > 0)]
        if len(sweeps) >= r:
            sweeps.sort(key=lambda s: (s.expansion, s.set_weight, s.set))
            sweeps = sweeps[:r]
            cands.append({"sets": sweeps, "objective": max(s.expansion for s in sweeps),
                          "trial": None, "seed": None, "Delta": None, "h": m, "cells": 2,
                          "route": "sign-split", "projection": None})
    if not cands:
        raise PipelineFailure("no trial produced enough nonempty groups",
                              {"failures": dict(failures), "trials": cfg.trials})
    best = _pick(cands, lambda c: c["objective"])
    sets = best["sets"]
    lam = emb.eigenvalues
    mx = best["objective"]
    lam_k = float(lam[k - 1])
    lam_2k = float(lam[min(2 * k, m) - 1])
    return PipelineReport(
        algorithm="cuts", k=k, delta=delta, r=r,
        sets=[list(s.set) for s in sets], expansions=[s.expansion for s in sets],
        eigenvalues=[float(x) for x in lam],
        ratios={"max_phi_over_sqrt_lambda_k": _ratio(mx, math.sqrt(lam_k)),
                "max_phi_over_sqrt_lambda_2k_log_k":
                    _ratio(mx, math.sqrt(lam_2k * math.log(k))) if k > 1 and 2 * k <= m else None},
        chosen=_chosen(best) | {"projection": best["projection"],
                                "fallback_cells": best.get("fallback_cells", 0)},
        diagnostics={"candidates": len(cands), "k_prime": k_prime, "eigenfunctions": m,
                     "failures": dict(sorted(failures.items()))},
        seed=cfg.seed, wall_time=time.perf_counter() - t0, attempts=_attempts(cands))
