"""Benchmark suite, empirical-constant baselines, and the small-graph corpus.

The suite runs both set-producing algorithms on standard families and
records the ratios

    max_i phi(S_i) / sqrt(lambda_k)              (k-way partition)
    max_i phi(S_i) / sqrt(lambda_2k * log k)     (sparse cuts, k >= 2)

Committed baselines live in ``data/baselines.json``; a run regresses when a
ratio exceeds its baseline by more than ``REGRESSION_SLACK``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import generators as gen
from .pipeline import PipelineConfig, k_sparse_cuts, k_way_partition

REGRESSION_SLACK = 0.25
BASELINE_FILE = "baselines.json"


@dataclass(frozen=True)
class BenchmarkCase:
    name: str
    family: str
    params: tuple
    k: int
    seed: int = 0

    def build(self):
        return gen.generate(gen.FamilySpec(self.family, dict(self.params), self.seed))


SUITE = (
    BenchmarkCase("path-16-k4", "path", (("n", 16),), 4),
    BenchmarkCase("path-64-k8", "path", (("n", 64),), 8),
    BenchmarkCase("cycle-32-k4", "cycle", (("n", 32),), 4),
    BenchmarkCase("cycle-60-k6", "cycle", (("n", 60),), 6),
    BenchmarkCase("grid-8x8-k4", "grid", (("rows", 8), ("cols", 8)), 4),
    BenchmarkCase("grid-12x12-k9", "grid", (("rows", 12), ("cols", 12)), 9),
    BenchmarkCase("cliques-3x10-k3", "clique-union", (("clusters", 3), ("size", 10), ("bridge", 0.01)), 3),
    BenchmarkCase("cliques-ring-8x6-k8", "clique-union",
                  (("clusters", 8), ("size", 6), ("bridge", 0.1), ("ring", True)), 8),
    BenchmarkCase("cliques-ring-16x8-k16", "clique-union",
                  (("clusters", 16), ("size", 8), ("bridge", 0.05), ("ring", True)), 16),
    BenchmarkCase("planted-4x32-k4", "planted-partition",
                  (("clusters", 4), ("size", 32), ("p_in", 0.5), ("p_out", 0.01)), 4, seed=0),
    BenchmarkCase("hypercube-6-k6", "noisy-hypercube", (("dim", 6), ("eps", "auto")), 6),
    BenchmarkCase("hypercube-8-k8", "noisy-hypercube", (("dim", 8), ("eps", "auto")), 8),
)


def run_case(case: BenchmarkCase, trials: int = 16, seed: int = 0) -> dict:
    g, _ = case.build()
    cfg = PipelineConfig(k=case.k, trials=trials, seed=seed)
    part = k_way_partition(g, case.k, cfg)
    cuts = k_sparse_cuts(g, case.k, cfg=cfg)
    return {
        "partition": part.ratios["max_phi_over_sqrt_lambda_k"],
        "cuts": cuts.ratios["max_phi_over_sqrt_lambda_2k_log_k"],
        "partition_report": part,
        "cuts_report": cuts,
        "graph": g,
    }


def run_suite(cases=SUITE, trials: int = 16, seed: int = 0) -> dict:
    return {c.name: run_case(c, trials, seed) for c in cases}


def ratios_only(results: dict) -> dict:
    return {name: {"partition": r["partition"], "cuts": r["cuts"]} for name, r in results.items()}


def load_baselines(path=None) -> dict:
    if path is None:
        text = resources.files("spectral_kway").joinpath("data", BASELINE_FILE).read_text()
    else:
        text = Path(path).read_text()
    return json.loads(text)


def write_baselines(ratios: dict, path) -> None:
    Path(path).write_text(json.dumps(ratios, indent=2, sort_keys=True) + "\n")


def regressions(ratios: dict, baselines: dict, slack: float = REGRESSION_SLACK) -> list:
    """(case, metric, value, baseline) for every ratio above ``(1 + slack) * baseline``."""
    bad = []
    for name, metrics in sorted(ratios.items()):
        base = baselines.get(name, {})
        for metric, value in sorted(metrics.items()):
            b = base.get(metric)
            if value is None or b is None:
                continue
            if value > (1.0 + slack) * b + 1e-12:
                bad.append((name, metric, value, b))
    return bad


# ---------------------------------------------------------------- small corpus


def small_graph_corpus(max_n: int = 10, random_per_size: int = 6) -> list:
    """Named graphs on at most ``max_n`` vertices: standard families, weighted
    clique chains, a noisy cube, and seeded random graphs."""
    out = []
    for n in range(3, max_n + 1):
        out.append((f"path-{n}", gen.path(n)))
        out.append((f"cycle-{n}", gen.cycle(n)))
    for n in range(3, min(max_n, 8) + 1):
        out.append((f"complete-{n}", gen.complete(n)))
    for a, b in ((2, 2), (2, 3), (2, 4), (3, 3), (2, 5)):
        if a * b <= max_n:
            out.append((f"grid-{a}x{b}", gen.grid(a, b)))
    for c, s, bw in ((2, 3, 0.2), (2, 4, 0.05), (2, 5, 1.0), (3, 3, 0.1)):
        if c * s <= max_n:
            out.append((f"cliques-{c}x{s}-{bw}", gen.clique_union(c, s, bw)))
    if max_n >= 8:
        out.append(("hypercube-3-0.3", gen.noisy_hypercube(3, 0.3)))
        out.append(("hypercube-3-0.7", gen.noisy_hypercube(3, 0.7)))
    for n in range(5, max_n + 1):
        for s in range(random_per_size):
            p = 0.25 + 0.1 * (s % 4)
            out.append((f"gnp-{n}-{p:.2f}-s{s}", gen.gnp(n, p, seed=1000 * n + s)))
    return out


def log_k(k: int) -> float:
    return math.log(k)
