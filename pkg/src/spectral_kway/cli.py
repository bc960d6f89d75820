"""Command-line entry point.

Reads a graph file or generates a named family, runs one algorithm and
writes a versioned JSON report. Exit codes: 0 success, 2 invalid input,
3 the computation failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field

from . import __version__
from .errors import ComputationError, ParseError, SpectralKwayError, ValidationError
from .generators import FamilySpec, generate, hypercube_auto_eps
from .graph import expansion
from .io import read_graph, read_labels
from .pipeline import (
    PipelineConfig,
    disjoint_support_functions,
    disjoint_support_functions_reduced,
    k_sparse_cuts,
    k_way_partition,
)

SCHEMA = "spectral-kway/report"
SCHEMA_VERSION = 1
FAMILY_PARAMS = ("n", "rows", "cols", "clusters", "size", "bridge", "ring", "p", "p_in", "p_out",
                 "dim", "eps", "truncate")


@dataclass
class RunConfig:
    k: int
    input: str | None = None
    family: str | None = None
    params: dict = field(default_factory=dict)
    delta: float | None = None
    algorithm: str = "partition"
    trials: int = 16
    seed: int = 0
    metric: str = "radial"
    project: bool = True
    project_dim: int | None = None
    k_prime: int | None = None
    eig_factor: float = 2.0
    tol: float = 1e-8
    threads: int = 1
    output: str | None = None
    labels: str | None = None
    emit_csv: str | None = None
    merge_duplicates: bool = False

    def __post_init__(self):
        if (self.input is None) == (self.family is None):
            raise ValidationError("give exactly one of --input and --family")
        if self.algorithm not in ("functions", "cuts", "partition"):
            raise ValidationError(f"unknown algorithm {self.algorithm!r}")

    def pipeline(self) -> PipelineConfig:
        return PipelineConfig(k=self.k, delta=self.delta, seed=self.seed, trials=self.trials,
                              metric=self.metric, project=self.project, tol=self.tol,
                              k_prime=self.k_prime, eig_factor=self.eig_factor,
                              project_dim=self.project_dim, threads=self.threads)


def _load(cfg: RunConfig):
    if cfg.input is not None:
        return read_graph(cfg.input, merge_duplicates=cfg.merge_duplicates), {"input": cfg.input}
    g, _ = generate(FamilySpec(cfg.family, cfg.params, cfg.seed))
    return g, {"family": cfg.family, "params": {k: cfg.params[k] for k in sorted(cfg.params)}}


def _set_entries(g, sets, labels):
    out = []
    for S in sets:
        m = expansion(g, S)
        e = {"vertices": [int(v) for v in S], "expansion": m.expansion,
             "cut_weight": m.cut_weight, "set_weight": m.set_weight}
        if labels is not None:
            e["labels"] = [labels[v] for v in S]
        out.append(e)
    return out


def _hypercube_check(cfg: RunConfig, eigenvalues):
    if cfg.family != "noisy-hypercube":
        return None
    dim = int(cfg.params["dim"])
    eps = cfg.params.get("eps", "auto")
    eps = hypercube_auto_eps(dim) if eps in (None, "auto") else float(eps)
    if len(eigenvalues) < cfg.k:
        return None
    lam = float(eigenvalues[cfg.k - 1])
    return {"eps": eps, "lambda_k": lam, "two_eps": 2 * eps, "holds": bool(lam <= 2 * eps + 1e-9)}


def build_report(cfg: RunConfig) -> tuple[dict, object]:
    """Run the configured algorithm; returns ``(json_ready_report, pipeline_report)``."""
    t0 = time.perf_counter()
    g, source = _load(cfg)
    labels = read_labels(cfg.labels, g.n) if cfg.labels else None
    pc = cfg.pipeline()
    if cfg.algorithm == "partition":
        rep = k_way_partition(g, cfg.k, pc)
    elif cfg.algorithm == "cuts":
        rep = k_sparse_cuts(g, cfg.k, cfg=pc)
    elif cfg.project:
        rep = disjoint_support_functions_reduced(g, cfg.k, cfg=pc)
    else:
        rep = disjoint_support_functions(g, cfg.k, cfg=pc)

    doc = {
        "schema": SCHEMA,
        "version": SCHEMA_VERSION,
        "package_version": __version__,
        "graph": {"n": g.n, "edges": int(g.u.size), "total_weight": g.total_weight} | source,
        "algorithm": cfg.algorithm,
        "k": cfg.k,
        "delta": rep.delta,
        "r": rep.r,
        "eigenvalues": rep.eigenvalues,
        "ratios": rep.ratios,
        "chosen": rep.chosen,
        "diagnostics": rep.diagnostics,
        "seed": cfg.seed,
        "trials": cfg.trials,
    }
    lam_k = rep.eigenvalues[cfg.k - 1] if len(rep.eigenvalues) >= cfg.k else None
    if rep.sets:
        doc["sets"] = _set_entries(g, rep.sets, labels)
        mx = max(s["expansion"] for s in doc["sets"])
        doc["rho_witness"] = {
            "count": len(rep.sets),
            "max_expansion": mx,
            "is_partition": cfg.algorithm == "partition",
            "lower_bound": None if lam_k is None or len(rep.sets) != cfg.k else lam_k / 2,
            "interpretation": (f"{len(rep.sets)} disjoint nonempty sets, so rho_G({len(rep.sets)}) <= {mx:.6g}"
                               + ("" if lam_k is None or len(rep.sets) != cfg.k
                                  else f"; lambda_k/2 = {lam_k / 2:.6g} <= rho_G(k)")),
        }
    else:
        doc["functions"] = [
            {"rayleigh": float(rq), "support": [int(v) for v in (f != 0).nonzero()[0]],
             "values": [float(x) for x in f]}
            for f, rq in zip(rep.functions, rep.rayleigh)]
    check = _hypercube_check(cfg, rep.eigenvalues)
    if check is not None:
        doc["hypercube_check"] = check
    doc["wall_time"] = time.perf_counter() - t0
    return doc, rep


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False, default=_json_default) + "\n"


def _json_default(x):
    if hasattr(x, "item"):
        return x.item()
    if hasattr(x, "tolist"):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _write_csv(path, attempts):
    cols = ("trial", "Delta", "h", "cells", "objective", "route")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        for a in attempts:
            w.writerow({c: a.get(c) for c in cols})


def _error(exc: Exception) -> str:
    kind = exc.kind if isinstance(exc, SpectralKwayError) else type(exc).__name__
    return json.dumps({"error": {"kind": kind, "message": str(exc)}}, sort_keys=True)


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Execute a run; the report goes to ``cfg.output`` or stdout. Returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        doc, rep = build_report(cfg)
    except ValidationError as exc:
        print(_error(exc), file=stderr)
        return 2
    except ComputationError as exc:
        print(_error(exc), file=stderr)
        return 3
    text = dumps(doc)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if cfg.emit_csv:
        _write_csv(cfg.emit_csv, rep.attempts)
    return 0


# ---------------------------------------------------------------- arguments


def read_config_file(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment; keys may use dashes or underscores."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except FileNotFoundError:
        from .errors import InputNotFound
        raise InputNotFound(f"config file not found: {path}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value.strip("\"'")
    return out


def _bool(s) -> bool:
    if isinstance(s, bool):
        return s
    v = str(s).lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"not a boolean: {s!r}")


def _eps(s):
    return "auto" if str(s) == "auto" else float(s)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spectral-kway",
                                description="Multi-way spectral partitioning of weighted graphs.")
    p.add_argument("--config", help="key = value file; command-line flags take precedence")
    src = p.add_argument_group("graph source")
    src.add_argument("--input", help="edge list or Matrix Market file")
    src.add_argument("--merge-duplicates", action="store_true", default=None,
                     help="sum the weights of repeated edges instead of rejecting them")
    src.add_argument("--family", choices=FamilySpec.FAMILIES)
    src.add_argument("--n", type=int)
    src.add_argument("--rows", type=int)
    src.add_argument("--cols", type=int)
    src.add_argument("--clusters", type=int)
    src.add_argument("--size", type=int)
    src.add_argument("--bridge", type=float)
    src.add_argument("--ring", action="store_true", default=None)
    src.add_argument("--p", type=float, help="edge probability for gnp")
    src.add_argument("--p-in", type=float)
    src.add_argument("--p-out", type=float)
    src.add_argument("--dim", type=int)
    src.add_argument("--eps", type=_eps, help="noise rate or 'auto'")
    src.add_argument("--truncate", type=float)
    run_ = p.add_argument_group("algorithm")
    run_.add_argument("--k", type=int)
    run_.add_argument("--delta", type=float)
    run_.add_argument("--algorithm", choices=("functions", "cuts", "partition"))
    run_.add_argument("--trials", type=int)
    run_.add_argument("--seed", type=int)
    run_.add_argument("--metric", choices=("radial", "induced-path"))
    run_.add_argument("--project", dest="project", action="store_true", default=None)
    run_.add_argument("--no-project", dest="project", action="store_false")
    run_.add_argument("--project-dim", type=int)
    run_.add_argument("--k-prime", type=int)
    run_.add_argument("--eig-factor", type=float)
    run_.add_argument("--tol", type=float)
    run_.add_argument("--threads", type=int)
    out = p.add_argument_group("output")
    out.add_argument("--output", help="write the JSON report here instead of stdout")
    out.add_argument("--labels", help="file with one vertex name per line")
    out.add_argument("--emit-csv", help="write per-attempt metrics as CSV")
    out.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


_CASTS = {
    "n": int, "rows": int, "cols": int, "clusters": int, "size": int, "bridge": float,
    "ring": _bool, "p": float, "p_in": float, "p_out": float, "dim": int, "eps": _eps,
    "truncate": float, "k": int, "delta": float, "trials": int, "seed": int,
    "project": _bool, "project_dim": int, "k_prime": int, "eig_factor": float, "tol": float,
    "threads": int, "merge_duplicates": _bool,
}


def config_from_args(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    merged = {}
    if args.config:
        for key, value in read_config_file(args.config).items():
            try:
                merged[key] = _CASTS.get(key, str)(value)
            except ValueError as exc:
                raise ValidationError(f"config key {key}: {exc}") from None
    for key, value in vars(args).items():
        if key != "config" and value is not None:
            merged[key] = value
    if merged.get("k") is None:
        raise ValidationError("--k is required")
    params = {key: merged.pop(key) for key in FAMILY_PARAMS if key in merged}
    known = set(RunConfig.__dataclass_fields__) - {"params"}
    unknown = sorted(set(merged) - known)
    if unknown:
        raise ValidationError(f"unknown configuration keys: {', '.join(unknown)}")
    return RunConfig(params=params, **merged)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except ValidationError as exc:
        print(_error(exc), file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
