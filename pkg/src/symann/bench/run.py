"""Bench runs: planted instance, index build, per-query rows and bootstrap aggregates."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from ..annindex import (
    TreeOptions,
    build_general_pipeline,
    build_orlicz_pipeline,
    build_symnorm_index,
    exact_scan,
    norm_distance,
)
from ..annindex.pipelines import embedded_distance
from ..gfunc import Power
from ..leveling import LevelParams
from ..netgen import build_embedding
from ..randmap import RandMapParams, make_rng, topk_G
from ..vecnorm import Lp, Orlicz, TopK
from .config import ConfigError, RunConfig
from .io import dump_json, resolve_norm
from .planted import gen_planted

REPORT_SCHEMA = "symann.bench/1"
COLUMNS = ("query", "planted", "candidate", "distance", "exact_distance", "recall", "ratio", "evals", "nodes", "reps")


@dataclass
class BenchReport:
    rows: list
    summary: dict
    exit_code: int

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for row in self.rows:
            w.writerow([_fmt(row[c]) for c in COLUMNS])
        return buf.getvalue()

    def json_text(self) -> str:
        return dump_json(self.summary)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


class ExactIndex:
    def __init__(self, points, norm, r):
        self.points = points
        self.oracle = norm_distance(norm)
        self.threshold = r * (1 + 1e-9)

    def query(self, q):
        return exact_scan(self.points, self.oracle, q)


def orlicz_G(norm):
    """The G whose Luxemburg gauge is ``norm`` (top-k uses its step-linear scaling)."""
    if isinstance(norm, Orlicz):
        return norm.G
    if isinstance(norm, TopK):
        return topk_G(norm.k, norm.dim)
    if isinstance(norm, Lp) and math.isfinite(norm.p):
        return Power(norm.p)
    raise ConfigError(f"index 'orlicz' needs an Orlicz, top-k or finite l_p norm, got {norm!r}")


def build_index(cfg: RunConfig, points, norm):
    """Returns (index, info) where info holds build facts for the report."""
    tree = TreeOptions(eps=cfg.tree_eps, leaf_cap=cfg.leaf_cap, c_cl=cfg.c_cl)
    info: dict = {}
    if cfg.index == "exact":
        return ExactIndex(points, norm, cfg.r), info
    params = RandMapParams(cfg.mu_value, cfg.D, cfg.alpha, cfg.seed)
    info.update(mu=params.mu, reps=cfg.reps_value)
    if cfg.index == "orlicz":
        idx = build_orlicz_pipeline(points, norm, orlicz_G(norm), params, cfg.r, cfg.reps_value, tree,
                                    cfg.accept_factor)
    elif cfg.index == "general":
        idx = build_general_pipeline(points, norm, params, cfg.beta, cfg.r, cfg.reps_value, tree)
    else:
        p = LevelParams(cfg.beta, cfg.d, cfg.tau)
        spec = build_embedding(norm, p, cfg.dual_tol)
        mode = cfg.index.split("-", 1)[1]
        accept = cfg.sep if cfg.accept_factor is None else cfg.accept_factor
        idx = build_symnorm_index(points, norm, p, mode, cfg.r, accept_factor=accept, spec=spec, params=params,
                                  reps=cfg.reps_value, tree=tree, seed=cfg.seed)
        info.update(t=spec.t, eval_rows=len(spec.eval_rows), r_tree=idx.r_tree,
                    distortion=measured_distortion(spec, norm, points, cfg.seed))
        if mode == "direct":
            info.pop("reps")
    trees = getattr(idx, "trees", [])
    info["tree_stats"] = [
        {"rings": t.stats.rings, "leaves": t.stats.leaves, "fallback_leaves": t.stats.fallback_leaves,
         "cluster_leaves": t.stats.cluster_leaves, "depth": t.stats.depth, "stored": t.stats.stored}
        for t in trees
    ]
    return idx, info


def measured_distortion(spec, norm, points, seed, pairs: int = 2000) -> dict:
    """Range of D-hat(x - y) / ||x - y|| over sampled point pairs."""
    rng = make_rng(seed, 3)
    P = np.asarray(points, dtype=float)
    i = rng.integers(0, len(P), size=pairs)
    j = rng.integers(0, len(P), size=pairs)
    keep = i != j
    diff = P[i[keep]] - P[j[keep]]
    est = embedded_distance(spec)._fn(diff)
    ratio = est / norm.norm(diff)
    if ratio.size == 0:
        return {"min": None, "max": None, "pairs": 0}
    return {"min": float(ratio.min()), "max": float(ratio.max()), "pairs": int(ratio.size)}


def bootstrap_ci(values, reps: int, rng) -> list | None:
    v = np.asarray(values, dtype=float)
    if v.size == 0 or reps == 0:
        return None
    idx = rng.integers(0, v.size, size=(reps, v.size))
    means = v[idx].mean(axis=1)
    return [float(np.quantile(means, 0.025)), float(np.quantile(means, 0.975))]


def _aggregate(values, reps, rng) -> dict:
    v = np.asarray(values, dtype=float)
    return {
        "mean": float(v.mean()) if v.size else None,
        "ci95": bootstrap_ci(v, reps, rng),
        "count": int(v.size),
    }


def run_bench(cfg: RunConfig) -> BenchReport:
    norm = resolve_norm(cfg.norm, cfg.d)
    if norm.dim != cfg.d:
        raise ConfigError(f"norm dimension {norm.dim} differs from d = {cfg.d}")
    rows = []
    info: dict = {}
    threshold = None
    if cfg.queries > 0:
        inst = gen_planted(norm, cfg.n, cfg.d, cfg.r, cfg.sep, cfg.data_seed, cfg.queries, cfg.spread)
        idx, info = build_index(cfg, inst.points, norm)
        threshold = float(idx.threshold)
        truth = norm_distance(norm)
        for qi, (q, pid) in enumerate(zip(inst.queries, inst.planted)):
            rep = idx.query(q)
            exact = float(truth(q, inst.points[pid]))
            hit = rep.candidate is not None and rep.distance <= threshold
            rows.append({
                "query": qi,
                "planted": int(pid),
                "candidate": rep.candidate,
                "distance": None if rep.distance is None else float(rep.distance),
                "exact_distance": exact,
                "recall": int(hit),
                "ratio": None if rep.distance is None else float(rep.distance) / exact,
                "evals": int(rep.evals),
                "nodes": int(rep.nodes),
                "reps": int(rep.reps),
            })

    rng = make_rng(cfg.seed, 99)
    ratios = [r["ratio"] for r in rows if r["ratio"] is not None]
    violations = sum(1 for r in rows if r["distance"] is not None and threshold is not None
                     and r["distance"] > threshold)
    below_one = sum(1 for x in ratios if x < 1 - 1e-9)
    agg = {
        "recall": _aggregate([r["recall"] for r in rows], cfg.bootstrap, rng),
        "ratio": _aggregate(ratios, cfg.bootstrap, rng),
        "evals": _aggregate([r["evals"] for r in rows], cfg.bootstrap, rng),
        "nodes": _aggregate([r["nodes"] for r in rows], cfg.bootstrap, rng),
        "violations": violations,
        "ratio_below_one": below_one,
    }

    checks = {"ratio_sanity": below_one == 0}
    a = cfg.assertions
    if "min_recall" in a:
        checks["min_recall"] = agg["recall"]["mean"] is None or agg["recall"]["mean"] >= a["min_recall"]
    if "max_mean_ratio" in a:
        checks["max_mean_ratio"] = agg["ratio"]["mean"] is None or agg["ratio"]["mean"] <= a["max_mean_ratio"]
    checks["max_violations"] = violations <= a.get("max_violations", 0)
    summary = {
        "schema": REPORT_SCHEMA,
        "config": cfg.to_dict(),
        "norm": norm.to_dict(),
        "threshold": threshold,
        "index": info,
        "aggregates": agg,
        "assertions": checks,
        "passed": all(checks.values()),
    }
    report = BenchReport(rows, summary, 0 if summary["passed"] else 1)
    if cfg.out_csv:
        with open(cfg.out_csv, "w") as fh:
            fh.write(report.csv_text())
    if cfg.out_json:
        with open(cfg.out_json, "w") as fh:
            fh.write(report.json_text())
    return report
