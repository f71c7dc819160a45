"""Command line entry point: ``symann <subcommand>``.

Exit codes: 0 success, 1 a check or assertion failed, 2 usage or configuration error.
Run-config flags mirror the RunConfig keys; values in ``--config`` override flags.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from ..netgen import net_size_report
from .config import ConfigError, RunConfig
from .io import (
    FormatError,
    dump_json,
    index_metadata,
    read_index_metadata,
    read_points,
    resolve_norm,
    write_points,
)
from .lowerbound import format_table, lowerbound_demo
from .planted import gen_planted
from .run import build_index, run_bench
from .verify import SUITES, UnknownSuite, verify

_FLAGGED = [f for f in dataclasses.fields(RunConfig) if f.name not in ("assertions",)]


def _flag_type(f):
    default = f.default
    if f.name == "norm":
        return str
    if isinstance(default, bool):
        return int
    if isinstance(default, int):
        return int
    if isinstance(default, float) or f.name in ("tau", "mu", "accept_factor"):
        return float
    if f.name == "reps":
        return int
    return str


def _add_config_flags(p):
    p.add_argument("--config", help="JSON run config; its keys override flags")
    for f in _FLAGGED:
        p.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, type=_flag_type(f), default=None)
    p.add_argument("--assert-min-recall", type=float, default=None)


def _config_from(args) -> RunConfig:
    data = {f.name: getattr(args, f.name) for f in _FLAGGED if getattr(args, f.name, None) is not None}
    if getattr(args, "assert_min_recall", None) is not None:
        data["assertions"] = {"min_recall": args.assert_min_recall}
    if args.config:
        with open(args.config) as fh:
            text = fh.read()
        data.update(json.loads(text) if text.strip() else {})
    return RunConfig.from_dict(data)


def cmd_gen(args):
    norm = resolve_norm(args.norm, args.d)
    inst = gen_planted(norm, args.n, args.d, args.r, args.sep, args.seed, args.queries, args.spread)
    write_points(args.out, inst.points)
    write_points(args.queries_out, inst.queries)
    if args.meta_out:
        dump_json({"norm": norm.to_dict(), "r": inst.r, "sep": inst.sep, "planted": inst.planted.tolist(),
                   "seed": args.seed}, args.meta_out)
    print(f"wrote {len(inst.points)} points and {len(inst.queries)} queries")
    return 0


def cmd_build(args):
    cfg = _config_from(args)
    points = read_points(args.points)
    if points.shape[1] != cfg.d:
        raise ConfigError(f"points have d = {points.shape[1]}, config says d = {cfg.d}")
    norm = resolve_norm(cfg.norm, cfg.d)
    idx, info = build_index(cfg, points, norm)
    spec = getattr(idx, "spec", None)
    meta = index_metadata({**cfg.to_dict(), "norm": norm.to_dict()}, spec.to_json() if spec is not None else None)
    meta["build"] = info
    meta["points"] = {"n": int(points.shape[0]), "d": int(points.shape[1])}
    dump_json(meta, args.out)
    print(f"index metadata written to {args.out}")
    return 0


def cmd_query(args):
    meta = read_index_metadata(args.index)
    cfg = RunConfig.from_dict(meta["config"])
    points = read_points(args.points)
    queries = read_points(args.queries)
    norm = resolve_norm(cfg.norm, cfg.d)
    # indexes are rebuilt from (config, seeds, points); scalings are never stored
    idx, _ = build_index(cfg, points, norm)
    out = ["query,candidate,distance,evals,nodes"]
    for i, q in enumerate(queries):
        rep = idx.query(q)
        dist = "" if rep.distance is None else repr(float(rep.distance))
        cand = "" if rep.candidate is None else str(rep.candidate)
        out.append(f"{i},{cand},{dist},{rep.evals},{rep.nodes}")
    text = "\n".join(out) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_bench(args):
    cfg = _config_from(args)
    report = run_bench(cfg)
    agg = report.summary["aggregates"]
    print(f"recall {agg['recall']['mean']}  ratio {agg['ratio']['mean']}  evals {agg['evals']['mean']}")
    for name, ok in report.summary["assertions"].items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return report.exit_code


def cmd_verify(args):
    names = list(args.suites or [])
    result = verify(names)
    text = dump_json(result, args.out)
    if not args.out:
        sys.stdout.write(text)
    for suite in result["suites"]:
        print(f"{'PASS' if suite['passed'] else 'FAIL'} {suite['suite']}", file=sys.stderr)
    return 0 if result["passed"] else 1


def cmd_net_report(args):
    rows = net_size_report(args.norm, args.dims, args.beta, args.dual_tol, args.node_budget, args.with_rhat)
    print("d      rhat        t           nodes       error")
    for r in rows:
        print(f"{r['d']:<6} {str(r['rhat']):<11} {str(r['t']):<11} {str(r['nodes']):<11} {r['error'] or ''}")
    if args.out:
        dump_json(rows, args.out)
    return 1 if any(r["error"] for r in rows) else 0


def cmd_lowerbound(args):
    rows = []
    for norm in args.norms:
        rows += lowerbound_demo(args.dims, norm, args.beta, args.alpha)
    sys.stdout.write(format_table(rows))
    if args.out:
        dump_json(rows, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symann", description="ANN search for symmetric norms.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a planted instance")
    p.add_argument("--norm", default="l2")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--d", type=int, default=16)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--sep", type=float, default=4.0)
    p.add_argument("--queries", type=int, default=10)
    p.add_argument("--spread", type=float, default=4.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--queries-out", required=True)
    p.add_argument("--meta-out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("build", help="build an index and write its metadata")
    _add_config_flags(p)
    p.add_argument("--points", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="answer queries with an index rebuilt from its metadata")
    p.add_argument("--index", required=True)
    p.add_argument("--points", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("bench", help="planted-instance benchmark with CSV/JSON reports")
    _add_config_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help=f"run invariant suites: {', '.join(SUITES)}")
    p.add_argument("suites", nargs="*")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("net-report", help="net sizes per dimension")
    p.add_argument("--norm", default="l2")
    p.add_argument("--dims", type=int, nargs="+", default=[8, 12])
    p.add_argument("--beta", type=float, default=1.5)
    p.add_argument("--dual-tol", type=float, default=0.02)
    p.add_argument("--node-budget", type=int, default=50_000_000)
    p.add_argument("--with-rhat", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_net_report)

    p = sub.add_parser("lowerbound-demo", help="single-G distortion proxy across dimensions")
    p.add_argument("--dims", type=int, nargs="+", default=[64, 256, 1024, 4096])
    p.add_argument("--norms", nargs="+", default=["minimal_sqrt", "l2"])
    p.add_argument("--beta", type=float, default=1.5)
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_lowerbound)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UnknownSuite as exc:
        print(f"error: unknown suite {exc.args[0]!r}; known: {', '.join(SUITES)}", file=sys.stderr)
        return 2
    except (ConfigError, FormatError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
