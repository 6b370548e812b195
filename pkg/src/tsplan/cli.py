"""Command-line pipeline: plan, verify, simulate, and stats subcommands.

Every invocation ends by printing exactly one JSON status line on stdout;
files named by --out/--report receive the artifacts.  Exit codes: 0 ok,
2 input error, 3 infeasible, 4 internal consistency failure, 5 failed
verification.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

from . import runtime
from .buchi import translate
from .ltl import LtlSyntaxError, load_task, to_nnf
from .product import (AlphabetMismatch, InfeasibleStart, build_pba, compose_pts,
                      compose_pts_reachable, stats_report, theoretical_pba_size)
from .reduction import (ExhaustionInfeasible, InfeasibleInitialization,
                        ReductionConfig, reduce_and_plan)
from .synthesis import Infeasible, InternalConsistencyError, Plan, synthesize, verify
from .workspace import build_workspace, build_wts, load_workspace

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_INTERNAL = 4
EXIT_VERIFY = 5

MODES = ("full", "reduced", "joint-tuple-only")


def _status(code: int, **fields) -> int:
    doc = {"status": fields.pop("status"), "exit": code}
    doc.update(fields)
    print(json.dumps(doc, sort_keys=True))
    return code


def _threads(args) -> int:
    raw = args.threads if args.threads else os.environ.get("TSP_THREADS", "0")
    try:
        t = int(raw)
    except ValueError:
        raise ValueError("TSP_THREADS/--threads must be an integer, got %r" % raw)
    if t > 0:
        try:
            import numba
            numba.set_num_threads(max(1, min(t, numba.config.NUMBA_NUM_THREADS)))
        except ImportError:
            pass
    return t


def _load_inputs(args):
    cfg = load_workspace(args.workspace)
    if not cfg.robots:
        raise ValueError("workspace file declares no robots")
    ws = build_workspace(cfg)
    wtss = [build_wts(ws, r.name, r.init) for r in cfg.robots]
    formula = load_task(args.task)
    return cfg, ws, wtss, formula


def cmd_plan(args) -> int:
    try:
        _threads(args)
        cfg, ws, wtss, formula = _load_inputs(args)
        nba = translate(to_nnf(formula))
    except (OSError, ValueError, KeyError, LtlSyntaxError) as exc:
        return _status(EXIT_INPUT, status="input-error", error=str(exc))

    t0 = time.perf_counter()
    try:
        if args.mode == "full":
            pts = compose_pts_reachable(wtss, cfg.r_influence_robot,
                                        check_midpoints=args.check_midpoints)
            pba = build_pba(pts, nba)
            plan = synthesize(pba)
            verify(plan, formula, nba, pts.components)
            report = stats_report(pts, nba, pba)
            report["mode"] = "full"
            report["synthesis"] = plan.stats
        else:
            rcfg = ReductionConfig(
                r_influence_robot=cfg.r_influence_robot,
                seed=args.seed,
                mode="full-product" if args.mode == "reduced" else "joint-tuple-only",
                check_midpoints=args.check_midpoints)
            plan, red_report = reduce_and_plan(wtss, formula, nba, rcfg)
            report = red_report.to_dict()
            report["mode"] = args.mode
            report["synthesis"] = plan.stats
    except AlphabetMismatch as exc:
        return _status(EXIT_INPUT, status="input-error", error=str(exc))
    except (Infeasible, InfeasibleStart, InfeasibleInitialization,
            ExhaustionInfeasible) as exc:
        return _status(EXIT_INFEASIBLE, status="infeasible", error=str(exc))
    except InternalConsistencyError as exc:
        return _status(EXIT_INTERNAL, status="internal-error", error=str(exc))
    elapsed_ms = int((time.perf_counter() - t0) * 1000)

    if args.out:
        plan.save(args.out)
    if args.report:
        report["runtime_ms"] = elapsed_ms
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return _status(
        EXIT_OK, status="ok", mode=args.mode, total_cost=plan.total_cost,
        prefix_cost=plan.prefix_cost, suffix_cost=plan.suffix_cost,
        reduction_iterations=plan.stats.get("reduction_iterations"),
        plan=args.out or None, report=args.report or None, runtime_ms=elapsed_ms)


def _check_plan_against(plan: Plan, cfg, ws, wtss, formula, nba):
    """Structural, proximity, and language checks; returns None or a reason."""
    if tuple(plan.robots) != tuple(w.robot for w in wtss):
        return "plan robots %s do not match workspace robots" % (list(plan.robots),)
    if tuple(plan.prefix[0]) != tuple(w.init for w in wtss):
        return "plan does not start at the initial joint state"
    by_name = {w.robot: w for w in wtss}
    for seq in (plan.prefix, plan.suffix):
        for a, b in zip(seq, seq[1:]):
            for name, x, y in zip(plan.robots, a, b):
                if not by_name[name].has_transition(x, y):
                    return "step %s -> %s is not a joint transition" % (list(a), list(b))
    if plan.prefix[-1] != plan.suffix[0] or plan.suffix[0] != plan.suffix[-1]:
        return "suffix does not loop on the prefix's final state"
    tr = runtime.execute(plan, ws, suffix_repetitions=1)
    if len(plan.robots) >= 2:
        worst = min(d for d in tr.min_distances)
        if worst <= cfg.r_influence_robot:
            return "minimum pairwise distance %.6f <= influence radius %.6f" % (
                worst, cfg.r_influence_robot)
    try:
        ok = verify(plan, formula, nba, wtss)
    except InternalConsistencyError as exc:
        return "internal consistency failure: %s" % exc
    if not ok:
        return "plan trace does not satisfy the task formula"
    return None


def cmd_verify(args) -> int:
    try:
        cfg, ws, wtss, formula = _load_inputs(args)
        nba = translate(to_nnf(formula))
        plan = Plan.load(args.plan)
    except (OSError, ValueError, KeyError, LtlSyntaxError) as exc:
        return _status(EXIT_INPUT, status="input-error", error=str(exc))
    reason = _check_plan_against(plan, cfg, ws, wtss, formula, nba)
    if reason is None:
        return _status(EXIT_OK, status="ok", verified=True)
    return _status(EXIT_VERIFY, status="verification-failed", verified=False,
                   error=reason)


def cmd_simulate(args) -> int:
    try:
        cfg, ws, wtss, formula = _load_inputs(args)
        plan = Plan.load(args.plan)
        tr = runtime.execute(plan, ws, suffix_repetitions=args.cycles)
    except (OSError, ValueError, KeyError, LtlSyntaxError) as exc:
        return _status(EXIT_INPUT, status="input-error", error=str(exc))
    fmt = args.format or ("json" if str(args.out or "").endswith(".json") else "csv")
    if args.out:
        runtime.export(tr, args.out, fmt)
    worst = None
    if len(plan.robots) >= 2 and tr.min_distances:
        worst = min(tr.min_distances)
    return _status(EXIT_OK, status="ok", steps=len(tr), cycles=args.cycles,
                   final_cost=tr.cumulative_costs[-1] if len(tr) else 0.0,
                   min_pairwise_distance=worst, out=args.out or None)


def cmd_stats(args) -> int:
    try:
        cfg, ws, wtss, formula = _load_inputs(args)
        if args.nba_size is not None:
            nba_states = args.nba_size
            nba = None
        else:
            nba = translate(to_nnf(formula))
            nba_states = nba.n
        if args.components:
            comp_sizes = [int(x) for x in args.components.split(",")]
        else:
            comp_sizes = [len(w.states) for w in wtss]
    except (OSError, ValueError, KeyError, LtlSyntaxError) as exc:
        return _status(EXIT_INPUT, status="input-error", error=str(exc))

    doc = {
        "component_sizes": comp_sizes,
        "nba_states": nba_states,
        "pba_states_theoretical": theoretical_pba_size(comp_sizes, nba_states),
    }
    if args.materialize:
        if nba is None:
            nba = translate(to_nnf(formula))
        try:
            pts = compose_pts(wtss, cfg.r_influence_robot)
            pba = build_pba(pts, nba)
        except (InfeasibleStart, AlphabetMismatch) as exc:
            return _status(EXIT_INPUT, status="input-error", error=str(exc))
        doc.update(stats_report(pts, nba, pba))
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return _status(EXIT_OK, status="ok", **doc)


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tsplan",
        description="Prefix-suffix LTL motion planning on coil-array grids")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, task=True):
        p.add_argument("--workspace", required=True, help="workspace JSON file")
        if task:
            p.add_argument("--task", required=True, help="LTL task file")

    p = sub.add_parser("plan", help="synthesize a prefix-suffix plan")
    common(p)
    p.add_argument("--mode", choices=MODES, default="reduced")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="plan JSON output path")
    p.add_argument("--report", help="statistics report output path")
    p.add_argument("--check-midpoints", action="store_true")
    p.add_argument("--threads", type=int, default=0)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("verify", help="check a plan file against a task")
    common(p)
    p.add_argument("--plan", required=True, help="plan JSON file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="unroll a plan into a trajectory")
    common(p)
    p.add_argument("--plan", required=True, help="plan JSON file")
    p.add_argument("--cycles", type=int, default=1, help="suffix repetitions")
    p.add_argument("--out", help="trajectory output path")
    p.add_argument("--format", choices=("csv", "json"))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stats", help="report product state-space sizes")
    common(p)
    p.add_argument("--nba-size", type=int, help="override the NBA state count")
    p.add_argument("--components", help="override component sizes, comma-separated")
    p.add_argument("--materialize", action="store_true",
                   help="also build the product and report actual sizes")
    p.add_argument("--report", help="write the report JSON to this path")
    p.set_defaults(func=cmd_stats)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
