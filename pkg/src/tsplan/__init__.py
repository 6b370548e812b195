"""Prefix-suffix LTL motion planning for microrobot teams on coil-array grids."""

from .ltl import (
    AtomId, Formula, LassoWord, atoms, eval_lasso, fmt, load_task, parse, to_nnf,
)
from .buchi import Nba, accepts_lasso, build_generalized, is_empty, translate
from .workspace import (
    RobotSpec, Workspace, WorkspaceConfig, Wts, build_workspace, build_wts,
    load_workspace, save_workspace, waypoint_count, waypoint_distance,
)
from .product import (
    AlphabetMismatch, InfeasibleStart, Pba, Pts, build_pba, compose_pts,
    compose_pts_reachable, stats_report, theoretical_pba_size, update_pba,
)
from .synthesis import (
    Infeasible, InternalConsistencyError, Plan, plan_cost, plan_word,
    synthesize, verify,
)
from .reduction import (
    ExhaustionInfeasible, InfeasibleInitialization, PropSets, ReductionConfig,
    ReductionReport, ReductionState, build_initial_wts, compute_seed_set,
    extract_prop_sets, n_hop_candidates, reduce_and_plan,
)
from .runtime import Trajectory, distance_series, execute, export

__all__ = [
    "AlphabetMismatch", "AtomId", "ExhaustionInfeasible", "Formula",
    "Infeasible", "InfeasibleInitialization", "InfeasibleStart",
    "InternalConsistencyError", "LassoWord", "Nba", "Pba", "Plan", "PropSets",
    "Pts", "ReductionConfig", "ReductionReport", "ReductionState", "RobotSpec",
    "Trajectory", "Workspace", "WorkspaceConfig", "Wts", "accepts_lasso",
    "atoms", "build_generalized", "build_initial_wts", "build_pba",
    "build_workspace", "build_wts", "compose_pts", "compose_pts_reachable",
    "compute_seed_set", "distance_series", "eval_lasso", "execute", "export",
    "extract_prop_sets", "fmt", "is_empty", "load_task", "load_workspace",
    "n_hop_candidates", "parse", "plan_cost", "plan_word", "reduce_and_plan",
    "save_workspace", "stats_report", "synthesize", "theoretical_pba_size",
    "to_nnf", "translate", "update_pba", "verify", "waypoint_count",
    "waypoint_distance",
]

__version__ = "0.1.0"


def case_path(name: str):
    """Path of a bundled case-study file, e.g. case_path('case2_workspace.json')."""
    from importlib.resources import files
    return files("tsplan") / "cases" / name
