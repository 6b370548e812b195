"""Baseline optimal prefix-suffix synthesis over the product automaton.

One multi-source shortest-path pass from the initial states prices every
reachable accepting state's prefix; a best-first sweep of those states
computes the cheapest return cycle of each, pruned by the best total found
so far.  The plan minimizing prefix + suffix cost is returned, ties broken
by (total cost, prefix length, accepting-state id), fully deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import _graph
from .buchi import Nba, accepts_lasso
from .ltl import Formula, LassoWord, eval_lasso
from .product import Pba


class Infeasible(RuntimeError):
    """No reachable accepting state owns a return cycle."""


class InternalConsistencyError(RuntimeError):
    """The automaton check and the semantic evaluator disagreed on a plan."""


@dataclass
class Plan:
    """Prefix-suffix joint plan: suffix starts and ends at the accepting state."""

    robots: tuple
    prefix: list                 # joint waypoint tuples, prefix[-1] == suffix[0]
    suffix: list                 # first == last, >= 1 transition
    prefix_nba: list             # NBA state before each prefix step is consumed
    suffix_nba: list
    prefix_units: int
    suffix_units: int
    unit: float                  # pitch * sqrt(2)/2 in distance units
    accepting_state: int         # canonical PBA id the suffix loops through
    stats: dict = field(default_factory=dict)

    @property
    def prefix_cost(self) -> float:
        return self.prefix_units * self.unit

    @property
    def suffix_cost(self) -> float:
        return self.suffix_units * self.unit

    @property
    def total_cost(self) -> float:
        return (self.prefix_units + self.suffix_units) * self.unit

    def to_dict(self) -> dict:
        return {
            "robots": list(self.robots),
            "prefix": [list(q) for q in self.prefix],
            "suffix": [list(q) for q in self.suffix],
            "prefix_nba": list(self.prefix_nba),
            "suffix_nba": list(self.suffix_nba),
            "prefix_cost": self.prefix_cost,
            "suffix_cost": self.suffix_cost,
            "total_cost": self.total_cost,
            "cost_unit": self.unit,
            "accepting_state": self.accepting_state,
            "stats": dict(sorted(self.stats.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @staticmethod
    def from_dict(doc: dict) -> "Plan":
        unit = float(doc["cost_unit"])
        plan = Plan(
            robots=tuple(doc["robots"]),
            prefix=[tuple(q) for q in doc["prefix"]],
            suffix=[tuple(q) for q in doc["suffix"]],
            prefix_nba=list(doc.get("prefix_nba", [])),
            suffix_nba=list(doc.get("suffix_nba", [])),
            prefix_units=int(round(doc["prefix_cost"] / unit)) if unit else 0,
            suffix_units=int(round(doc["suffix_cost"] / unit)) if unit else 0,
            unit=unit,
            accepting_state=int(doc["accepting_state"]),
            stats=dict(doc.get("stats", {})),
        )
        return plan

    @staticmethod
    def load(path) -> "Plan":
        with open(path, "r", encoding="utf-8") as fh:
            return Plan.from_dict(json.load(fh))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())


def synthesize(pba: Pba) -> Plan:
    """Minimum-cost prefix-suffix plan over the product automaton."""
    pts, nba = pba.pts, pba.nba
    n = pba.n_states
    initial = pba.initial_ids()
    if n == 0 or not initial:
        raise Infeasible("empty product automaton")
    indptr, indices, weights = pba.csr()

    sources = np.asarray(sorted(initial), dtype=np.int64)
    dist, pred = _graph.dijkstra(indptr, indices, weights, sources, n)

    acc = pba.accepting_ids()
    acc = acc[dist[acc] < _graph.INF]
    if acc.shape[0] == 0:
        raise Infeasible("no accepting state is reachable from the initial states")

    # Return cycles exist only inside nontrivial SCCs or through self-loops.
    graph = csr_matrix((np.ones(indices.shape[0], dtype=np.int8), indices, indptr),
                       shape=(n, n))
    ncomp, scc = connected_components(graph, directed=True, connection="strong")
    comp_sizes = np.bincount(scc, minlength=ncomp)
    has_self = np.zeros(n, dtype=bool)
    esrc = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    has_self[esrc[esrc == indices]] = True
    cyclable = acc[(comp_sizes[scc[acc]] > 1) | has_self[acc]]
    skipped_unreachable = int(pba.accepting_ids().shape[0] - acc.shape[0])
    if cyclable.shape[0] == 0:
        raise Infeasible("no reachable accepting state lies on a cycle")

    order = np.lexsort((cyclable, dist[cyclable]))
    anchors = cyclable[order].astype(np.int64)
    pre_keys = dist[anchors]
    rptr, rind, rw = _graph.build_reverse(indptr, indices, weights, n)
    scc64 = scc.astype(np.int64)
    cyc, close_from, inc_idx, snap_nodes, snap_preds, runs = _graph.cycle_search(
        indptr, indices, weights, rptr, rind, rw,
        anchors, pre_keys, scc64, _graph.INF >> _graph.HOP_BITS)
    if inc_idx < 0:
        raise Infeasible("no reachable accepting state admits a return cycle")

    f = int(anchors[inc_idx])
    u_close = int(close_from[inc_idx])
    pre_key = int(pre_keys[inc_idx])
    cyc_key = int(cyc[inc_idx])

    prefix_ids = _walk_pred(pred, f)
    snap = {int(nd): int(pr) for nd, pr in zip(snap_nodes, snap_preds)}
    cycle_ids = [f]
    if u_close != f:
        back = [u_close]
        while back[-1] != f:
            back.append(snap[back[-1]])
        cycle_ids += back[::-1][1:]
    cycle_ids.append(f)

    nb = nba.n
    project = lambda ids: [pts.states[s // nb] for s in ids]
    nba_of = lambda ids: [s % nb for s in ids]

    plan = Plan(
        robots=tuple(c.robot for c in pts.components),
        prefix=project(prefix_ids),
        suffix=project(cycle_ids),
        prefix_nba=nba_of(prefix_ids),
        suffix_nba=nba_of(cycle_ids),
        prefix_units=_graph.key_units(pre_key),
        suffix_units=_graph.key_units(cyc_key),
        unit=pts.workspace.move_length,
        accepting_state=_canonical_id(pba, f),
        stats={
            "pba_states": int(n),
            "pba_transitions": int(indices.shape[0]),
            "accepting_states": int(pba.accepting_ids().shape[0]),
            "accepting_unreachable": skipped_unreachable,
            "accepting_searched": int(runs),
            "dijkstra_runs": int(len(initial) + runs),
            "dijkstra_budget": int(len(initial) + pba.accepting_ids().shape[0]),
            "nodes_expanded": int(np.count_nonzero(dist < _graph.INF)),
        },
    )
    _validate_plan_structure(plan, pba)
    return plan


def _canonical_id(pba: Pba, sid: int) -> int:
    order = sorted(range(len(pba.pts.states)), key=lambda i: pba.pts.states[i])
    rank = {old: new for new, old in enumerate(order)}
    p, b = divmod(sid, pba.nba.n)
    return rank[p] * pba.nba.n + b


def _walk_pred(pred, target):
    ids = [int(target)]
    while pred[ids[-1]] >= 0:
        ids.append(int(pred[ids[-1]]))
    return ids[::-1]


def _validate_plan_structure(plan: Plan, pba: Pba):
    pts = pba.pts
    if tuple(plan.prefix[0]) != pts.initial:
        raise InternalConsistencyError("plan does not start at the initial joint state")
    if plan.prefix[-1] != plan.suffix[0] or plan.suffix[0] != plan.suffix[-1]:
        raise InternalConsistencyError("suffix does not loop on the prefix's final state")
    for seq in (plan.prefix, plan.suffix):
        for a, b in zip(seq, seq[1:]):
            for comp, x, y in zip(pts.components, a, b):
                if not comp.has_transition(x, y):
                    raise InternalConsistencyError(
                        "step %r -> %r is not a joint transition" % (a, b))


def plan_cost(plan: Plan, pts=None):
    """Recompute (prefix, suffix, total) costs from transition weights.

    The recomputed values must equal the stored ones exactly; a mismatch
    means the plan steps and the stored costs drifted apart.
    """
    def units(seq):
        total = 0
        for a, b in zip(seq, seq[1:]):
            if len(a) != len(b):
                raise ValueError("malformed plan step %r -> %r" % (a, b))
            total += sum(1 for x, y in zip(a, b) if x != y)
        return total

    pre = units(plan.prefix)
    suf = units(plan.suffix)
    if pts is not None:
        for seq in (plan.prefix, plan.suffix):
            for a, b in zip(seq, seq[1:]):
                for comp, x, y in zip(pts.components, a, b):
                    if not comp.has_transition(x, y):
                        raise ValueError("non-transition step %r -> %r" % (a, b))
    if (pre, suf) != (plan.prefix_units, plan.suffix_units):
        raise ValueError(
            "stored costs (%d, %d) units disagree with recomputation (%d, %d)"
            % (plan.prefix_units, plan.suffix_units, pre, suf))
    return (pre * plan.unit, suf * plan.unit, (pre + suf) * plan.unit)


def plan_word(plan: Plan, components) -> LassoWord:
    """The lasso word a plan traces: labels of the prefix states, then the
    suffix cycle's labels with the duplicated junction dropped."""
    def letter(joint):
        return frozenset(c.label(q) for c, q in zip(components, joint))

    if len(plan.suffix) < 2:
        raise ValueError("suffix must contain at least one transition")
    prefix_letters = [letter(q) for q in plan.prefix]
    period_letters = [letter(q) for q in plan.suffix[1:]]
    return LassoWord(tuple(prefix_letters), tuple(period_letters))


def verify(plan: Plan, f: Formula, b: Nba, components) -> bool:
    """Replay the plan as a lasso word through the automaton; cross-check
    the semantic evaluator and flag any disagreement."""
    word = plan_word(plan, components)
    by_automaton = accepts_lasso(b, word)
    by_semantics = eval_lasso(f, word)
    if by_automaton != by_semantics:
        raise InternalConsistencyError(
            "automaton says %s but direct evaluation says %s"
            % (by_automaton, by_semantics))
    return by_automaton
