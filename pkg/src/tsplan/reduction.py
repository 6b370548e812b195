"""Reduced-state-space synthesis: formula-driven initial systems grown by
seeded neighborhood sampling until a satisfying plan exists.

Per robot, the atoms the formula mentions positively (initial-state atom
first) induce a chain of shortest paths, computed with the negatively
mentioned locations deleted; the union of those paths is the initial
reduced state set.  While synthesis over the product of the reduced sets
fails, every robot adds one state drawn uniformly (seeded) from the n-hop
neighborhood of a rotating seed state, the product is expanded, and the
product automaton is patched incrementally instead of rebuilt.
"""

from __future__ import annotations

import itertools
import json
import random
import time
from dataclasses import dataclass, field

from .buchi import Nba
from .ltl import Atom, AtomId, Formula, Not, to_nnf
from .product import Pba, Pts, build_pba, compose_pts, update_pba
from .synthesis import Infeasible, Plan, synthesize, verify
from .workspace import Wts


class InfeasibleInitialization(RuntimeError):
    """A positively required location is unreachable under the deletions."""


class ExhaustionInfeasible(RuntimeError):
    """Every robot's reduced set saturated its reachable states and synthesis
    still failed; over the full expansion mode this verdict is authoritative."""


@dataclass(frozen=True)
class PropSets:
    """Per-robot positive (ordered, initial first) and negative atom sets."""

    robot: str
    positive: tuple
    negative: frozenset

    def positive_waypoints(self):
        return [a.waypoint for a in self.positive]

    def negative_waypoints(self):
        return {a.waypoint for a in self.negative}


def extract_prop_sets(f: Formula, robots, initial_atoms) -> list[PropSets]:
    """Occurrence polarity is read off the NNF (an atom under an odd number
    of original negations surfaces there under Not); ordering follows first
    occurrence in the formula, after the prepended initial-state atom."""
    nnf = to_nnf(f)
    pos_order: list = []
    pos_seen: set = set()
    neg: set = set()

    def walk(g):
        t = type(g)
        if t is Atom:
            if g.aid not in pos_seen:
                pos_seen.add(g.aid)
                pos_order.append(g.aid)
        elif t is Not:
            neg.add(g.child.aid)
        elif hasattr(g, "child"):
            walk(g.child)
        elif hasattr(g, "left"):
            walk(g.left)
            walk(g.right)

    walk(nnf)
    out = []
    for robot, init_atom in zip(robots, initial_atoms):
        ordered = [init_atom]
        for a in pos_order:
            if not a.is_obs and a.robot == robot and a != init_atom:
                ordered.append(a)
        negative = frozenset(a for a in neg if not a.is_obs and a.robot == robot)
        out.append(PropSets(robot, tuple(ordered), negative))
    return out


def _bfs_dist(adj, allowed, start):
    dist = {start: 0}
    queue = [start]
    qi = 0
    while qi < len(queue):
        u = queue[qi]
        qi += 1
        for v in adj(u):
            if v in allowed and v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def _lex_shortest_path(wts: Wts, allowed, s, t):
    """Minimum-hop path s..t inside `allowed`, lexicographically smallest
    id sequence among the ties (hop count is cost: move edges share one weight)."""
    if s == t:
        return [s]
    fwd = _bfs_dist(wts.neighbors, allowed, s)
    if t not in fwd:
        return None
    back = _bfs_dist(wts.neighbors, allowed, t)
    path = [s]
    cur = s
    while cur != t:
        nxt = None
        for v in wts.neighbors(cur):
            if v in allowed and back.get(v, -1) == back[cur] - 1:
                if nxt is None or v < nxt:
                    nxt = v
        path.append(nxt)
        cur = nxt
    return path


def build_initial_wts(full: Wts, sets: PropSets, order_mode: str = "first-occurrence") -> Wts:
    """Union of shortest chains between consecutive positively required
    locations, avoiding locations that are only ever negated; transitions,
    weights and labels are inherited, so traces embed into the full system."""
    waypoints = sets.positive_waypoints()
    missing = [w for w in waypoints if w not in set(full.states)]
    if missing:
        raise InfeasibleInitialization(
            "robot %r: required locations %s are not states of the full system"
            % (sets.robot, missing))
    deleted = sets.negative_waypoints() - set(waypoints)
    allowed = set(full.states) - deleted

    def chain_states(order):
        acc: set = set()
        for a, b in zip(order, order[1:]):
            path = _lex_shortest_path(full, allowed, a, b)
            if path is None:
                return None
            acc.update(path)
        acc.add(order[0])
        return acc

    if order_mode == "first-occurrence":
        orders = [waypoints]
    elif order_mode == "exhaustive":
        rest = waypoints[1:]
        if len(rest) > 6:
            raise ValueError("exhaustive ordering supports at most 6 goal atoms")
        orders = [[waypoints[0]] + list(p)
                  for p in sorted(itertools.permutations(rest))]
    else:
        raise ValueError("unknown order_mode %r" % order_mode)

    best = None
    best_order = None
    for order in orders:
        acc = chain_states(order)
        if acc is None:
            if order_mode == "first-occurrence":
                raise InfeasibleInitialization(
                    "robot %r: some required location is unreachable once %s are deleted"
                    % (sets.robot, sorted(deleted)))
            continue
        if best is None or len(acc) < len(best):
            best, best_order = acc, order
    if best is None:
        raise InfeasibleInitialization(
            "robot %r: no goal ordering is realizable once %s are deleted"
            % (sets.robot, sorted(deleted)))
    return full.restricted(sorted(best))


def compute_seed_set(reduced: Wts, sets: PropSets) -> list:
    """States whose labels the formula negates, else the whole reduced set."""
    flagged = [q for q in reduced.states if reduced.label(q) in sets.negative]
    return sorted(flagged) if flagged else sorted(reduced.states)


def n_hop_candidates(full: Wts, anchor: int, n: int, existing) -> list:
    """States within n hops of the anchor in the full graph, minus existing."""
    if anchor not in set(full.states):
        raise ValueError("anchor %d is not a state of the full system" % anchor)
    seen = {anchor: 0}
    queue = [anchor]
    qi = 0
    while qi < len(queue):
        u = queue[qi]
        qi += 1
        if seen[u] == n:
            continue
        for v in full.neighbors(u):
            if v not in seen:
                seen[v] = seen[u] + 1
                queue.append(v)
    existing = set(existing)
    return sorted(q for q in seen if q not in existing)


@dataclass
class ReductionState:
    """Mutable per-robot growth bookkeeping for the sampling loop."""

    robot: str
    states: set
    seed_set: list
    cursor: int = 1          # 1-based position into seed_set
    hops: int = 1
    closure: frozenset = frozenset()

    def saturated(self) -> bool:
        return self.closure <= self.states

    def advance_cursor(self):
        self.cursor += 1
        if self.cursor > len(self.seed_set):
            self.cursor = 1
            self.hops += 1


@dataclass
class ReductionConfig:
    r_influence_robot: float = 0.0
    seed: int = 0
    mode: str = "full-product"          # or "joint-tuple-only"
    check_midpoints: bool = False
    order_mode: str = "first-occurrence"
    max_iterations: int | None = None


@dataclass
class ReductionReport:
    seed: int
    mode: str
    pi: dict
    pi_bar: dict
    seed_sets: dict
    initial_sizes: dict
    iterations: list = field(default_factory=list)
    pba_state_trajectory: list = field(default_factory=list)
    final_sizes: dict = field(default_factory=dict)
    outcome: str = "unknown"
    phase_seconds: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "mode": self.mode,
            "pi": self.pi,
            "pi_bar": self.pi_bar,
            "seed_sets": self.seed_sets,
            "initial_sizes": self.initial_sizes,
            "iterations": self.iterations,
            "pba_state_trajectory": self.pba_state_trajectory,
            "final_sizes": self.final_sizes,
            "outcome": self.outcome,
            "phase_seconds": self.phase_seconds,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def reduce_and_plan(full_wtss, f: Formula, b: Nba, cfg: ReductionConfig):
    """Iterative reduced-product synthesis; returns (Plan, ReductionReport).

    Raises InfeasibleInitialization if a required chain cannot be built,
    and ExhaustionInfeasible when growth saturates without a plan (in
    full-product mode that verdict agrees with planning on the full product).
    """
    t_start = time.perf_counter()
    robots = [w.robot for w in full_wtss]
    initial_atoms = [AtomId(w.robot, w.init) for w in full_wtss]
    prop_sets = extract_prop_sets(f, robots, initial_atoms)

    reduced = [build_initial_wts(w, ps, cfg.order_mode)
               for w, ps in zip(full_wtss, prop_sets)]
    states = [ReductionState(
        robot=w.robot,
        states=set(r.states),
        seed_set=compute_seed_set(r, ps)) for w, r, ps in zip(full_wtss, reduced, prop_sets)]
    for st, w in zip(states, full_wtss):
        st.closure = frozenset(_bfs_dist(w.neighbors, set(w.states), w.init))

    report = ReductionReport(
        seed=cfg.seed,
        mode=cfg.mode,
        pi={ps.robot: [a.text() for a in ps.positive] for ps in prop_sets},
        pi_bar={ps.robot: sorted(a.text() for a in ps.negative) for ps in prop_sets},
        seed_sets={st.robot: list(st.seed_set) for st in states},
        initial_sizes={st.robot: len(st.states) for st in states},
    )
    t_init = time.perf_counter()
    report.phase_seconds["initialization"] = t_init - t_start

    rng = random.Random(cfg.seed)
    pts = compose_pts(full_wtss, cfg.r_influence_robot, cfg.check_midpoints,
                      state_sets=[sorted(st.states) for st in states])
    pba = build_pba(pts, b)
    report.pba_state_trajectory.append(pba.n_states)

    t_synth = 0.0
    t_grow = 0.0
    iteration = 0
    while True:
        t0 = time.perf_counter()
        try:
            plan = synthesize(pba)
        except Infeasible:
            plan = None
        t_synth += time.perf_counter() - t0
        if plan is not None:
            verify(plan, f, b, pts.components)
            report.final_sizes = {st.robot: len(st.states) for st in states}
            report.outcome = "plan"
            report.phase_seconds["synthesis"] = t_synth
            report.phase_seconds["growth"] = t_grow
            plan.stats["reduction_iterations"] = iteration
            return plan, report

        if all(st.saturated() for st in states):
            report.final_sizes = {st.robot: len(st.states) for st in states}
            report.outcome = "exhausted"
            report.phase_seconds["synthesis"] = t_synth
            report.phase_seconds["growth"] = t_grow
            raise ExhaustionInfeasible(
                "reduced systems saturated all reachable states without a plan"
                + ("" if cfg.mode == "full-product"
                   else " (joint-tuple-only mode: verdict not authoritative)"))
        if cfg.max_iterations is not None and iteration >= cfg.max_iterations:
            report.outcome = "iteration-limit"
            raise ExhaustionInfeasible("iteration limit reached without a plan")

        t0 = time.perf_counter()
        additions = {}
        for st, w in zip(states, full_wtss):
            if st.saturated():
                continue
            guard = len(st.seed_set) * (len(w.states) + 2)
            for _ in range(guard):
                anchor = st.seed_set[st.cursor - 1]
                cands = n_hop_candidates(w, anchor, st.hops, st.states)
                if cands:
                    additions[st.robot] = rng.choice(cands)
                    st.advance_cursor()
                    break
                st.advance_cursor()
            else:
                continue  # treated as saturated this round

        iteration += 1
        new_joints = _expand_product(pts, pba, b, states, additions, cfg)
        report.iterations.append({
            "added": dict(sorted(additions.items())),
            "new_joint_states": new_joints,
            "pba_states": pba.n_states,
        })
        report.pba_state_trajectory.append(pba.n_states)
        t_grow += time.perf_counter() - t0


def _expand_product(pts: Pts, pba: Pba, b: Nba, states, additions, cfg: ReductionConfig):
    """Grow the joint product after per-robot additions.

    full-product mode inserts every new proximity-respecting combination of
    the enlarged sets; joint-tuple-only follows the literal one-tuple rule
    (saturated robots contribute their current seed state)."""
    if cfg.mode == "joint-tuple-only":
        tup = []
        for st in states:
            if st.robot in additions:
                st.states.add(additions[st.robot])
                tup.append(additions[st.robot])
            else:
                tup.append(st.seed_set[st.cursor - 1])
        tup = tuple(tup)
        added = 0
        if tup not in pts.index and pts._admit(tup):
            update_pba(pba, tup, b)
            added = 1
        return added
    if cfg.mode != "full-product":
        raise ValueError("unknown reduction mode %r" % cfg.mode)

    for st in states:
        if st.robot in additions:
            st.states.add(additions[st.robot])
    new_sets = [sorted(st.states) for st in states]
    added = 0
    for joint in itertools.product(*new_sets):
        if joint not in pts.index and pts._admit(joint):
            update_pba(pba, joint, b)
            added += 1
    return added
