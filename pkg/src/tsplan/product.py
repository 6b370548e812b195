"""Synchronous products: the joint transition system of all robots with the
proximity constraint enforced by pruning, and its product with an NBA.

Joint states violating the pairwise-distance predicate (distance must be
strictly greater than the robot influence radius) are excluded outright;
distance is checked at transition endpoints, optionally also at segment
midpoints.  Weights count moving robots, in units of the diagonal move
length, so all cost arithmetic is exact integer arithmetic.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .buchi import Nba
from .ltl import AtomId
from .workspace import Wts


class InfeasibleStart(ValueError):
    """The initial joint state violates the proximity constraint."""


def _pairwise_ok(positions, tuple_ids, r_influence):
    n = len(tuple_ids)
    for i in range(n):
        pi = positions[tuple_ids[i]]
        for j in range(i + 1, n):
            pj = positions[tuple_ids[j]]
            dx = pi[0] - pj[0]
            dy = pi[1] - pj[1]
            if dx * dx + dy * dy <= r_influence * r_influence:
                return False
    return True


class Pts:
    """Product transition system over an explicit joint state list."""

    def __init__(self, components, r_influence_robot, check_midpoints=False):
        if not components:
            raise ValueError("need at least one component wTS")
        ws = components[0].workspace
        if any(c.workspace is not ws for c in components):
            raise ValueError("all components must share one workspace")
        self.components = tuple(components)
        self.workspace = ws
        self.r_influence = float(r_influence_robot)
        self.check_midpoints = bool(check_midpoints)
        self.initial = tuple(c.init for c in components)
        self.states: list = []
        self.index: dict = {}
        self._edges_cache = None

    # -- state management ------------------------------------------------
    def _admit(self, joint) -> bool:
        if len(self.components) < 2:
            return True
        return _pairwise_ok(self.workspace.positions, joint, self.r_influence)

    def add_state(self, joint) -> int:
        if joint in self.index:
            raise ValueError("joint state %r already present" % (joint,))
        if not self._admit(joint):
            raise ValueError("joint state %r violates the proximity constraint" % (joint,))
        self.index[joint] = len(self.states)
        self.states.append(joint)
        self._edges_cache = None
        return self.index[joint]

    def label(self, joint) -> frozenset:
        return frozenset(c.label(q) for c, q in zip(self.components, joint))

    def joint_weight_units(self, a, b) -> int:
        return sum(1 for x, y in zip(a, b) if x != y)

    def _midpoint_ok(self, a, b) -> bool:
        pos = self.workspace.positions
        mids = [(pos[x] + pos[y]) / 2.0 for x, y in zip(a, b)]
        r2 = self.r_influence * self.r_influence
        for i in range(len(mids)):
            for j in range(i + 1, len(mids)):
                d = mids[i] - mids[j]
                if d[0] * d[0] + d[1] * d[1] <= r2:
                    return False
        return True

    def move_options(self, joint):
        """Per-robot move targets (stay first), restricted to each component."""
        return [(q,) + c.neighbors(q) for c, q in zip(self.components, joint)]

    def successors(self, joint):
        out = []
        for cand in itertools.product(*self.move_options(joint)):
            tgt = self.index.get(cand)
            if tgt is None:
                continue
            if self.check_midpoints and len(self.components) >= 2 \
                    and not self._midpoint_ok(joint, cand):
                continue
            out.append(cand)
        return out

    def edge_arrays(self):
        """(src, dst, weight-units) arrays over state indexes, built on demand."""
        if self._edges_cache is None:
            src, dst, w = [], [], []
            for i, joint in enumerate(self.states):
                for cand in self.successors(joint):
                    src.append(i)
                    dst.append(self.index[cand])
                    w.append(self.joint_weight_units(joint, cand))
            self._edges_cache = (np.asarray(src, dtype=np.int64),
                                 np.asarray(dst, dtype=np.int64),
                                 np.asarray(w, dtype=np.int32))
        return self._edges_cache

    def n_transitions(self) -> int:
        return int(self.edge_arrays()[0].shape[0])

    def state_matrix(self):
        return np.asarray(self.states, dtype=np.int32)


def compose_pts(components, r_influence_robot, check_midpoints=False,
                state_sets=None) -> Pts:
    """Explicit product: every proximity-respecting combination of component states.

    state_sets optionally narrows the per-robot state sets enumerated (used
    for reduced systems, whose joint space is the product of the reduced
    sets while adjacency is still inherited from the components).
    """
    pts = Pts(components, r_influence_robot, check_midpoints)
    if not pts._admit(pts.initial):
        raise InfeasibleStart(
            "initial joint state %r violates the proximity constraint" % (pts.initial,))
    sets = [tuple(sorted(s)) for s in state_sets] if state_sets is not None \
        else [c.states for c in components]
    for snames, c in zip(sets, components):
        missing = set(snames) - set(c.states)
        if missing:
            raise ValueError("state set entries %s not in component %r" % (sorted(missing), c.robot))
    for joint in itertools.product(*sets):
        if pts._admit(joint):
            pts.index[joint] = len(pts.states)
            pts.states.append(joint)
    return pts


def compose_pts_reachable(components, r_influence_robot, check_midpoints=False) -> Pts:
    """Frontier expansion from the initial joint state; states are discovered
    on demand, so the full combination space is never materialized."""
    pts = Pts(components, r_influence_robot, check_midpoints)
    if not pts._admit(pts.initial):
        raise InfeasibleStart(
            "initial joint state %r violates the proximity constraint" % (pts.initial,))
    pts.index[pts.initial] = 0
    pts.states.append(pts.initial)
    qi = 0
    while qi < len(pts.states):
        joint = pts.states[qi]
        qi += 1
        for cand in itertools.product(*pts.move_options(joint)):
            if cand in pts.index or not pts._admit(cand):
                continue
            if pts.check_midpoints and len(components) >= 2 \
                    and not pts._midpoint_ok(joint, cand):
                continue
            pts.index[cand] = len(pts.states)
            pts.states.append(cand)
    order = sorted(range(len(pts.states)), key=lambda i: pts.states[i])
    pts.states = [pts.states[i] for i in order]
    pts.index = {s: i for i, s in enumerate(pts.states)}
    return pts


# ---------------------------------------------------------------------------
# Product Buchi automaton
# ---------------------------------------------------------------------------

class AlphabetMismatch(ValueError):
    """The NBA references robots or waypoints the product does not know."""


def _check_alphabet(pts: Pts, nba: Nba):
    names = {c.robot for c in pts.components}
    R = pts.workspace.n_waypoints
    for aid in nba.universe:
        if aid.is_obs:
            continue
        if aid.robot not in names:
            raise AlphabetMismatch("atom %s references unknown robot %r" % (aid.text(), aid.robot))
        if not 1 <= aid.waypoint <= R:
            raise AlphabetMismatch("atom %s references waypoint outside 1..%d" % (aid.text(), R))


class Pba:
    """Product of a PTS with an NBA; state (p, b) has id p*|Q_B| + b.

    The transition (p,b) -> (p',b') exists iff p -> p' in the PTS and the
    NBA moves b -> b' under the label of the source p; its weight is the
    PTS weight.  Every (p, b) pair is a state, so the state count is
    exactly |Q_PTS| * |Q_B|.
    """

    def __init__(self, pts: Pts, nba: Nba):
        self.pts = pts
        self.nba = nba
        self._chunks: list = []
        self._csr = None

    @property
    def n_states(self) -> int:
        return len(self.pts.states) * self.nba.n

    def state_id(self, p: int, b: int) -> int:
        return p * self.nba.n + b

    def unpack(self, sid: int):
        return sid // self.nba.n, sid % self.nba.n

    def initial_ids(self):
        p0 = self.pts.index[self.pts.initial]
        return [self.state_id(p0, b) for b in sorted(self.nba.initial)]

    def accepting_ids(self):
        nb = self.nba.n
        acc = np.asarray(sorted(self.nba.accepting), dtype=np.int64)
        base = np.arange(len(self.pts.states), dtype=np.int64) * nb
        return (base[:, None] + acc[None, :]).ravel()

    def is_accepting(self, sid: int) -> bool:
        return sid % self.nba.n in self.nba.accepting

    def add_edges(self, src, dst, w):
        self._chunks.append((np.asarray(src, dtype=np.int64),
                             np.asarray(dst, dtype=np.int64),
                             np.asarray(w, dtype=np.int32)))
        self._csr = None

    def n_transitions(self) -> int:
        return int(sum(c[0].shape[0] for c in self._chunks))

    def csr(self):
        """(indptr, indices, weights) with parallel edges collapsed to the
        minimum weight; deterministic given the edge multiset."""
        if self._csr is None:
            n = self.n_states
            if self._chunks:
                src = np.concatenate([c[0] for c in self._chunks])
                dst = np.concatenate([c[1] for c in self._chunks])
                w = np.concatenate([c[2] for c in self._chunks]).astype(np.int64)
            else:
                src = np.empty(0, dtype=np.int64)
                dst = np.empty(0, dtype=np.int64)
                w = np.empty(0, dtype=np.int64)
            enc = (src * n + dst)
            order = np.lexsort((w, enc))
            enc, w = enc[order], w[order]
            keep = np.ones(enc.shape[0], dtype=bool)
            keep[1:] = enc[1:] != enc[:-1]
            enc, w = enc[keep], w[keep]
            src = enc // n
            dst = (enc % n).astype(np.int64)
            indptr = np.zeros(n + 1, dtype=np.int64)
            np.add.at(indptr, src + 1, 1)
            np.cumsum(indptr, out=indptr)
            self._csr = (indptr, dst, w.astype(np.int32))
        return self._csr

    def canonical_lines(self):
        """Canonical serialization: states sorted by (joint tuple, NBA id),
        transitions re-indexed accordingly; independent of insertion order."""
        order = sorted(range(len(self.pts.states)), key=lambda i: self.pts.states[i])
        prank = {old: new for new, old in enumerate(order)}
        nb = self.nba.n

        def canon(sid):
            p, b = divmod(int(sid), nb)
            return prank[p] * nb + b

        lines = ["states %d" % self.n_states]
        lines.append("initial " + ",".join(
            str(s) for s in sorted(canon(x) for x in self.initial_ids())))
        indptr, indices, w = self.csr()
        rows = []
        for s in range(self.n_states):
            for e in range(indptr[s], indptr[s + 1]):
                rows.append((canon(s), canon(indices[e]), int(w[e])))
        rows.sort()
        lines += ["%d %d %d" % r for r in rows]
        return lines


def build_pba(pts: Pts, nba: Nba) -> Pba:
    """Materialize the sparse product graph, vectorized over PTS edges."""
    _check_alphabet(pts, nba)
    pba = Pba(pts, nba)
    if not pts.states or nba.n == 0:
        return pba
    esrc, edst, ew = pts.edge_arrays()
    sat = _guard_sat_matrix(pts, nba)
    nb = nba.n
    chunks_s, chunks_d, chunks_w = [], [], []
    for t, (b_src, guard, b_dst) in enumerate(nba.transitions):
        mask = sat[t][esrc]
        if not mask.any():
            continue
        chunks_s.append(esrc[mask] * nb + b_src)
        chunks_d.append(edst[mask] * nb + b_dst)
        chunks_w.append(ew[mask])
    if chunks_s:
        pba.add_edges(np.concatenate(chunks_s), np.concatenate(chunks_d),
                      np.concatenate(chunks_w))
    return pba


def _guard_sat_matrix(pts: Pts, nba: Nba):
    """Boolean (transition x PTS-state) satisfaction table for all guards."""
    mat = pts.state_matrix()
    P = mat.shape[0]
    robot_col = {c.robot: i for i, c in enumerate(pts.components)}
    out = []
    for _, guard, _ in nba.transitions:
        sat = np.ones(P, dtype=bool)
        for aid in guard.pos:
            if aid.is_obs:
                sat[:] = False
                break
            sat &= mat[:, robot_col[aid.robot]] == aid.waypoint
        else:
            for aid in guard.neg:
                if aid.is_obs:
                    continue
                sat &= mat[:, robot_col[aid.robot]] != aid.waypoint
        out.append(sat)
    return out


def update_pba(pba: Pba, q_pts_new, nba: Nba) -> Pba:
    """Insert one joint state into an existing product, wiring exactly the
    induced incoming and outgoing transitions; the result must match a
    from-scratch rebuild on the enlarged PTS."""
    pts = pba.pts
    if nba is not pba.nba:
        raise ValueError("update_pba must use the automaton the product was built with")
    if q_pts_new in pts.index:
        raise ValueError("joint state %r already in the product" % (q_pts_new,))
    p_new = pts.add_state(q_pts_new)   # raises on a proximity violation
    nb = nba.n
    src, dst, w = [], [], []
    # incoming: existing (and the new state itself, via the all-stay loop)
    for cand in itertools.product(*pts.move_options(q_pts_new)):
        p_src = pts.index.get(cand)
        if p_src is None:
            continue
        if pts.check_midpoints and len(pts.components) >= 2 \
                and not pts._midpoint_ok(cand, q_pts_new):
            continue
        letter = pts.label(cand)
        units = pts.joint_weight_units(cand, q_pts_new)
        for b_src, b_dst in nba.edges_for_letter(letter):
            src.append(p_src * nb + b_src)
            dst.append(p_new * nb + b_dst)
            w.append(units)
    # outgoing to existing states (the self-loop was covered above)
    letter = pts.label(q_pts_new)
    enabled = nba.edges_for_letter(letter)
    for cand in itertools.product(*pts.move_options(q_pts_new)):
        p_dst = pts.index.get(cand)
        if p_dst is None or p_dst == p_new:
            continue
        if pts.check_midpoints and len(pts.components) >= 2 \
                and not pts._midpoint_ok(q_pts_new, cand):
            continue
        units = pts.joint_weight_units(q_pts_new, cand)
        for b_src, b_dst in enabled:
            src.append(p_new * nb + b_src)
            dst.append(p_dst * nb + b_dst)
            w.append(units)
    if src:
        pba.add_edges(src, dst, w)
    else:
        pba._csr = None
    return pba


def theoretical_pba_size(component_sizes, nba_size) -> int:
    """Exact product-size identity; arbitrary-precision, never wraps."""
    if nba_size < 0 or any(s < 0 for s in component_sizes):
        raise ValueError("sizes must be nonnegative")
    total = int(nba_size)
    for s in component_sizes:
        total *= int(s)
    return total


def stats_report(pts: Pts, nba: Nba, pba: Pba | None = None) -> dict:
    """Size statistics; the joint count before pruning is the raw product."""
    comp_sizes = [len(c.states) for c in pts.components]
    joint_before = 1
    for s in comp_sizes:
        joint_before *= s
    report = {
        "component_sizes": comp_sizes,
        "joint_states_before_pruning": joint_before,
        "joint_states_after_pruning": len(pts.states),
        "nba_states": nba.n,
        "pba_states_theoretical": theoretical_pba_size(comp_sizes, nba.n),
        "pba_states_materialized": len(pts.states) * nba.n,
    }
    if pba is not None:
        indptr, indices, w = pba.csr()
        report["pba_transitions"] = int(indices.shape[0])
        report["peak_memory_estimate_bytes"] = int(
            indptr.nbytes + indices.nbytes + w.nbytes
            + len(pts.states) * len(pts.components) * 4)
    return report


def stats_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
