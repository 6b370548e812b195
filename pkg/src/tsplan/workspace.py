"""Coil-array geometry and per-robot weighted transition systems.

Waypoints sit at coil centers and at the interior coil corners; moves are
diagonal center<->corner steps of length pitch*sqrt(2)/2.  Numbering is
canonical: centers first in row-major order (ids 1..m^2), then interior
corners in row-major order (ids m^2+1..m^2+(m-1)^2).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .ltl import AtomId


@dataclass(frozen=True)
class RobotSpec:
    name: str
    init: int


@dataclass(frozen=True)
class WorkspaceConfig:
    grid_m: int
    pitch: float = 1.0
    obstacles: frozenset = frozenset()
    robots: tuple = ()
    r_influence_robot: float = 0.0
    r_influence_coil: float = 0.0   # informational only
    epsilon: float = 0.05           # informational only

    def __post_init__(self):
        if self.grid_m < 1:
            raise ValueError("grid_m must be >= 1")
        if self.pitch <= 0:
            raise ValueError("pitch must be positive")
        if self.r_influence_robot < 0:
            raise ValueError("r_influence_robot must be >= 0")
        R = waypoint_count(self.grid_m)
        bad = [o for o in self.obstacles if not 1 <= o <= R]
        if bad:
            raise ValueError("obstacle ids out of range 1..%d: %s" % (R, sorted(bad)))
        names = [r.name for r in self.robots]
        if len(set(names)) != len(names):
            raise ValueError("duplicate robot names: %s" % names)


def waypoint_count(m: int) -> int:
    return m * m + (m - 1) * (m - 1)


class Workspace:
    """Waypoint geometry: positions, diagonal-move adjacency, obstacles."""

    def __init__(self, cfg: WorkspaceConfig):
        self.cfg = cfg
        m = cfg.grid_m
        self.m = m
        self.pitch = cfg.pitch
        self.n_waypoints = waypoint_count(m)
        self.obstacles = frozenset(cfg.obstacles)
        # positions[0] unused: waypoint ids are 1-based
        pos = np.zeros((self.n_waypoints + 1, 2))
        for row in range(m):
            for col in range(m):
                pos[1 + row * m + col] = ((col + 0.5) * cfg.pitch, (row + 0.5) * cfg.pitch)
        base = m * m
        for i in range(1, m):
            for j in range(1, m):
                pos[base + (i - 1) * (m - 1) + j] = (j * cfg.pitch, i * cfg.pitch)
        self.positions = pos
        adj = [[] for _ in range(self.n_waypoints + 1)]
        for i in range(1, m):
            for j in range(1, m):
                corner = base + (i - 1) * (m - 1) + j
                for r in (i - 1, i):
                    for c in (j - 1, j):
                        center = 1 + r * m + c
                        adj[corner].append(center)
                        adj[center].append(corner)
        self.adjacency = [sorted(n) for n in adj]
        self.move_length = cfg.pitch * math.sqrt(2.0) / 2.0

    def is_center(self, wp: int) -> bool:
        return 1 <= wp <= self.m * self.m

    def position(self, wp: int):
        return tuple(self.positions[wp])

    def distance(self, a: int, b: int) -> float:
        d = self.positions[a] - self.positions[b]
        return float(math.hypot(d[0], d[1]))

    def neighbors(self, wp: int):
        return self.adjacency[wp]


def build_workspace(cfg: WorkspaceConfig) -> Workspace:
    return Workspace(cfg)


def waypoint_distance(ws: Workspace, a: int, b: int) -> float:
    if not (1 <= a <= ws.n_waypoints and 1 <= b <= ws.n_waypoints):
        raise ValueError("waypoint id out of range")
    return ws.distance(a, b)


MOVE_ACTIONS = ("up-left", "up-right", "down-left", "down-right")
STAY = "stay"


class Wts:
    """Weighted transition system of one robot: non-obstacle waypoints,
    diagonal moves plus a zero-cost stay, Euclidean move weights, and the
    one-atom-per-state labeling."""

    def __init__(self, ws: Workspace, robot: str, init: int, states=None):
        if not 1 <= init <= ws.n_waypoints:
            raise ValueError("initial waypoint %d out of range" % init)
        if init in ws.obstacles:
            raise ValueError("initial waypoint %d is an obstacle" % init)
        if states is None:
            states = [q for q in range(1, ws.n_waypoints + 1) if q not in ws.obstacles]
        self.workspace = ws
        self.robot = robot
        self.init = init
        self.states = tuple(sorted(states))
        if init not in set(self.states):
            raise ValueError("initial waypoint %d not among the states" % init)
        sset = set(self.states)
        self._adj = {q: tuple(n for n in ws.adjacency[q] if n in sset) for q in self.states}
        self.actions = MOVE_ACTIONS + (STAY,)

    def neighbors(self, q: int):
        """Move targets from q (stay excluded)."""
        return self._adj[q]

    def has_transition(self, q: int, q2: int) -> bool:
        return q == q2 or q2 in self._adj[q]

    def weight(self, q: int, q2: int) -> float:
        if q == q2:
            return 0.0
        if q2 not in self._adj[q]:
            raise ValueError("no transition %d -> %d" % (q, q2))
        return self.workspace.move_length

    def label(self, q: int) -> AtomId:
        return AtomId(self.robot, q)

    def action_between(self, q: int, q2: int) -> str:
        if q == q2:
            return STAY
        dx, dy = self.workspace.positions[q2] - self.workspace.positions[q]
        return "%s-%s" % ("up" if dy > 0 else "down", "right" if dx > 0 else "left")

    def restricted(self, states) -> "Wts":
        """Sub-system induced by a subset of states (transitions inherited)."""
        return Wts(self.workspace, self.robot, self.init, states=states)


def build_wts(ws: Workspace, robot: str, init: int) -> Wts:
    return Wts(ws, robot, init)


# ---------------------------------------------------------------------------
# Workspace file format
# ---------------------------------------------------------------------------

def workspace_from_dict(doc: dict) -> WorkspaceConfig:
    return WorkspaceConfig(
        grid_m=int(doc["grid_m"]),
        pitch=float(doc.get("pitch", 1.0)),
        obstacles=frozenset(int(o) for o in doc.get("obstacles", ())),
        robots=tuple(RobotSpec(str(r["name"]), int(r["init"])) for r in doc.get("robots", ())),
        r_influence_robot=float(doc.get("r_influence_robot", 0.0)),
        r_influence_coil=float(doc.get("r_influence_coil", 0.0)),
        epsilon=float(doc.get("epsilon", 0.05)),
    )


def workspace_to_dict(cfg: WorkspaceConfig) -> dict:
    return {
        "grid_m": cfg.grid_m,
        "pitch": cfg.pitch,
        "obstacles": sorted(cfg.obstacles),
        "robots": [{"name": r.name, "init": r.init} for r in cfg.robots],
        "r_influence_robot": cfg.r_influence_robot,
        "r_influence_coil": cfg.r_influence_coil,
        "epsilon": cfg.epsilon,
    }


def load_workspace(path) -> WorkspaceConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return workspace_from_dict(json.load(fh))


def save_workspace(cfg: WorkspaceConfig, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(workspace_to_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")
