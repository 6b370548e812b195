"""Discrete plan execution: unroll prefix plus suffix repetitions into a
trajectory with positions, pairwise-distance minima, and cost accounting."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass


@dataclass
class Trajectory:
    robots: tuple
    steps: list            # joint waypoint tuples
    positions: list        # per step: tuple of (x, y) per robot
    min_distances: list    # per step: min pairwise distance, None for < 2 robots
    cumulative_costs: list # per step: cost so far (distance units)

    def __len__(self):
        return len(self.steps)


def execute(plan, workspace, suffix_repetitions: int = 1) -> Trajectory:
    """Prefix once, then k suffix copies with the duplicated junction dropped.

    The final cumulative cost is prefix_cost + k * suffix_cost exactly.
    """
    if suffix_repetitions < 0:
        raise ValueError("suffix_repetitions must be >= 0")
    if plan.prefix[-1] != plan.suffix[0] or plan.suffix[0] != plan.suffix[-1]:
        raise ValueError("malformed plan: suffix must loop on the prefix's last state")
    steps = list(plan.prefix)
    for _ in range(suffix_repetitions):
        steps.extend(plan.suffix[1:])

    n_robots = len(plan.robots)
    positions = []
    min_distances = []
    cumulative = []
    total_units = 0
    prev = None
    for joint in steps:
        if len(joint) != n_robots:
            raise ValueError("step %r does not name %d robots" % (joint, n_robots))
        pos = tuple(workspace.position(q) for q in joint)
        positions.append(pos)
        if n_robots >= 2:
            best = min(math.dist(pos[i], pos[j])
                       for i in range(n_robots) for j in range(i + 1, n_robots))
            min_distances.append(best)
        else:
            min_distances.append(None)
        if prev is not None:
            total_units += sum(1 for x, y in zip(prev, joint) if x != y)
        cumulative.append(total_units * workspace.move_length)
        prev = joint
    return Trajectory(tuple(plan.robots), steps, positions, min_distances, cumulative)


def distance_series(tr: Trajectory):
    """(step, min pairwise distance) pairs; empty for single-robot runs."""
    if len(tr.robots) < 2:
        return []
    return [(k, d) for k, d in enumerate(tr.min_distances)]


def _rows(tr: Trajectory):
    header = ["step"]
    for name in tr.robots:
        header += ["%s_wp" % name, "%s_x" % name, "%s_y" % name]
    header += ["min_dist", "cum_cost"]
    yield header
    for k in range(len(tr.steps)):
        row = [k]
        for i, _ in enumerate(tr.robots):
            x, y = tr.positions[k][i]
            row += [tr.steps[k][i], "%.9f" % x, "%.9f" % y]
        md = tr.min_distances[k]
        row += ["" if md is None else "%.9f" % md, "%.9f" % tr.cumulative_costs[k]]
        yield row


def to_csv(tr: Trajectory) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in _rows(tr):
        writer.writerow(row)
    return buf.getvalue()


def to_json(tr: Trajectory) -> str:
    doc = {
        "robots": list(tr.robots),
        "steps": [list(q) for q in tr.steps],
        "positions": [[list(p) for p in row] for row in tr.positions],
        "min_distances": tr.min_distances,
        "cumulative_costs": tr.cumulative_costs,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def from_json(text: str) -> Trajectory:
    doc = json.loads(text)
    return Trajectory(
        robots=tuple(doc["robots"]),
        steps=[tuple(q) for q in doc["steps"]],
        positions=[tuple(tuple(p) for p in row) for row in doc["positions"]],
        min_distances=list(doc["min_distances"]),
        cumulative_costs=list(doc["cumulative_costs"]),
    )


def export(tr: Trajectory, path, fmt: str = "csv"):
    if fmt == "csv":
        payload = to_csv(tr)
    elif fmt == "json":
        payload = to_json(tr)
    else:
        raise ValueError("unknown export format %r" % fmt)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(payload)
