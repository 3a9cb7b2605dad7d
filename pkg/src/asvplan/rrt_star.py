"""Sampling-based front-end path search and waypoint extraction.

RRT* over 2-D position space: uniform sampling with goal bias, straight-line
steering clipped to the step size, choose-parent over the shrinking
neighbourhood radius min(gamma * sqrt(ln n / n), 2 * step_size), and rewiring
with subtree cost propagation.  The search is purely geometric; vessel
dynamics enter only in the back-end optimization.

`extract_waypoints` shortcut-simplifies the returned path: starting from the
path head it repeatedly keeps the farthest vertex still reachable by a free
straight segment, so the waypoint list excludes start and goal and every
consecutive chord is collision-free at the configured inflation.

A planner instance owns a mutable tree and RNG and is single-threaded;
independent instances may run concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .world import WorldMap, is_free, segment_free


class NoPathFound(Exception):
    """Iteration budget exhausted without connecting to the goal region."""


@dataclass
class PlannerConfig:
    max_iterations: int = 5000
    step_size: float = 1.0
    goal_bias: float = 0.05
    gamma: float = 20.0
    goal_tolerance: float = 0.3
    rng_seed: int = 0
    inflate: float = 0.7

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if not 0.0 <= self.goal_bias <= 1.0:
            raise ValueError("goal_bias must be in [0, 1]")
        if self.goal_tolerance <= 0:
            raise ValueError("goal_tolerance must be positive")


@dataclass
class PlannedPath:
    """Ordered vertices from start to the goal region and the path length."""

    vertices: np.ndarray
    cost: float
    cost_history: list = field(default_factory=list)


class RRTStar:
    """One search instance; keeps the final tree inspectable for diagnostics."""

    def __init__(self, world: WorldMap, config: PlannerConfig):
        self.world = world
        self.config = config
        cap = config.max_iterations + 1
        self.positions = np.zeros((cap, 2))
        self.parents = np.full(cap, -1, dtype=int)
        self.costs = np.zeros(cap)
        self.children: list[set[int]] = []
        self.size = 0

    def _add_node(self, position, parent: int, cost: float) -> int:
        idx = self.size
        self.positions[idx] = position
        self.parents[idx] = parent
        self.costs[idx] = cost
        self.children.append(set())
        if parent >= 0:
            self.children[parent].add(idx)
        self.size += 1
        return idx

    def _near_radius(self) -> float:
        n = self.size
        if n < 2:
            return 0.0
        return min(self.config.gamma * math.sqrt(math.log(n) / n),
                   2.0 * self.config.step_size)

    def _propagate_cost(self, root: int, delta: float):
        stack = [root]
        while stack:
            node = stack.pop()
            self.costs[node] += delta
            stack.extend(self.children[node])

    def plan(self, start, goal) -> PlannedPath:
        cfg = self.config
        world = self.world
        start = np.asarray(start, dtype=float)
        goal = np.asarray(goal, dtype=float)
        if not is_free(start, world, cfg.inflate):
            raise ValueError("start position is not free at the configured inflation")
        if not is_free(goal, world, cfg.inflate):
            raise ValueError("goal position is not free at the configured inflation")

        history: list[float] = []
        if float(np.hypot(*(start - goal))) <= cfg.goal_tolerance:
            return PlannedPath(vertices=start[None, :].copy(), cost=0.0,
                               cost_history=history)

        rng = np.random.default_rng(cfg.rng_seed)
        self._add_node(start, parent=-1, cost=0.0)
        goal_nodes: list[int] = []
        x_lo, x_hi = world.x_bounds
        y_lo, y_hi = world.y_bounds

        for iteration in range(1, cfg.max_iterations + 1):
            if rng.random() < cfg.goal_bias:
                sample = goal
            else:
                sample = np.array([rng.uniform(x_lo, x_hi), rng.uniform(y_lo, y_hi)])

            pts = self.positions[:self.size]
            dists = np.hypot(pts[:, 0] - sample[0], pts[:, 1] - sample[1])
            nearest = int(np.argmin(dists))  # first index wins ties
            gap = dists[nearest]
            if gap < 1e-12:
                continue
            x_new = pts[nearest] + (sample - pts[nearest]) * min(1.0, cfg.step_size / gap)

            if not is_free(x_new, world, cfg.inflate):
                continue
            if not segment_free(pts[nearest], x_new, world, cfg.inflate):
                continue

            radius = self._near_radius()
            step = np.hypot(pts[:, 0] - x_new[0], pts[:, 1] - x_new[1])
            near = np.flatnonzero(step <= radius)

            parent = nearest
            c_min = self.costs[nearest] + step[nearest]
            for j in near:
                if j == nearest:
                    continue
                c_through = self.costs[j] + step[j]
                if c_through < c_min - 1e-12 and segment_free(pts[j], x_new, world,
                                                              cfg.inflate):
                    parent = int(j)
                    c_min = c_through

            new_idx = self._add_node(x_new, parent, c_min)
            if float(np.hypot(*(x_new - goal))) <= cfg.goal_tolerance:
                goal_nodes.append(new_idx)

            for j in near:
                if j == parent:
                    continue
                c_through = c_min + step[j]
                if c_through < self.costs[j] - 1e-12 and segment_free(
                        x_new, pts[j], world, cfg.inflate):
                    old_parent = self.parents[j]
                    self.children[old_parent].discard(int(j))
                    self.parents[j] = new_idx
                    self.children[new_idx].add(int(j))
                    self._propagate_cost(int(j), c_through - self.costs[j])

            if iteration % 100 == 0:
                best = min((self.costs[g] for g in goal_nodes), default=math.inf)
                history.append(float(best))

        if not goal_nodes:
            raise NoPathFound(
                f"no goal connection after {cfg.max_iterations} iterations")

        best = min(goal_nodes, key=lambda g: (self.costs[g], g))
        chain = []
        node = best
        while node >= 0:
            chain.append(node)
            node = int(self.parents[node])
        chain.reverse()
        return PlannedPath(vertices=self.positions[chain].copy(),
                           cost=float(self.costs[best]),
                           cost_history=history)


def plan(start, goal, world: WorldMap, config: PlannerConfig) -> PlannedPath:
    """Search a collision-free path from start to the goal region."""
    return RRTStar(world, config).plan(start, goal)


def extract_waypoints(path: PlannedPath, world: WorldMap,
                      inflate: float) -> np.ndarray:
    """Shortcut-simplify a planned path into intermediate waypoints.

    Returns an (n, 2) array excluding the start and goal vertices; every
    consecutive chord, including start -> first and last -> goal, passes
    `segment_free` at the given inflation.
    """
    verts = path.vertices
    last = len(verts) - 1
    waypoints = []
    anchor = 0
    while anchor < last:
        far = anchor + 1
        for j in range(last, anchor, -1):
            if segment_free(verts[anchor], verts[j], world, inflate):
                far = j
                break
        if far == last:
            break
        waypoints.append(verts[far])
        anchor = far
    return np.array(waypoints) if waypoints else np.empty((0, 2))
