"""Obstacle geometry, clearance queries and sailing-corridor computation.

Obstacles are axis-aligned rectangles and circles on a bounded rectangular
map.  All queries are exact (no sampling): point clearance is a signed
Euclidean distance (negative inside an obstacle), segment tests use closed
form segment/rectangle and segment/circle distances, and corridors are
axis-aligned boxes grown greedily until each side rests against the nearest
inflated obstacle edge or the map boundary.

Inflation semantics: the map's `margin` is a base safety inflation added to
the `inflate` argument of every free-space query (`is_free`, `segment_free`,
`compute_corridor`).  `clearance` always reports the true distance to the
physical obstacle boundary, which is what the trajectory metrics use.
Inflation is Euclidean, so inflated rectangles have rounded corners.

A `WorldMap` is immutable; every function here is read-only and thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RectObstacle:
    """Axis-aligned rectangle: center (cx, cy), x-extent `length`, y-extent `width`."""

    cx: float
    cy: float
    length: float
    width: float

    def __post_init__(self):
        if self.length <= 0 or self.width <= 0:
            raise ValueError("rectangle extents must be positive")

    @property
    def x_lo(self):
        return self.cx - 0.5 * self.length

    @property
    def x_hi(self):
        return self.cx + 0.5 * self.length

    @property
    def y_lo(self):
        return self.cy - 0.5 * self.width

    @property
    def y_hi(self):
        return self.cy + 0.5 * self.width


@dataclass(frozen=True)
class CircleObstacle:
    cx: float
    cy: float
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("circle radius must be positive")


Obstacle = RectObstacle | CircleObstacle


@dataclass(frozen=True)
class WorldMap:
    """Rectangular task area with fixed obstacles and a base safety margin [m]."""

    x_bounds: tuple[float, float]
    y_bounds: tuple[float, float]
    obstacles: tuple[Obstacle, ...] = field(default_factory=tuple)
    margin: float = 0.0

    def __post_init__(self):
        if self.x_bounds[0] >= self.x_bounds[1] or self.y_bounds[0] >= self.y_bounds[1]:
            raise ValueError("map bounds must be non-degenerate")
        if self.margin < 0:
            raise ValueError("margin must be non-negative")
        object.__setattr__(self, "obstacles", tuple(self.obstacles))


@dataclass(frozen=True)
class Corridor:
    """Axis-aligned position box bounding one sub-trajectory."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if self.x_min >= self.x_max or self.y_min >= self.y_max:
            raise ValueError("corridor must have positive extent")

    def contains(self, p, tol: float = 0.0) -> bool:
        x, y = float(p[0]), float(p[1])
        return (self.x_min - tol <= x <= self.x_max + tol
                and self.y_min - tol <= y <= self.y_max + tol)


class SeedBoxBlocked(Exception):
    """The bounding box of the segment endpoints already overlaps an obstacle."""


def _rect_signed_distance(x: float, y: float, rect: RectObstacle) -> float:
    dx = abs(x - rect.cx) - 0.5 * rect.length
    dy = abs(y - rect.cy) - 0.5 * rect.width
    outside = math.hypot(max(dx, 0.0), max(dy, 0.0))
    inside = min(max(dx, dy), 0.0)
    return outside + inside


def _obstacle_signed_distance(x: float, y: float, obs: Obstacle) -> float:
    if isinstance(obs, CircleObstacle):
        return math.hypot(x - obs.cx, y - obs.cy) - obs.radius
    return _rect_signed_distance(x, y, obs)


def clearance(p, world: WorldMap) -> float:
    """Signed distance [m] from p to the nearest obstacle boundary.

    Negative inside an obstacle; +inf when the map has no obstacles.  The
    map boundary is not counted.
    """
    x, y = float(p[0]), float(p[1])
    if not world.obstacles:
        return math.inf
    return min(_obstacle_signed_distance(x, y, o) for o in world.obstacles)


def clearance_array(points: np.ndarray, world: WorldMap) -> np.ndarray:
    """Vectorized `clearance` for an (n, 2) array of points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if not world.obstacles:
        return np.full(pts.shape[0], math.inf)
    dists = np.empty((len(world.obstacles), pts.shape[0]))
    x, y = pts[:, 0], pts[:, 1]
    for i, o in enumerate(world.obstacles):
        if isinstance(o, CircleObstacle):
            dists[i] = np.hypot(x - o.cx, y - o.cy) - o.radius
        else:
            dx = np.abs(x - o.cx) - 0.5 * o.length
            dy = np.abs(y - o.cy) - 0.5 * o.width
            outside = np.hypot(np.maximum(dx, 0.0), np.maximum(dy, 0.0))
            inside = np.minimum(np.maximum(dx, dy), 0.0)
            dists[i] = outside + inside
    return dists.min(axis=0)


def min_trajectory_clearance(samples, world: WorldMap) -> float:
    """Minimum obstacle clearance over a non-empty list of sample points."""
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    if pts.shape[0] == 0:
        raise ValueError("samples must be non-empty")
    return float(clearance_array(pts, world).min())


def is_free(p, world: WorldMap, inflate: float = 0.0) -> bool:
    """True iff p keeps more than `inflate` (+ map margin) from every obstacle
    and lies within the map bounds shrunk by the same amount."""
    eff = inflate + world.margin
    x, y = float(p[0]), float(p[1])
    if not (world.x_bounds[0] + eff <= x <= world.x_bounds[1] - eff):
        return False
    if not (world.y_bounds[0] + eff <= y <= world.y_bounds[1] - eff):
        return False
    return clearance(p, world) > eff


def _point_segment_distance(px, py, ax, ay, bx, by) -> float:
    dx, dy = bx - ax, by - ay
    denom = dx * dx + dy * dy
    if denom == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / denom
    t = min(1.0, max(0.0, t))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def _segment_segment_distance(p1, p2, q1, q2) -> float:
    d1 = (p2[0] - p1[0], p2[1] - p1[1])
    d2 = (q2[0] - q1[0], q2[1] - q1[1])
    cross = d1[0] * d2[1] - d1[1] * d2[0]
    if cross != 0.0:
        # solve p1 + t d1 = q1 + s d2; proper crossing means distance zero
        rx, ry = q1[0] - p1[0], q1[1] - p1[1]
        t = (rx * d2[1] - ry * d2[0]) / cross
        s = (rx * d1[1] - ry * d1[0]) / cross
        if 0.0 <= t <= 1.0 and 0.0 <= s <= 1.0:
            return 0.0
    return min(
        _point_segment_distance(p1[0], p1[1], q1[0], q1[1], q2[0], q2[1]),
        _point_segment_distance(p2[0], p2[1], q1[0], q1[1], q2[0], q2[1]),
        _point_segment_distance(q1[0], q1[1], p1[0], p1[1], p2[0], p2[1]),
        _point_segment_distance(q2[0], q2[1], p1[0], p1[1], p2[0], p2[1]),
    )


def _segment_intersects_rect(a, b, rect: RectObstacle) -> bool:
    # Liang-Barsky clip of the segment parameter interval against both slabs.
    t0, t1 = 0.0, 1.0
    for p, d, lo, hi in (
        (a[0], b[0] - a[0], rect.x_lo, rect.x_hi),
        (a[1], b[1] - a[1], rect.y_lo, rect.y_hi),
    ):
        if d == 0.0:
            if p < lo or p > hi:
                return False
        else:
            ta, tb = (lo - p) / d, (hi - p) / d
            if ta > tb:
                ta, tb = tb, ta
            t0, t1 = max(t0, ta), min(t1, tb)
            if t0 > t1:
                return False
    return True


def _segment_obstacle_distance(a, b, obs: Obstacle) -> float:
    if isinstance(obs, CircleObstacle):
        return _point_segment_distance(obs.cx, obs.cy, a[0], a[1], b[0], b[1]) - obs.radius
    if _segment_intersects_rect(a, b, obs):
        return 0.0
    corners = ((obs.x_lo, obs.y_lo), (obs.x_hi, obs.y_lo),
               (obs.x_hi, obs.y_hi), (obs.x_lo, obs.y_hi))
    return min(_segment_segment_distance(a, b, corners[i], corners[(i + 1) % 4])
               for i in range(4))


def segment_free(a, b, world: WorldMap, inflate: float = 0.0) -> bool:
    """True iff every point of segment ab clears all obstacles by more than
    `inflate` (+ map margin) and stays inside the shrunk map bounds."""
    eff = inflate + world.margin
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    # endpoints inside the shrunk rectangular bounds cover the whole segment
    for x, y in ((ax, ay), (bx, by)):
        if not (world.x_bounds[0] + eff <= x <= world.x_bounds[1] - eff):
            return False
        if not (world.y_bounds[0] + eff <= y <= world.y_bounds[1] - eff):
            return False
    return all(_segment_obstacle_distance((ax, ay), (bx, by), o) > eff
               for o in world.obstacles)


def _interval_gap(lo_a, hi_a, lo_b, hi_b) -> float:
    """Distance between two closed intervals (0 when they overlap or touch)."""
    return max(lo_b - hi_a, lo_a - hi_b, 0.0)


def _box_blocked(x0, x1, y0, y1, obs: Obstacle, eff: float) -> bool:
    """Does the open box interior intersect the obstacle inflated by eff?"""
    if isinstance(obs, CircleObstacle):
        gx = _interval_gap(x0, x1, obs.cx, obs.cx)
        gy = _interval_gap(y0, y1, obs.cy, obs.cy)
        return math.hypot(gx, gy) < obs.radius + eff
    gx = _interval_gap(x0, x1, obs.x_lo, obs.x_hi)
    gy = _interval_gap(y0, y1, obs.y_lo, obs.y_hi)
    if eff > 0.0:
        return math.hypot(gx, gy) < eff
    # zero inflation: blocked only when the overlap has positive area
    return x0 < obs.x_hi and x1 > obs.x_lo and y0 < obs.y_hi and y1 > obs.y_lo


def _expansion_stop(side: str, box, obs: Obstacle, eff: float):
    """Coordinate where the given side must stop against an inflated obstacle.

    Returns None when the obstacle cannot block that side's expansion.
    `box` is the current (x0, x1, y0, y1).
    """
    x0, x1, y0, y1 = box
    if isinstance(obs, CircleObstacle):
        o_lo_x = o_hi_x = obs.cx
        o_lo_y = o_hi_y = obs.cy
        pad = obs.radius + eff
        hard = False  # circle blocks by Euclidean distance only
    else:
        o_lo_x, o_hi_x = obs.x_lo, obs.x_hi
        o_lo_y, o_hi_y = obs.y_lo, obs.y_hi
        pad = eff
        hard = eff == 0.0  # uninflated rectangle blocks on open overlap

    if side in ("x_min", "x_max"):
        gap_perp = _interval_gap(y0, y1, o_lo_y, o_hi_y)
        overlap_perp = y0 < o_hi_y and y1 > o_lo_y
    else:
        gap_perp = _interval_gap(x0, x1, o_lo_x, o_hi_x)
        overlap_perp = x0 < o_hi_x and x1 > o_lo_x

    if hard:
        if not overlap_perp:
            return None
        reach = 0.0
    else:
        if gap_perp >= pad:
            return None
        reach = math.sqrt(pad * pad - gap_perp * gap_perp)

    if side == "x_min":
        if o_lo_x - reach >= x1:  # entirely to the right
            return None
        return o_hi_x + reach
    if side == "x_max":
        if o_hi_x + reach <= x0:  # entirely to the left
            return None
        return o_lo_x - reach
    if side == "y_min":
        if o_lo_y - reach >= y1:
            return None
        return o_hi_y + reach
    if o_hi_y + reach <= y0:
        return None
    return o_lo_y - reach


def compute_corridor(a, b, world: WorldMap, inflate: float = 0.0) -> Corridor:
    """Grow the sailing corridor for the segment with endpoints a and b.

    Seeds with the bounding box of {a, b} expanded by `inflate` (+ margin),
    then greedily pushes each side (x_min, x_max, y_min, y_max, round-robin)
    out to the nearest inflated obstacle edge or map boundary.  Raises
    `SeedBoxBlocked` when the seed box already overlaps an inflated obstacle,
    which signals waypoints too close to obstacles; the caller should re-plan
    or shrink the inflation.
    """
    eff = inflate + world.margin
    x0 = min(a[0], b[0]) - eff
    x1 = max(a[0], b[0]) + eff
    y0 = min(a[1], b[1]) - eff
    y1 = max(a[1], b[1]) + eff
    x0 = max(x0, world.x_bounds[0])
    x1 = min(x1, world.x_bounds[1])
    y0 = max(y0, world.y_bounds[0])
    y1 = min(y1, world.y_bounds[1])

    for obs in world.obstacles:
        if _box_blocked(x0, x1, y0, y1, obs, eff):
            raise SeedBoxBlocked(
                f"seed box [{x0:.3f}, {x1:.3f}]x[{y0:.3f}, {y1:.3f}] overlaps an "
                f"obstacle inflated by {eff:.3f} m")

    changed = True
    while changed:
        changed = False
        for side in ("x_min", "x_max", "y_min", "y_max"):
            box = (x0, x1, y0, y1)
            stops = [_expansion_stop(side, box, o, eff) for o in world.obstacles]
            stops = [s for s in stops if s is not None]
            if side == "x_min":
                new = max([world.x_bounds[0]] + stops)
                new = min(new, x0)
                changed |= new < x0
                x0 = new
            elif side == "x_max":
                new = min([world.x_bounds[1]] + stops)
                new = max(new, x1)
                changed |= new > x1
                x1 = new
            elif side == "y_min":
                new = max([world.y_bounds[0]] + stops)
                new = min(new, y0)
                changed |= new < y0
                y0 = new
            else:
                new = min([world.y_bounds[1]] + stops)
                new = max(new, y1)
                changed |= new > y1
                y1 = new

    return Corridor(x_min=x0, x_max=x1, y_min=y0, y_max=y1)
