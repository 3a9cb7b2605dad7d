"""Trapezoidal direct collocation of one sub-trajectory.

The decision vector is z = [t, x_1..x_K, tau_1..tau_K] with node states
x_k = (x, y, psi, u, v, r) and controls tau_k = (tau_u, tau_r), so
len(z) = 1 + 8K.  Nodes are uniformly spaced, h = t / (K - 1).

The NLP couples

  * defect equalities  x_{k+1} - x_k - (h/2) (f_k + f_{k+1}) = 0  with f the
    vessel ODE right-hand side,
  * box bounds carrying the velocity/heading/control limits, the sailing
    corridor on every node position, t in [t_floor, t_max], and the boundary
    pins (start pose/velocity/control, and either the waypoint position or
    the full rest state at the end) expressed as equal lower/upper bounds,
  * one-sided constraints keeping the derived acceleration a(x_k, tau_k)
    within its bounds at every node, and
  * a trapezoidal quadrature of |tau|^2 + w t^2 (minimum control input) or
    |nu_dot|^2 + w t^2 (minimum acceleration).

All derivatives are analytic; `eval_objective_and_gradient` and
`eval_constraints_and_jacobian` are validated against central finite
differences by the test suite.  Evaluations are pure functions of (nlp, z).

Decoding a solution yields a control spline that is piecewise linear in time
and a state spline that is the exact integral of the linearly interpolated
node derivatives: quadratic in time inside each interval and equal to the
node values at the nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    ControlInput,
    Pose,
    VesselParams,
    acceleration_array,
    acceleration_jacobians,
    derivative_jacobians,
    state_derivative_array,
)
from .world import Corridor

T_FLOOR = 1e-2  # smallest admissible segment duration [s]


class InfeasibleBox(Exception):
    """A pinned boundary value violates the box bounds."""


class NonFiniteEvaluation(Exception):
    """An NLP evaluation produced a non-finite intermediate."""


@dataclass(frozen=True)
class MinControlInput:
    """Fuel-saving objective: integral of |tau|^2 + weight * t^2."""

    weight: float = 1.0

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("objective weight must be non-negative")


@dataclass(frozen=True)
class MinAcceleration:
    """Smoothness objective: integral of |nu_dot|^2 + weight * t^2."""

    weight: float = 1.0

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("objective weight must be non-negative")


ObjectiveKind = MinControlInput | MinAcceleration


@dataclass(frozen=True)
class BoundSet:
    """Segment limits: duration, velocity, acceleration, control and heading."""

    t_max: float = 35.0
    vel_lo: tuple[float, float, float] = (-0.1, -1.0, -math.pi / 6)
    vel_hi: tuple[float, float, float] = (1.7, 1.0, math.pi / 6)
    acc_lo: tuple[float, float, float] = (-1.0, -1.0, -0.5)
    acc_hi: tuple[float, float, float] = (1.0, 1.0, 0.5)
    tau_lo: tuple[float, float] = (-40.0, -15.0)
    tau_hi: tuple[float, float] = (40.0, 15.0)
    psi_lo: float = -math.pi
    psi_hi: float = math.pi

    def __post_init__(self):
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")
        for lo, hi in ((self.vel_lo, self.vel_hi), (self.acc_lo, self.acc_hi),
                       (self.tau_lo, self.tau_hi)):
            if any(a > b for a, b in zip(lo, hi)):
                raise ValueError("lower bounds must not exceed upper bounds")
        if self.psi_lo > self.psi_hi:
            raise ValueError("heading bounds are inverted")


@dataclass(frozen=True)
class WaypointEnd:
    """Terminal condition pinning only the (x, y) position."""

    x: float
    y: float


@dataclass(frozen=True)
class FullStateEnd:
    """Terminal condition pinning the pose and zero velocity/acceleration."""

    pose: Pose


@dataclass(frozen=True)
class SegmentProblem:
    start_pose: Pose
    start_vel: tuple[float, float, float]
    start_control: tuple[float, float]
    end: WaypointEnd | FullStateEnd
    corridor: Corridor
    bounds: BoundSet
    objective: ObjectiveKind
    nodes: int
    params: VesselParams

    def __post_init__(self):
        if self.nodes < 3:
            raise ValueError("at least 3 collocation nodes are required")
        if not self.corridor.contains((self.start_pose.x, self.start_pose.y),
                                      tol=1e-9):
            raise ValueError("start position lies outside the corridor")
        end_xy = ((self.end.x, self.end.y) if isinstance(self.end, WaypointEnd)
                  else (self.end.pose.x, self.end.pose.y))
        if not self.corridor.contains(end_xy, tol=1e-9):
            raise ValueError("end position lies outside the corridor")


def _unpack(z: np.ndarray, K: int):
    t = float(z[0])
    X = z[1:1 + 6 * K].reshape(K, 6)
    U = z[1 + 6 * K:1 + 8 * K].reshape(K, 2)
    return t, X, U


class SegmentNLP:
    """Objective, defects, acceleration inequalities and box bounds."""

    def __init__(self, problem: SegmentProblem):
        self.problem = problem
        K = problem.nodes
        self.K = K
        self.n = 1 + 8 * K
        b = problem.bounds
        corr = problem.corridor

        lower = np.empty(self.n)
        upper = np.empty(self.n)
        lower[0], upper[0] = T_FLOOR, b.t_max
        xl = np.tile([corr.x_min, corr.y_min, b.psi_lo, *b.vel_lo], K)
        xu = np.tile([corr.x_max, corr.y_max, b.psi_hi, *b.vel_hi], K)
        lower[1:1 + 6 * K], upper[1:1 + 6 * K] = xl, xu
        lower[1 + 6 * K:] = np.tile(b.tau_lo, K)
        upper[1 + 6 * K:] = np.tile(b.tau_hi, K)
        self.lower, self.upper = lower, upper

        sp = problem.start_pose
        self._pin_state(0, [sp.x, sp.y, sp.psi, *problem.start_vel])
        self._pin_control(0, problem.start_control)
        if isinstance(problem.end, WaypointEnd):
            self._pin_state(K - 1, [problem.end.x, problem.end.y], upto=2)
        else:
            ep = problem.end.pose
            self._pin_state(K - 1, [ep.x, ep.y, ep.psi, 0.0, 0.0, 0.0])
            self._pin_control(K - 1, (0.0, 0.0))

        # trapezoid weights; quadrature value = h * (wbar . g)
        wbar = np.ones(K)
        wbar[0] = wbar[-1] = 0.5
        self._wbar = wbar
        self._alpha = 1.0 / (K - 1)

        # characteristic magnitudes so the solver sees comparable variables
        x_scale = np.empty(self.n)
        x_scale[0] = 10.0
        x_scale[1:1 + 6 * K] = np.tile([10.0, 10.0, 1.0, 1.0, 1.0, 0.5], K)
        x_scale[1 + 6 * K:] = np.tile([10.0, 5.0], K)
        self.x_scale = x_scale

    def _pin(self, idx: int, value: float):
        if not (self.lower[idx] - 1e-9 <= value <= self.upper[idx] + 1e-9):
            raise InfeasibleBox(
                f"pinned value {value:.6g} outside box "
                f"[{self.lower[idx]:.6g}, {self.upper[idx]:.6g}] at index {idx}")
        self.lower[idx] = self.upper[idx] = value

    def _pin_state(self, node: int, values, upto: int | None = None):
        base = 1 + 6 * node
        for j, v in enumerate(values[:upto]):
            self._pin(base + j, float(v))

    def _pin_control(self, node: int, values):
        base = 1 + 6 * self.K + 2 * node
        for j, v in enumerate(values):
            self._pin(base + j, float(v))

    # -- solver protocol -------------------------------------------------

    def objective_and_gradient(self, z: np.ndarray):
        K = self.K
        p = self.problem
        t, X, U = _unpack(z, K)
        h = t * self._alpha
        idx = np.arange(K)
        s = idx * h
        lam = p.objective.weight
        wbar = self._wbar

        grad = np.zeros(self.n)
        if isinstance(p.objective, MinControlInput):
            base = (U * U).sum(axis=1)
            grad[1 + 6 * K:] = (2.0 * h * wbar[:, None] * U).ravel()
        else:
            acc = acceleration_array(X, U, p.params)
            base = (acc * acc).sum(axis=1)
            Av, Bt = acceleration_jacobians(X, U, p.params)
            dvel = 2.0 * h * wbar[:, None] * np.einsum("kij,ki->kj", Av, acc)
            dtau = 2.0 * h * wbar[:, None] * np.einsum("kij,ki->kj", Bt, acc)
            gx = grad[1:1 + 6 * K].reshape(K, 6)
            gx[:, 3:] = dvel
            grad[1 + 6 * K:] = dtau.ravel()

        g_nodes = base + lam * s * s
        value = h * float(wbar @ g_nodes)
        grad[0] = self._alpha * (float(wbar @ g_nodes)
                                 + 2.0 * lam * h * float((wbar * s * idx).sum()))
        return value, grad

    def constraints_and_jacobian(self, z: np.ndarray):
        K = self.K
        p = self.problem
        t, X, U = _unpack(z, K)
        h = t * self._alpha
        F = state_derivative_array(X, U, p.params)
        defects = X[1:] - X[:-1] - 0.5 * h * (F[1:] + F[:-1])

        A, B = derivative_jacobians(X, U, p.params)
        m = 6 * (K - 1)
        J = np.zeros((m, self.n))
        J[:, 0] = (-0.5 * self._alpha * (F[1:] + F[:-1])).ravel()
        eye = np.eye(6)
        for k in range(K - 1):
            rows = slice(6 * k, 6 * k + 6)
            J[rows, 1 + 6 * k:7 + 6 * k] = -eye - 0.5 * h * A[k]
            J[rows, 7 + 6 * k:13 + 6 * k] = eye - 0.5 * h * A[k + 1]
            J[rows, 1 + 6 * K + 2 * k:3 + 6 * K + 2 * k] = -0.5 * h * B[k]
            J[rows, 3 + 6 * K + 2 * k:5 + 6 * K + 2 * k] = -0.5 * h * B[k + 1]
        return defects.ravel(), J

    def inequalities_and_jacobian(self, z: np.ndarray):
        K = self.K
        p = self.problem
        _, X, U = _unpack(z, K)
        acc = acceleration_array(X, U, p.params)
        hi = np.asarray(p.bounds.acc_hi)
        lo = np.asarray(p.bounds.acc_lo)
        g = np.concatenate([(acc - hi).ravel(), (lo - acc).ravel()])

        Av, Bt = acceleration_jacobians(X, U, p.params)
        J_upper = np.zeros((3 * K, self.n))
        for k in range(K):
            rows = slice(3 * k, 3 * k + 3)
            J_upper[rows, 4 + 6 * k:7 + 6 * k] = Av[k]
            J_upper[rows, 1 + 6 * K + 2 * k:3 + 6 * K + 2 * k] = Bt[k]
        return g, np.vstack([J_upper, -J_upper])


def build_nlp(problem: SegmentProblem) -> SegmentNLP:
    """Assemble the collocation NLP for one segment.

    Raises `InfeasibleBox` when a pinned boundary value violates the box
    bounds (inconsistent scenario).
    """
    return SegmentNLP(problem)


def _check_z(nlp: SegmentNLP, z: np.ndarray):
    z = np.asarray(z, dtype=float)
    if z.shape != (nlp.n,):
        raise ValueError(f"decision vector must have length {nlp.n}")
    if z[0] <= 0:
        raise ValueError("segment duration must be positive")
    return z


def eval_objective_and_gradient(nlp: SegmentNLP, z) -> tuple[float, np.ndarray]:
    """Objective value and exact analytic gradient at z."""
    z = _check_z(nlp, z)
    value, grad = nlp.objective_and_gradient(z)
    if not (np.isfinite(value) and np.all(np.isfinite(grad))):
        raise NonFiniteEvaluation("objective evaluation is not finite")
    return value, grad


def eval_constraints_and_jacobian(nlp: SegmentNLP, z) -> tuple[np.ndarray, np.ndarray]:
    """Defect residuals and exact analytic Jacobian at z."""
    z = _check_z(nlp, z)
    c, J = nlp.constraints_and_jacobian(z)
    if not (np.all(np.isfinite(c)) and np.all(np.isfinite(J))):
        raise NonFiniteEvaluation("constraint evaluation is not finite")
    return c, J


@dataclass
class SegmentTrajectory:
    """One optimized sub-trajectory with spline evaluators.

    The control is linear between nodes; the state inside interval k is the
    integral of that linear derivative spline,

        x(s_k + e) = x_k + e f_k + e^2 / (2h) (f_{k+1} - f_k),

    which is quadratic in time and matches the node values at the nodes.
    """

    duration: float
    states: np.ndarray    # (K, 6) node states
    controls: np.ndarray  # (K, 2) node controls
    params: VesselParams

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float)
        self.controls = np.asarray(self.controls, dtype=float)
        K = self.states.shape[0]
        self._h = self.duration / (K - 1)
        self._times = np.arange(K) * self._h
        self._F = state_derivative_array(self.states, self.controls, self.params)

    @property
    def times(self) -> np.ndarray:
        return self._times

    def state_at(self, s) -> np.ndarray:
        """State spline at time(s) s in [0, duration]; exact at node times."""
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        K = self.states.shape[0]
        h = self._h
        pos = np.clip(s_arr / h, 0.0, K - 1)
        k = np.minimum(pos.astype(int), K - 2)
        frac = pos - k
        e = frac * h
        out = (self.states[k]
               + e[:, None] * self._F[k]
               + (e * e / (2.0 * h))[:, None] * (self._F[k + 1] - self._F[k]))
        # snap queries that fall on a node (within fp noise) to the node value
        rounded = np.rint(pos)
        at_node = np.abs(pos - rounded) < 1e-9
        out[at_node] = self.states[rounded[at_node].astype(int)]
        return out if np.ndim(s) else out[0]

    def control_at(self, s) -> np.ndarray:
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        s_arr = np.clip(s_arr, 0.0, self.duration)
        out = np.column_stack([
            np.interp(s_arr, self._times, self.controls[:, 0]),
            np.interp(s_arr, self._times, self.controls[:, 1]),
        ])
        return out if np.ndim(s) else out[0]

    def acceleration_at(self, s) -> np.ndarray:
        states = np.atleast_2d(self.state_at(s))
        controls = np.atleast_2d(self.control_at(s))
        out = acceleration_array(states, controls, self.params)
        return out if np.ndim(s) else out[0]

    def sample(self, n: int):
        """(times, states, controls) at n uniformly spaced times."""
        ts = np.linspace(0.0, self.duration, n)
        return ts, self.state_at(ts), self.control_at(ts)


def decode(problem: SegmentProblem, z) -> SegmentTrajectory:
    """Turn a (defect-feasible) decision vector into spline evaluators."""
    z = np.asarray(z, dtype=float)
    t, X, U = _unpack(z, problem.nodes)
    return SegmentTrajectory(duration=t, states=X.copy(), controls=U.copy(),
                             params=problem.params)
