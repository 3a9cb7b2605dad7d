"""Augmented-Lagrangian solver for smooth NLPs with equalities and box bounds.

Problems are objects exposing

    lower, upper                      box bounds (+-inf allowed)
    objective_and_gradient(z)         -> (float, (n,))
    constraints_and_jacobian(z)       -> ((m,), (m, n)) equality residuals c(z) = 0
    inequalities_and_jacobian(z)      optional, -> ((p,), (p, n)) one-sided g(z) <= 0

The outer loop minimizes the augmented Lagrangian

    f(z) + lam.c + (rho/2)|c|^2 + sum_i (max(0, mu_i + rho g_i)^2 - mu_i^2) / (2 rho)

over the box with a projected limited-memory BFGS inner solver (backtracking
line search, sufficient-decrease constant 1e-4, step halving, 40 trials), then
updates the multipliers lam <- lam + rho c, mu <- max(0, mu + rho g) and grows
rho by `penalty_growth` whenever the violation fails to shrink by a factor of
4.  The quasi-Newton memory (10 pairs) lives inside one inner solve, so it is
implicitly reset whenever the penalty changes.

Problems may expose an optional `x_scale` attribute (positive per-variable
characteristic magnitudes); the solver then works in scaled variables
z / x_scale, which conditions the quasi-Newton updates, and reports the
projected gradient in the scaled space.

Everything is plain single-threaded numpy, so identical inputs produce a
bitwise-identical iterate sequence.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

_ARMIJO = 1e-4
_BACKTRACK = 0.5
_MAX_TRIALS = 40
_MEMORY = 10


class SolverStatus(enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    DIVERGED = "diverged"


@dataclass
class SolverConfig:
    max_outer_iterations: int = 30
    max_inner_iterations: int = 400
    constraint_tolerance: float = 1e-6
    optimality_tolerance: float = 1e-5
    initial_penalty: float = 10.0
    penalty_growth: float = 10.0
    max_penalty: float = 1e8

    def __post_init__(self):
        if self.constraint_tolerance <= 0 or self.optimality_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.penalty_growth <= 1:
            raise ValueError("penalty_growth must exceed 1")


@dataclass
class Solution:
    z: np.ndarray
    objective: float
    max_constraint_violation: float
    status: SolverStatus
    outer_iterations: int = 0
    inner_iterations: int = 0
    projected_gradient: float = np.inf
    outer_violations: list = field(default_factory=list)
    outer_penalties: list = field(default_factory=list)


def _projected_gradient_norm(z, grad, lower, upper) -> float:
    return float(np.abs(z - np.clip(z - grad, lower, upper)).max(initial=0.0))


class _LBFGS:
    """Two-loop recursion over at most `_MEMORY` curvature pairs.

    `h0` is a diagonal seed for the inverse Hessian (a Gauss-Newton style
    preconditioner); without stored pairs the direction is -h0 * grad.
    """

    def __init__(self, h0=None):
        self.s: list[np.ndarray] = []
        self.y: list[np.ndarray] = []
        self.h0 = h0

    def push(self, s, y):
        sy = float(s @ y)
        if sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(y):
            self.s.append(s)
            self.y.append(y)
            if len(self.s) > _MEMORY:
                self.s.pop(0)
                self.y.pop(0)

    def direction(self, grad):
        q = -grad.copy()
        h0 = self.h0 if self.h0 is not None else 1.0
        if not self.s:
            return h0 * q
        alphas = []
        for s, y in zip(reversed(self.s), reversed(self.y)):
            a = (s @ q) / (s @ y)
            q -= a * y
            alphas.append(a)
        gamma = (self.s[-1] @ self.y[-1]) / (self.y[-1] @ (h0 * self.y[-1]))
        q = gamma * (h0 * q)
        for (s, y), a in zip(zip(self.s, self.y), reversed(alphas)):
            b = (y @ q) / (s @ y)
            q += (a - b) * s
        return q


def _active_mask(z, grad, lower, upper):
    """Variables pinned at a bound with the gradient pushing further out."""
    eps = 1e-12
    return ((z <= lower + eps) & (grad > 0.0)) | ((z >= upper - eps) & (grad < 0.0))


def _inner_minimize(eval_fg, z, lower, upper, tol, max_iters, h0=None):
    """Projected L-BFGS descent on the augmented Lagrangian over the box.

    The quasi-Newton direction is built in the subspace of free variables
    (active bounds masked out), which keeps the curvature pairs meaningful
    when the iterate sits on the box.
    """
    f, grad = eval_fg(z)
    if not (np.isfinite(f) and np.all(np.isfinite(grad))):
        return z, f, grad, np.inf, 0, False
    lbfgs = _LBFGS(h0)
    iters = 0
    while iters < max_iters:
        pg = _projected_gradient_norm(z, grad, lower, upper)
        if pg <= tol:
            break
        active = _active_mask(z, grad, lower, upper)
        g_free = np.where(active, 0.0, grad)
        d = lbfgs.direction(g_free)
        d[active] = 0.0
        if d @ g_free >= -1e-16 * float(np.linalg.norm(d) * np.linalg.norm(g_free)):
            d = -g_free
        if not np.any(d):
            d = -grad  # every variable active: follow the projected gradient
        alpha = 1.0
        accepted = False
        for _ in range(_MAX_TRIALS):
            z_new = np.clip(z + alpha * d, lower, upper)
            step = z_new - z
            slope = float(grad @ step)
            if np.any(step):
                f_new, grad_new = eval_fg(z_new)
                decrease_ok = (f_new <= f + _ARMIJO * slope if slope < 0.0
                               else f_new < f)
                if np.isfinite(f_new) and decrease_ok:
                    accepted = True
                    break
            alpha *= _BACKTRACK
        if not accepted:
            break
        if not np.all(np.isfinite(grad_new)):
            return z_new, f_new, grad_new, np.inf, iters + 1, False
        lbfgs.push(z_new - z, grad_new - grad)
        z, f, grad = z_new, f_new, grad_new
        iters += 1
    pg = _projected_gradient_norm(z, grad, lower, upper)
    return z, f, grad, pg, iters, True


def minimize(nlp, z0, config: SolverConfig | None = None) -> Solution:
    """Solve the boxed, equality/one-sided constrained NLP from z0."""
    config = config or SolverConfig()
    scale = np.asarray(getattr(nlp, "x_scale", 1.0), dtype=float)
    scale = np.broadcast_to(scale, np.shape(nlp.lower)).astype(float)
    lower = np.asarray(nlp.lower, dtype=float) / scale
    upper = np.asarray(nlp.upper, dtype=float) / scale
    z = np.clip(np.asarray(z0, dtype=float) / scale, lower, upper)
    n = z.size

    has_ineq = hasattr(nlp, "inequalities_and_jacobian")
    c0, _ = nlp.constraints_and_jacobian(z * scale)
    m = c0.size
    if has_ineq:
        g0, _ = nlp.inequalities_and_jacobian(z * scale)
        p = g0.size
    else:
        p = 0

    lam = np.zeros(m)
    mu = np.zeros(p)
    rho = config.initial_penalty

    def eval_al(w):
        x = w * scale
        f, grad = nlp.objective_and_gradient(x)
        val = f
        grad = grad.astype(float, copy=True)
        if m:
            c, J = nlp.constraints_and_jacobian(x)
            val += float(lam @ c) + 0.5 * rho * float(c @ c)
            grad += J.T @ (lam + rho * c)
        if p:
            g, Jg = nlp.inequalities_and_jacobian(x)
            active = np.maximum(0.0, mu + rho * g)
            val += float(active @ active - mu @ mu) / (2.0 * rho)
            grad += Jg.T @ active
        return val, grad * scale

    def violation(w):
        x = w * scale
        viol = 0.0
        if m:
            viol = float(np.abs(nlp.constraints_and_jacobian(x)[0]).max())
        if p:
            g = nlp.inequalities_and_jacobian(x)[0]
            viol = max(viol, float(np.maximum(0.0, g).max(initial=0.0)))
        return viol

    constrained = m + p > 0
    inner_floor = 0.3 * config.optimality_tolerance
    inner_tol = 1e-2 if constrained else inner_floor
    prev_viol = np.inf
    best = None  # (scaled violation, objective, z, viol, pg)
    total_inner = 0
    sol = Solution(z=z.copy(), objective=np.inf, max_constraint_violation=np.inf,
                   status=SolverStatus.MAX_ITERATIONS)

    for outer in range(1, config.max_outer_iterations + 1):
        z, f_al, grad, pg, nit, healthy = _inner_minimize(
            eval_al, z, lower, upper, inner_tol, config.max_inner_iterations)
        total_inner += nit
        if not healthy or not np.all(np.isfinite(z)):
            sol.z = z * scale
            sol.status = SolverStatus.DIVERGED
            sol.outer_iterations = outer
            sol.inner_iterations = total_inner
            return sol

        f_obj = nlp.objective_and_gradient(z * scale)[0]
        viol = violation(z)
        sol.outer_violations.append(viol)
        sol.outer_penalties.append(rho)

        over = max(viol - config.constraint_tolerance, 0.0)
        if best is None or (over, f_obj) < (best[0], best[1]):
            best = (over, f_obj, (z * scale).copy(), viol, pg)

        if viol <= config.constraint_tolerance and pg <= config.optimality_tolerance:
            sol.z = z * scale
            sol.objective = f_obj
            sol.max_constraint_violation = viol
            sol.status = SolverStatus.CONVERGED
            sol.outer_iterations = outer
            sol.inner_iterations = total_inner
            sol.projected_gradient = pg
            return sol

        if m:
            c = nlp.constraints_and_jacobian(z * scale)[0]
            lam = lam + rho * c
        if p:
            g = nlp.inequalities_and_jacobian(z * scale)[0]
            mu = np.maximum(0.0, mu + rho * g)
        # growth forces feasibility; once within tolerance it would only
        # ill-condition the inner problem, so it stops there
        if constrained and viol > config.constraint_tolerance and viol > 0.25 * prev_viol:
            rho = min(rho * config.penalty_growth, config.max_penalty)
        prev_viol = min(viol, prev_viol)
        # tie the inner accuracy to the current feasibility level so multiplier
        # updates act on meaningful residuals
        inner_tol = max(inner_floor, min(0.2 * inner_tol, 0.5 * viol))

    _, f_best, z_best, viol_best, pg_best = best
    sol.z = z_best
    sol.objective = f_best
    sol.max_constraint_violation = viol_best
    sol.projected_gradient = pg_best
    sol.status = SolverStatus.MAX_ITERATIONS
    sol.outer_iterations = config.max_outer_iterations
    sol.inner_iterations = total_inner
    return sol
