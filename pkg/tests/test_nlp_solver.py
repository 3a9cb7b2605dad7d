import math
import time

import numpy as np
import pytest

from asvplan.nlp_solver import Solution, SolverConfig, SolverStatus, minimize


class Box:
    """Minimal NLP wrapper used by the analytic battery."""

    def __init__(self, n, objective, lower=None, upper=None, eq=None, ineq=None):
        self.n = n
        self.lower = np.full(n, -np.inf) if lower is None else np.asarray(lower, float)
        self.upper = np.full(n, np.inf) if upper is None else np.asarray(upper, float)
        self._objective = objective
        self._eq = eq
        if ineq is not None:
            self.inequalities_and_jacobian = lambda z: ineq(z)

    def objective_and_gradient(self, z):
        return self._objective(z)

    def constraints_and_jacobian(self, z):
        if self._eq is None:
            return np.zeros(0), np.zeros((0, self.n))
        return self._eq(z)


def quadratic_1d():
    return Box(1, lambda z: ((z[0] - 3.0) ** 2, np.array([2.0 * (z[0] - 3.0)])))


def test_unconstrained_quadratic():
    sol = minimize(quadratic_1d(), np.zeros(1))
    assert sol.status is SolverStatus.CONVERGED
    assert sol.z[0] == pytest.approx(3.0, abs=1e-6)


def test_equality_constrained_quadratic():
    prob = Box(
        2,
        lambda z: (float(z @ z), 2.0 * z),
        eq=lambda z: (np.array([z[0] + z[1] - 1.0]), np.array([[1.0, 1.0]])),
    )
    sol = minimize(prob, np.zeros(2))
    assert sol.status is SolverStatus.CONVERGED
    np.testing.assert_allclose(sol.z, [0.5, 0.5], atol=1e-5)
    assert sol.max_constraint_violation <= 1e-6


def test_active_box_bound():
    prob = Box(1, lambda z: ((z[0] - 2.0) ** 2, np.array([2.0 * (z[0] - 2.0)])),
               lower=[0.0], upper=[1.0])
    sol = minimize(prob, np.array([0.2]))
    assert sol.status is SolverStatus.CONVERGED
    assert sol.z[0] == pytest.approx(1.0, abs=1e-9)


def _battery():
    """Analytic problems with hand-derived optima: (problem, z0, f_star)."""
    problems = []

    problems.append(("paraboloid", quadratic_1d(), np.zeros(1), 0.0))

    problems.append((
        "eq_quadratic",
        Box(2, lambda z: (float(z @ z), 2.0 * z),
            eq=lambda z: (np.array([z[0] + z[1] - 1.0]), np.array([[1.0, 1.0]]))),
        np.zeros(2), 0.5))

    problems.append((
        "boxed_paraboloid",
        Box(1, lambda z: ((z[0] - 2.0) ** 2, np.array([2.0 * (z[0] - 2.0)])),
            lower=[0.0], upper=[1.0]),
        np.array([0.5]), 1.0))

    problems.append((
        "quartic_bowl",
        Box(2, lambda z: ((z[0] - 1.0) ** 4 + (z[1] + 2.0) ** 2,
                          np.array([4.0 * (z[0] - 1.0) ** 3, 2.0 * (z[1] + 2.0)]))),
        np.zeros(2), 0.0))

    problems.append((
        "plane_projection",
        Box(3, lambda z: (0.5 * float(z @ z), z.copy()),
            eq=lambda z: (np.array([z.sum() - 3.0]), np.ones((1, 3)))),
        np.zeros(3), 1.5))

    problems.append((
        "circle_constraint",
        Box(2, lambda z: ((z[0] - 1.0) ** 2 + (z[1] - 1.0) ** 2,
                          np.array([2.0 * (z[0] - 1.0), 2.0 * (z[1] - 1.0)])),
            eq=lambda z: (np.array([z[0] ** 2 + z[1] ** 2 - 1.0]),
                          np.array([[2.0 * z[0], 2.0 * z[1]]]))),
        np.array([1.0, 0.2]), 3.0 - 2.0 * math.sqrt(2.0)))

    problems.append((
        "boxed_equality",
        Box(2, lambda z: (float(z @ z), 2.0 * z),
            lower=[1.0, 0.0], upper=[3.0, 3.0],
            eq=lambda z: (np.array([z[0] + 2.0 * z[1] - 4.0]),
                          np.array([[1.0, 2.0]]))),
        np.array([2.0, 1.0]), 3.25))

    problems.append((
        "quartic_equality",
        Box(2, lambda z: (z[0] ** 4 + z[1] ** 4,
                          np.array([4.0 * z[0] ** 3, 4.0 * z[1] ** 3])),
            eq=lambda z: (np.array([z[0] + z[1] - 2.0]), np.array([[1.0, 1.0]]))),
        np.array([2.0, 0.0]), 2.0))

    problems.append((
        "two_planes",
        Box(3, lambda z: (z[0] ** 2 + 2.0 * z[1] ** 2 + 3.0 * z[2] ** 2,
                          np.array([2.0 * z[0], 4.0 * z[1], 6.0 * z[2]])),
            eq=lambda z: (np.array([z[0] + z[1] - 1.0, z[1] + z[2] - 1.0]),
                          np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]]))),
        np.zeros(3), 4.0 / 3.0))

    problems.append((
        "boxed_quartic",
        Box(1, lambda z: ((z[0] + 1.0) ** 4, np.array([4.0 * (z[0] + 1.0) ** 3])),
            lower=[0.0], upper=[2.0]),
        np.array([1.5]), 1.0))

    problems.append((
        "halfspace",
        Box(2, lambda z: (float(z @ z), 2.0 * z),
            ineq=lambda z: (np.array([2.0 - z[0] - z[1]]),
                            np.array([[-1.0, -1.0]]))),
        np.zeros(2), 2.0))

    return problems


@pytest.mark.parametrize("name,prob,z0,f_star",
                         _battery(), ids=[p[0] for p in _battery()])
def test_analytic_battery(name, prob, z0, f_star):
    start = time.perf_counter()
    sol = minimize(prob, z0)
    elapsed = time.perf_counter() - start
    assert sol.status is SolverStatus.CONVERGED, f"{name}: {sol.status}"
    assert abs(sol.objective - f_star) <= 1e-5, f"{name}: objective off"
    assert sol.max_constraint_violation <= 1e-6, f"{name}: infeasible"
    assert elapsed <= 1.0, f"{name}: too slow ({elapsed:.2f} s)"


def test_converged_implies_feasible():
    for _, prob, z0, _ in _battery():
        sol = minimize(prob, z0)
        if sol.status is SolverStatus.CONVERGED:
            assert sol.max_constraint_violation <= 1e-6


def test_determinism_bitwise():
    prob_a = _battery()[5][1]
    prob_b = _battery()[5][1]
    z0 = np.array([1.0, 0.2])
    sol_a = minimize(prob_a, z0)
    sol_b = minimize(prob_b, z0)
    np.testing.assert_array_equal(sol_a.z, sol_b.z)
    assert sol_a.objective == sol_b.objective
    assert sol_a.outer_violations == sol_b.outer_violations


def test_monotone_outer_progress():
    # above the feasibility tolerance the violation shrinks or the penalty grows
    _, prob, z0, _ = _battery()[5]
    sol = minimize(prob, z0)
    viols = sol.outer_violations
    rhos = sol.outer_penalties
    ctol = SolverConfig().constraint_tolerance
    for j in range(1, len(viols)):
        assert (viols[j] <= max(viols[j - 1], ctol) + 1e-12
                or rhos[j] > rhos[j - 1])


def test_initial_point_clipped_into_box():
    prob = Box(1, lambda z: ((z[0] - 2.0) ** 2, np.array([2.0 * (z[0] - 2.0)])),
               lower=[0.0], upper=[1.0])
    sol = minimize(prob, np.array([50.0]))
    assert sol.z[0] == pytest.approx(1.0, abs=1e-9)


def test_diverged_on_nan_objective():
    prob = Box(1, lambda z: (float("nan"), np.array([float("nan")])))
    sol = minimize(prob, np.zeros(1))
    assert sol.status is SolverStatus.DIVERGED


def test_max_iterations_returns_best_iterate():
    _, prob, z0, _ = _battery()[8]
    sol = minimize(prob, z0, SolverConfig(max_outer_iterations=1,
                                          max_inner_iterations=3))
    assert sol.status is SolverStatus.MAX_ITERATIONS
    assert np.all(np.isfinite(sol.z))


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(constraint_tolerance=0.0)
    with pytest.raises(ValueError):
        SolverConfig(penalty_growth=1.0)
