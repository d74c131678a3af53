from itertools import combinations

import numpy as np
import pytest

from src.errors import QpBuildError
import src.mpc.solver as solver_module
from src.mpc import (
    KKT_FAILED,
    MAX_ITERATIONS,
    OPTIMAL,
    KktReport,
    QpProblem,
    dump_qp,
    kkt_residuals,
    load_qp,
    solve_qp,
)


def random_qp(rng, n, m):
    M = rng.normal(size=(n, n))
    P = M @ M.T + 0.5 * np.eye(n)
    g = rng.normal(size=n) * 3.0
    G = rng.normal(size=(m, n))
    x_feasible = rng.normal(size=n)
    h = G @ x_feasible + rng.uniform(0.0, 1.0, m)
    return QpProblem(P=P, g=g, G=G, h=h)


def brute_force(qp):
    """Enumerate active sets; the KKT point of a strictly convex QP is unique."""
    n, m = qp.n, qp.m_ineq
    best = None
    for size in range(0, min(n, m) + 1):
        for active in combinations(range(m), size):
            active = list(active)
            Ga = qp.G[active]
            K = np.block([[qp.P, Ga.T], [Ga, np.zeros((size, size))]])
            rhs = np.concatenate((-qp.g, qp.h[active]))
            try:
                sol = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError:
                continue
            x, lam = sol[:n], sol[n:]
            if np.any(qp.G @ x - qp.h > 1e-9) or np.any(lam < -1e-9):
                continue
            value = qp.objective(x)
            if best is None or value < best[1]:
                best = (x, value)
    return best[0]


class TestSolverOracle:
    def test_matches_active_set_enumeration(self):
        rng = np.random.default_rng(2024)
        for _ in range(200):
            n = int(rng.integers(1, 7))
            m = int(rng.integers(0, 7))
            qp = random_qp(rng, n, m)
            solution = solve_qp(qp)
            assert solution.status == OPTIMAL
            np.testing.assert_allclose(solution.x, brute_force(qp), atol=1e-8, rtol=0)
            assert solution.kkt.satisfied()


class TestSolver:
    def test_unconstrained(self):
        P = np.diag([2.0, 4.0])
        g = np.array([-2.0, -4.0])
        solution = solve_qp(QpProblem(P=P, g=g, G=np.zeros((0, 2)), h=np.zeros(0)))
        np.testing.assert_allclose(solution.x, [1.0, 1.0])
        assert solution.objective == pytest.approx(-3.0)

    def test_equality_constraints(self):
        # min x1^2 + x2^2 + x3^2  s.t.  x1 + x2 + x3 = 3, x3 <= 0.5
        qp = QpProblem(
            P=2.0 * np.eye(3),
            g=np.zeros(3),
            G=np.array([[0.0, 0.0, 1.0]]),
            h=np.array([0.5]),
            A_eq=np.ones((1, 3)),
            b_eq=np.array([3.0]),
        )
        solution = solve_qp(qp)
        assert solution.optimal
        np.testing.assert_allclose(solution.x, [1.25, 1.25, 0.5], atol=1e-9)
        assert solution.lam[0] == pytest.approx(1.5, abs=1e-7)
        assert solution.nu[0] == pytest.approx(-2.5, abs=1e-7)
        assert solution.kkt.satisfied()

    def test_warm_start_does_not_change_optimum(self):
        rng = np.random.default_rng(5)
        qp = random_qp(rng, 5, 6)
        cold = solve_qp(qp)
        warm = solve_qp(qp, warm_start=cold.x + 0.3)
        np.testing.assert_allclose(warm.x, cold.x, atol=1e-8)

    def test_iteration_cap_reports_status(self):
        rng = np.random.default_rng(7)
        qp = random_qp(rng, 6, 6)
        solution = solve_qp(qp, max_iterations=1)
        assert solution.status == MAX_ITERATIONS
        assert not solution.optimal

    def test_kkt_report_flags_wrong_point(self):
        qp = QpProblem(P=np.eye(1), g=np.array([-1.0]), G=np.array([[1.0]]), h=np.array([0.0]))
        good = kkt_residuals(qp, np.array([0.0]), np.array([1.0]), np.zeros(0))
        bad = kkt_residuals(qp, np.array([0.5]), np.array([0.0]), np.zeros(0))
        assert good.satisfied()
        assert not bad.satisfied()
        assert bad.primal > 0.0


    def test_repeated_solves_are_bit_identical(self):
        rng = np.random.default_rng(11)
        qp = random_qp(rng, 6, 6)
        first = solve_qp(qp)
        second = solve_qp(qp)
        np.testing.assert_array_equal(first.x, second.x)
        np.testing.assert_array_equal(first.lam, second.lam)
        assert first.iterations == second.iterations

    def test_failed_audit_is_not_optimal(self, monkeypatch):
        failing = KktReport(primal=1e-3, stationarity=0.0, complementarity=0.0, dual=0.0)
        monkeypatch.setattr(solver_module, "kkt_residuals", lambda *args: failing)
        rng = np.random.default_rng(7)
        solution = solve_qp(random_qp(rng, 4, 4))
        assert solution.status == KKT_FAILED
        assert not solution.optimal


def bounded_qp(rng, n, m_random, convex_rank=None, box=10.0):
    """Random feasible QP with a box on every variable; P is rank-deficient when convex_rank < n."""
    M = rng.normal(size=(n, convex_rank or n))
    P = M @ M.T + (0.0 if convex_rank else 0.5) * np.eye(n)
    G = np.vstack((rng.normal(size=(m_random, n)), np.eye(n), -np.eye(n)))
    x_feasible = rng.uniform(-0.5 * box, 0.5 * box, n)
    h = np.concatenate((
        G[:m_random] @ x_feasible + rng.uniform(0.0, 1.0, m_random),
        np.full(2 * n, box),
    ))
    return QpProblem(P=P, g=rng.normal(size=n) * 5.0, G=G, h=h)


class TestSolverRobustness:
    def test_strictly_convex_problems_with_many_rows(self):
        rng = np.random.default_rng(2801)
        for _ in range(200):
            solution = solve_qp(bounded_qp(rng, 5, 22))
            assert solution.status == OPTIMAL
            assert np.all(np.isfinite(solution.x))
            assert solution.kkt.satisfied()

    def test_iterates_stay_finite_on_degenerate_problems(self):
        rng = np.random.default_rng(3000)
        for _ in range(300):
            n = int(rng.integers(2, 6))
            qp = bounded_qp(rng, n, 32 - 2 * n, convex_rank=int(rng.integers(1, n)))
            solution = solve_qp(qp)
            assert np.all(np.isfinite(solution.x))
            assert np.all(np.isfinite(solution.lam))
            assert np.isfinite(solution.objective)
            if solution.optimal:
                assert solution.kkt.satisfied()

class TestQpProblem:
    def test_shape_checks(self):
        with pytest.raises(QpBuildError):
            QpProblem(P=np.eye(2), g=np.zeros(3), G=np.zeros((0, 3)), h=np.zeros(0))
        with pytest.raises(QpBuildError):
            QpProblem(P=np.eye(2), g=np.zeros(2), G=np.zeros((2, 2)), h=np.zeros(1))

    def test_dump_and_load(self, tmp_path):
        rng = np.random.default_rng(3)
        qp = random_qp(rng, 3, 2)
        qp.A_eq = np.array([[1.0, 0.0, 0.0]])
        qp.b_eq = np.array([0.25])
        qp.const = 1.5
        loaded = load_qp(dump_qp(qp, tmp_path / "qp.txt"))
        for name in ("P", "g", "G", "h", "A_eq", "b_eq"):
            np.testing.assert_array_equal(getattr(loaded, name), getattr(qp, name))
        assert loaded.const == 1.5

    def test_dump_without_rows(self, tmp_path):
        qp = QpProblem(P=np.eye(2), g=np.ones(2), G=np.zeros((0, 2)), h=np.zeros(0))
        loaded = load_qp(dump_qp(qp, tmp_path / "qp.txt"))
        assert loaded.m_ineq == 0
        assert loaded.m_eq == 0
