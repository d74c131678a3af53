"""
Dense convex QP solver.

Equality constraints are eliminated through a null-space basis, the reduced
inequality-constrained problem is solved with a Mehrotra predictor-corrector
interior-point method, and the result is polished by re-solving the KKT
system on the detected active set. Every solution carries an independent
KKT audit.
"""

from dataclasses import dataclass
from typing import Callable, Optional
import logging

import numpy as np
from scipy import linalg

from .qp import QpProblem

logger = logging.getLogger(__name__)

OPTIMAL = "optimal"
MAX_ITERATIONS = "max_iterations"
KKT_FAILED = "kkt_failed"

KKT_TOLERANCE = 1e-6

# fraction of the distance to the boundary an interior-point step may cover
BOUNDARY_FRACTION = 0.995
INTERIOR_FLOOR = 1e-14


@dataclass(frozen=True)
class KktReport:
    """Scaled residuals of the optimality conditions."""
    primal: float
    stationarity: float
    complementarity: float
    dual: float

    @property
    def worst(self) -> float:
        return max(self.primal, self.stationarity, self.complementarity, self.dual)

    def satisfied(self, tol: float = KKT_TOLERANCE) -> bool:
        return self.worst <= tol


@dataclass
class QpSolution:
    x: np.ndarray
    objective: float
    lam: np.ndarray
    nu: np.ndarray
    status: str
    iterations: int
    kkt: KktReport
    polished: bool = False

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def equality_duals(qp: QpProblem, x: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Least-squares multipliers nu with A_eq' nu = -(P x + g + G' lam)."""
    if qp.m_eq == 0:
        return np.zeros(0)
    rhs = -(qp.P @ x + qp.g + qp.G.T @ lam)
    nu, *_ = linalg.lstsq(qp.A_eq.T, rhs)
    return nu


def kkt_residuals(qp: QpProblem, x: np.ndarray, lam: np.ndarray, nu: np.ndarray) -> KktReport:
    """
    Audit a primal-dual pair against the KKT conditions.

    Residuals are relative: primal rows to the bound magnitudes, stationarity
    to the largest term of the gradient sum, complementarity to the largest
    multiplier.
    """
    slack = qp.h - qp.G @ x
    violation = max(
        float(np.max(-slack, initial=0.0)),
        float(np.max(np.abs(qp.A_eq @ x - qp.b_eq), initial=0.0)),
    )
    primal = violation / (1.0 + max(np.max(np.abs(qp.h), initial=0.0), np.max(np.abs(qp.b_eq), initial=0.0)))

    Px = qp.P @ x
    Gl = qp.G.T @ lam
    An = qp.A_eq.T @ nu
    grad = Px + qp.g + Gl + An
    scale = 1.0 + max(np.max(np.abs(Px)), np.max(np.abs(qp.g)), np.max(np.abs(Gl), initial=0.0),
                      np.max(np.abs(An), initial=0.0))
    stationarity = float(np.max(np.abs(grad))) / scale

    lam_scale = 1.0 + float(np.max(np.abs(lam), initial=0.0))
    complementarity = float(np.max(np.abs(lam * slack), initial=0.0)) / lam_scale
    dual = float(np.max(-lam, initial=0.0)) / lam_scale
    return KktReport(primal=primal, stationarity=stationarity, complementarity=complementarity, dual=dual)


def _factor(K: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Cholesky solve for an SPD matrix, least squares if it is singular."""
    try:
        factor = linalg.cho_factor(K, lower=True, check_finite=False)
        return lambda rhs: linalg.cho_solve(factor, rhs, check_finite=False)
    except linalg.LinAlgError:
        logger.debug("Newton matrix not positive definite, using least squares")
        return lambda rhs: linalg.lstsq(K, rhs)[0]


def _max_step(v: np.ndarray, dv: np.ndarray) -> float:
    """Largest step in [0, 1] keeping v + step * dv non-negative."""
    shrinking = dv < 0
    if not np.any(shrinking):
        return 1.0
    return float(min(1.0, np.min(-v[shrinking] / dv[shrinking])))


def _interior_point(P, g, G, h, z0, max_iterations, tol):
    """
    Solve min 1/2 z'Pz + g'z s.t. G z <= h.

    Returns (z, lam, iterations, converged).
    """
    n = g.shape[0]
    m = h.shape[0]
    z = z0.copy()
    if n == 0:
        return z, np.zeros(m), 0, bool(np.all(h >= -tol * (1.0 + np.max(np.abs(h), initial=0.0))))
    if m == 0:
        z = _factor(P)(-g)
        return z, np.zeros(0), 0, True

    s = np.maximum(h - G @ z, 1.0)
    lam = np.ones(m)
    scale_d = 1.0 + max(np.max(np.abs(g)), np.max(np.abs(P)))
    scale_p = 1.0 + np.max(np.abs(h))

    for it in range(1, max_iterations + 1):
        r_d = P @ z + g + G.T @ lam
        r_p = G @ z + s - h
        mu = float(s @ lam) / m
        if (np.max(np.abs(r_d)) <= tol * scale_d and np.max(np.abs(r_p)) <= tol * scale_p
                and mu <= tol * scale_d):
            return z, lam, it - 1, True

        W = lam / s
        solve = _factor(P + G.T @ (W[:, None] * G))

        def newton(r_c):
            dz = solve(-r_d - G.T @ (W * r_p - r_c / s))
            dlam = W * (G @ dz + r_p) - r_c / s
            ds = -r_p - G @ dz
            return dz, dlam, ds

        # affine predictor
        dz_a, dlam_a, ds_a = newton(s * lam)
        step_a = min(_max_step(s, ds_a), _max_step(lam, dlam_a))
        mu_a = float((s + step_a * ds_a) @ (lam + step_a * dlam_a)) / m
        sigma = (mu_a / mu) ** 3 if mu > 0 else 0.0

        # centering corrector
        dz, dlam, ds = newton(s * lam + ds_a * dlam_a - sigma * mu)
        step = min(1.0, BOUNDARY_FRACTION * min(_max_step(s, ds), _max_step(lam, dlam)))
        z_next = z + step * dz
        s_next = np.maximum(s + step * ds, INTERIOR_FLOOR)
        lam_next = np.maximum(lam + step * dlam, INTERIOR_FLOOR)
        if not (np.all(np.isfinite(z_next)) and np.all(np.isfinite(lam_next)) and np.all(np.isfinite(s_next))):
            logger.debug(f"non-finite Newton step at iteration {it}, stopping")
            return z, lam, it, False
        z, s, lam = z_next, s_next, lam_next

    return z, lam, max_iterations, False


def _polish(P, g, G, h, z, lam):
    """
    Re-solve the KKT system with the rows where the multiplier dominates the
    slack held as equalities. Returns None if the candidate is not a
    primal-dual feasible point.
    """
    slack = h - G @ z
    active = lam > slack
    n = g.shape[0]
    Ga = G[active]
    na = Ga.shape[0]
    K = np.zeros((n + na, n + na))
    K[:n, :n] = P
    K[:n, n:] = Ga.T
    K[n:, :n] = Ga
    rhs = np.concatenate((-g, h[active]))
    sol = linalg.lstsq(K, rhs)[0]
    z_p = sol[:n]
    lam_p = np.zeros_like(lam)
    lam_p[active] = sol[n:]
    feas_tol = 1e-9 * (1.0 + np.max(np.abs(h), initial=0.0))
    if np.any(G @ z_p - h > feas_tol) or np.any(lam_p < -1e-9 * (1.0 + np.max(lam_p, initial=0.0))):
        return None
    return z_p, np.maximum(lam_p, 0.0)


def solve_qp(
    qp: QpProblem,
    warm_start: Optional[np.ndarray] = None,
    max_iterations: int = 200,
    tol: float = 1e-10,
) -> QpSolution:
    """
    Solve a convex QP.

    ``warm_start`` is an initial primal guess; it changes the path but not the
    optimum. The status is ``optimal`` when the interior-point iteration
    converged and the result passes the KKT audit, ``kkt_failed`` when it
    converged but fails the audit, and ``max_iterations`` when it stopped at
    the cap or on a non-finite step. The last iterate is always returned
    with its audit.
    """
    n = qp.n
    if qp.m_eq:
        x_p = linalg.lstsq(qp.A_eq, qp.b_eq)[0]
        Z = linalg.null_space(qp.A_eq)
    else:
        x_p = np.zeros(n)
        Z = np.eye(n)

    P_r = Z.T @ qp.P @ Z
    P_r = 0.5 * (P_r + P_r.T)
    g_r = Z.T @ (qp.P @ x_p + qp.g)
    G_r = qp.G @ Z
    h_r = qp.h - qp.G @ x_p

    z0 = np.zeros(Z.shape[1])
    if warm_start is not None:
        z0 = Z.T @ (np.asarray(warm_start, dtype=float) - x_p)

    z, lam, iterations, converged = _interior_point(P_r, g_r, G_r, h_r, z0, max_iterations, tol)
    x = x_p + Z @ z
    report = kkt_residuals(qp, x, lam, equality_duals(qp, x, lam))

    polished = False
    if converged and qp.m_ineq:
        candidate = _polish(P_r, g_r, G_r, h_r, z, lam)
        if candidate is not None:
            x_c = x_p + Z @ candidate[0]
            report_c = kkt_residuals(qp, x_c, candidate[1], equality_duals(qp, x_c, candidate[1]))
            if report_c.worst <= report.worst:
                x, lam, report, polished = x_c, candidate[1], report_c, True

    status = OPTIMAL if converged else MAX_ITERATIONS
    if converged and not report.satisfied():
        logger.warning(f"converged iterate fails the KKT audit with residual {report.worst:.2e}")
        status = KKT_FAILED
    return QpSolution(
        x=x,
        objective=qp.objective(x),
        lam=lam,
        nu=equality_duals(qp, x, lam),
        status=status,
        iterations=iterations,
        kkt=report,
        polished=polished,
    )
