"""
IDM parameter identification from recorded chains of vehicles.

Every follower is replayed against the recorded trajectory of the vehicle in
front of it, and the parameters minimizing the mean per-vehicle RMS headway
error are found with a bounded multi-start pattern search.
"""

from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import List, Optional, Tuple
import logging

import numpy as np

from ..carfollow import IDM_BOUNDS, IDM_FIELDS, IdmParamArrays, IdmParams, idm_step
from ..errors import DomainError

logger = logging.getLogger(__name__)

LOWER = np.array([IDM_BOUNDS[name][0] for name in IDM_FIELDS])
UPPER = np.array([IDM_BOUNDS[name][1] for name in IDM_FIELDS])


@dataclass
class IdentProblem:
    """
    Replay data for N_v followers.

    Arrays are [step, follower]. Follower j starts from ``s0[j]``, ``v0[j]``
    and follows the recorded ``lead_s[:, j]``; ``h_data`` is its recorded
    headway.
    """
    lead_s: np.ndarray
    lead_v: np.ndarray
    s0: np.ndarray
    v0: np.ndarray
    h_data: np.ndarray
    dt: float
    length: float = 5.0
    u_floor: float = -6.0

    def __post_init__(self):
        if self.lead_s.ndim != 2 or self.lead_s.shape[1] < 1:
            raise DomainError("identification needs at least one follower")
        if self.dt <= 0:
            raise DomainError(f"time step must be positive, got {self.dt}")

    @property
    def n_vehicles(self) -> int:
        return self.lead_s.shape[1]

    @property
    def n_samples(self) -> int:
        return self.lead_s.shape[0]

    @classmethod
    def from_arrays(
        cls,
        positions: np.ndarray,
        speeds: np.ndarray,
        dt: float,
        length: float = 5.0,
        u_floor: float = -6.0,
    ) -> "IdentProblem":
        """
        Build from [step, vehicle] arrays ordered back to front, i.e. column
        j holds vehicle j + 1 and follows column j + 1. The front vehicle is
        not fitted.
        """
        positions = np.asarray(positions, dtype=float)
        speeds = np.asarray(speeds, dtype=float)
        if positions.ndim != 2 or positions.shape[1] < 2:
            raise DomainError("identification needs a chain of at least two vehicles")
        followers = positions[:, :-1]
        lead_s = positions[:, 1:]
        return cls(
            lead_s=lead_s,
            lead_v=speeds[:, 1:],
            s0=followers[0].copy(),
            v0=speeds[0, :-1].copy(),
            h_data=lead_s - followers - length,
            dt=dt,
            length=length,
            u_floor=u_floor,
        )

    @classmethod
    def from_scenario(cls, scenario, u_floor: float = -6.0) -> "IdentProblem":
        return cls.from_arrays(
            scenario.positions, scenario.speeds, scenario.dt, scenario.length, u_floor
        )


def simulated_headways(p: IdmParamArrays, problem: IdentProblem) -> np.ndarray:
    """
    Headways [param set, step, follower] of every follower replayed with
    every parameter set. After a collision the last valid headway is held.
    """
    n_sets = p.a0.shape[0]
    N, F = problem.n_samples, problem.n_vehicles
    s = np.broadcast_to(problem.s0, (n_sets, F)).copy()
    v = np.broadcast_to(problem.v0, (n_sets, F)).copy()
    alive = np.ones((n_sets, F), dtype=bool)
    h_hat = np.empty((n_sets, N, F))
    h_hat[:, 0] = problem.lead_s[0] - s - problem.length
    for k in range(N - 1):
        s_next, v_next, _ = idm_step(
            s, v, problem.lead_s[k], problem.lead_v[k], p, problem.dt, problem.length, problem.u_floor
        )
        s = np.where(alive, s_next, s)
        v = np.where(alive, v_next, v)
        h = problem.lead_s[k + 1] - s - problem.length
        alive &= h > 0
        h_hat[:, k + 1] = np.where(alive, h, h_hat[:, k])
    return h_hat


def ident_cost_batch(X: np.ndarray, problem: IdentProblem) -> np.ndarray:
    """Cost of every row of X (physical units, IDM field order)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    h_hat = simulated_headways(IdmParamArrays.from_matrix(X), problem)
    rmse = np.sqrt(np.mean((h_hat - problem.h_data[None]) ** 2, axis=1))
    return rmse.mean(axis=1)


def ident_cost(params: IdmParams, problem: IdentProblem) -> float:
    """Mean over followers of the RMS headway error, in meters."""
    return float(ident_cost_batch(params.as_vector()[None, :], problem)[0])


def to_physical(u: np.ndarray) -> np.ndarray:
    return LOWER + np.clip(u, 0.0, 1.0) * (UPPER - LOWER)


@dataclass
class StartResult:
    start: np.ndarray
    params: IdmParams
    cost: float
    evaluations: int
    history: List[float] = field(default_factory=list)


@dataclass
class IdentResult:
    params: IdmParams
    cost: float
    evaluations: int
    starts: List[StartResult]
    history: List[float]


def pattern_search(
    problem: IdentProblem,
    u0: np.ndarray,
    max_evaluations: int = 2000,
    mesh_tol: float = 1e-4,
    initial_mesh: float = 0.25,
    max_mesh: float = 0.5,
) -> StartResult:
    """
    Coordinate pattern search in the unit box.

    All 12 poll points are evaluated as one batch; the best improving point
    becomes the incumbent and the mesh doubles, otherwise the mesh halves.
    Poll points are projected onto the box before evaluation.
    """
    dim = len(IDM_FIELDS)
    directions = np.vstack((np.eye(dim), -np.eye(dim)))
    u = np.clip(np.asarray(u0, dtype=float), 0.0, 1.0)
    cost = float(ident_cost_batch(to_physical(u)[None, :], problem)[0])
    evaluations = 1
    history = [cost]
    mesh = initial_mesh
    while mesh >= mesh_tol and evaluations < max_evaluations:
        budget = min(len(directions), max_evaluations - evaluations)
        poll = np.clip(u + mesh * directions[:budget], 0.0, 1.0)
        costs = ident_cost_batch(to_physical(poll), problem)
        evaluations += budget
        best = int(np.argmin(costs))
        if costs[best] < cost:
            u, cost = poll[best], float(costs[best])
            mesh = min(2.0 * mesh, max_mesh)
        else:
            mesh *= 0.5
        history.append(cost)
    return StartResult(
        start=np.asarray(u0, dtype=float),
        params=IdmParams.from_vector(to_physical(u)),
        cost=cost,
        evaluations=evaluations,
        history=history,
    )


def _run_start(args: Tuple[IdentProblem, np.ndarray, int, float]) -> StartResult:
    problem, u0, max_evaluations, mesh_tol = args
    return pattern_search(problem, u0, max_evaluations, mesh_tol)


def fit_idm(
    problem: IdentProblem,
    seed: int = 0,
    n_starts: int = 8,
    max_evaluations: int = 2000,
    mesh_tol: float = 1e-4,
    workers: Optional[int] = None,
) -> IdentResult:
    """
    Multi-start pattern search over the IDM box.

    Start points are drawn uniformly in the box from ``seed``. With
    ``workers`` > 1 the starts run in a process pool; the result does not
    depend on the worker count.
    """
    if n_starts < 1:
        raise DomainError(f"need at least one start, got {n_starts}")
    rng = np.random.default_rng(seed)
    starts = rng.random((n_starts, len(IDM_FIELDS)))
    jobs = [(problem, u0, max_evaluations, mesh_tol) for u0 in starts]
    logger.info(
        f"Fitting IDM to {problem.n_vehicles} followers x {problem.n_samples} samples "
        f"with {n_starts} starts"
    )
    if workers and workers > 1:
        with Pool(processes=min(workers, n_starts)) as pool:
            results = pool.map(_run_start, jobs)
    else:
        results = [_run_start(job) for job in jobs]

    best = min(range(n_starts), key=lambda i: (results[i].cost, i))
    for i, result in enumerate(results):
        logger.debug(f"start {i}: cost {result.cost:.4f} after {result.evaluations} evaluations")
    logger.info(f"Best IDM fit cost {results[best].cost:.4f} m (start {best})")
    return IdentResult(
        params=results[best].params,
        cost=results[best].cost,
        evaluations=sum(r.evaluations for r in results),
        starts=results,
        history=results[best].history,
    )


def identify(problem: IdentProblem, seed: int = 0, **kwargs) -> IdmParams:
    """Best-found IDM parameters; deterministic for a given seed."""
    return fit_idm(problem, seed=seed, **kwargs).params
