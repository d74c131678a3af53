"""
Parallel batches of independent closed-loop runs.
"""

from dataclasses import dataclass
from multiprocessing import Pool
from typing import Dict, Hashable, List, Optional, Sequence
import logging

from ..carfollow import RangePolicyParams
from ..controllers import Controller
from ..dynamics import VehicleParams
from .engine import RunResult, run
from .scenario import Scenario

logger = logging.getLogger(__name__)


@dataclass
class RunJob:
    """One engine invocation; ``key`` orders the merged results."""
    key: Hashable
    scenario: Scenario
    controller: Controller
    plant: VehicleParams
    policy: Optional[RangePolicyParams] = None


def _execute(job: RunJob) -> RunResult:
    return run(job.scenario, job.controller, job.plant, policy=job.policy)


def run_batch(jobs: Sequence[RunJob], workers: Optional[int] = None) -> Dict[Hashable, RunResult]:
    """
    Run every job, in a process pool when ``workers`` > 1.

    Results are keyed by ``job.key`` and inserted in sorted key order, so the
    output does not depend on scheduling.
    """
    keys = [job.key for job in jobs]
    if len(set(keys)) != len(keys):
        raise ValueError("batch job keys must be unique")
    logger.info(f"Running batch of {len(jobs)} jobs with {workers or 1} worker(s)")
    if workers and workers > 1 and len(jobs) > 1:
        with Pool(processes=min(workers, len(jobs))) as pool:
            results: List[RunResult] = pool.map(_execute, jobs)
    else:
        results = [_execute(job) for job in jobs]
    by_key = dict(zip(keys, results))
    try:
        ordered = sorted(keys)
    except TypeError:
        ordered = sorted(keys, key=repr)
    return {key: by_key[key] for key in ordered}
