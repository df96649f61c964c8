"""
Provides the restricted QP for a fixed selection (:func:`solve_restricted`), the fitness
function of the heuristics (:func:`fitness`) and the memoizing :class:`FitnessCache`.
"""

from typing import Dict, Iterable, List
import dataclasses
from concurrent.futures import ThreadPoolExecutor
import threading
import numpy as np
from ..model import BinarySelection, ProblemInstance, WeightedSolution, SolutionStatus
from ..qpsolve import QpProblem, QpStatus, solve_qp


def solve_restricted(inst: ProblemInstance, b: BinarySelection) -> WeightedSolution:
    """
    Solve the instance for the fixed selection ``b``: ``x_i`` in ``[l_i, u_i]`` where
    ``b_i = 1``, ``x_i = 0`` where ``b_i = 0``, and ``A x = c_a``.

    Returns
    -------
    :class:`WeightedSolution`
        With status ``INFEASIBLE`` and objective ``inf`` if the restriction has no feasible
        point, and status ``NOT_CONVERGED`` and objective ``inf`` if the QP stops at its
        iteration limit.
    """
    if b.n != inst.n:
        raise ValueError(f'selection has length {b.n}, expected {inst.n}')
    S = b.indices
    x = np.zeros(inst.n)
    infeasible = WeightedSolution(
            x=np.full(inst.n, np.nan), selection=b, objective=np.inf,
            status=SolutionStatus.INFEASIBLE)
    if S.size == 0:
        if np.allclose(inst.c_a, 0.):
            return WeightedSolution(x=x, selection=b, objective=0., status=SolutionStatus.OPTIMAL)
        return infeasible
    result = solve_qp(
            QpProblem(H=inst.Q[np.ix_(S, S)], g=inst.q[S], Aeq=inst.A[:, S], beq=inst.c_a,
                      lo=inst.lower[S], hi=inst.upper[S]),
            drop_dependent_rows=True)
    if result.status is QpStatus.ITERATION_LIMIT:
        return dataclasses.replace(infeasible, status=SolutionStatus.NOT_CONVERGED)
    if not result.is_optimal:
        return infeasible
    x[S] = result.x
    return WeightedSolution(
            x=x, selection=b, objective=inst.objective(x), status=SolutionStatus.OPTIMAL)


def fitness(inst: ProblemInstance, b: BinarySelection) -> float:
    """Objective of :func:`solve_restricted`; ``inf`` if the restriction is infeasible."""
    return solve_restricted(inst, b).objective


class FitnessCache:
    """
    Memoizing fitness evaluator for one instance, keyed by the bits of the selection.
    Lookups and inserts are guarded by a lock, so the cache can be shared by worker threads.
    """

    def __init__(self, inst: ProblemInstance, jobs: int = 1):
        if jobs < 1:
            raise ValueError('jobs must be at least 1')
        self.inst = inst
        self.jobs = jobs
        self._solutions: Dict[BinarySelection, WeightedSolution] = {}
        self._lock = threading.Lock()
        self.misses = 0

    def solution(self, b: BinarySelection) -> WeightedSolution:
        with self._lock:
            cached = self._solutions.get(b)
        if cached is not None:
            return cached
        sol = solve_restricted(self.inst, b)
        with self._lock:
            # keep the first stored value if another thread raced us
            sol = self._solutions.setdefault(b, sol)
            self.misses += 1
        return sol

    def __call__(self, b: BinarySelection) -> float:
        return self.solution(b).objective

    def evaluate_many(self, selections: Iterable[BinarySelection]) -> List[float]:
        """Return the fitness of each selection, in order, using ``jobs`` worker threads."""
        selections = list(selections)
        if self.jobs == 1 or len(selections) <= 1:
            return [self(b) for b in selections]
        with ThreadPoolExecutor(max_workers=self.jobs) as executor:
            return list(executor.map(self, selections))

    def __len__(self) -> int:
        with self._lock:
            return len(self._solutions)

    def __contains__(self, b: BinarySelection) -> bool:
        with self._lock:
            return b in self._solutions
