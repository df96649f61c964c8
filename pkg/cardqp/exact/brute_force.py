"""
Provides the exhaustive reference solver :func:`brute_force` and :class:`ExactResult`.
"""

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterator
import numpy as np
from tqdm import tqdm
from ..model import BinarySelection, ProblemInstance, WeightedSolution, SolutionStatus
from ..heuristic import solve_restricted

MAX_SELECTIONS = 10 ** 6


class TooLarge(ValueError):
    """Raised if enumeration would exceed the selection count guard."""


@dataclass(frozen=True)
class ExactResult:
    """
    Reference solution. ``proved_optimal`` is ``True`` iff the search was exhaustive and every
    QP on the way converged; ``nodes_explored`` counts evaluated selections (brute force) or
    node relaxations (branch and bound).
    """
    solution: WeightedSolution
    proved_optimal: bool
    nodes_explored: int
    wall_budget_hit: bool = False


def infeasible_solution(n: int) -> WeightedSolution:
    return WeightedSolution(
            x=np.full(n, np.nan), selection=BinarySelection(np.zeros(n, dtype=np.int8)),
            objective=np.inf, status=SolutionStatus.INFEASIBLE)


def selection_count(inst: ProblemInstance) -> int:
    """Number of selections :func:`brute_force` enumerates."""
    return comb(inst.n, inst.k) if inst.k is not None else 2 ** inst.n


def enumerate_selections(inst: ProblemInstance) -> Iterator[BinarySelection]:
    """
    Yield the selections satisfying the cardinality rows, in lexicographic order of their index
    tuples (by increasing size first if ``B`` is not a single all-ones row).
    """
    sizes = [inst.k] if inst.k is not None else range(inst.n + 1)
    for size in sizes:
        for idx in combinations(range(inst.n), size):
            b = BinarySelection.from_indices(inst.n, idx)
            if inst.k is not None or inst.is_cardinality_feasible(b):
                yield b


def brute_force(
        inst: ProblemInstance,
        max_selections: int = MAX_SELECTIONS,
        show_pbar: bool = False,
        ) -> ExactResult:
    """
    Solve the restricted QP of every feasible selection and return the best one (the first in
    :func:`enumerate_selections` order on ties). Optimality is only claimed if every restricted
    QP converged.

    Raises
    ------
    TooLarge
        If more than ``max_selections`` selections would be enumerated.
    """
    count = selection_count(inst)
    if count > max_selections:
        raise TooLarge(f'{count} selections exceed the limit of {max_selections}')
    best = infeasible_solution(inst.n)
    evaluated = 0
    converged = True
    for b in tqdm(enumerate_selections(inst), total=count, desc='brute_force',
                  disable=not show_pbar):
        sol = solve_restricted(inst, b)
        evaluated += 1
        converged &= sol.status is not SolutionStatus.NOT_CONVERGED
        if sol.objective < best.objective:
            best = sol
    return ExactResult(solution=best, proved_optimal=converged, nodes_explored=evaluated)
