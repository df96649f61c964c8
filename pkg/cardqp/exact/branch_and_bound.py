"""
Provides the best-first branch and bound reference solver :func:`branch_and_bound`, bounding
nodes by the Line relaxation.
"""

from typing import Optional, Tuple
import heapq
import itertools
import time
import numpy as np
from tqdm import tqdm
from ..model import ProblemInstance, WeightedSolution, SolutionStatus
from ..relax import RelaxationInfeasible, RelaxationNotConverged, line_relaxation, discretize
from ..heuristic import solve_restricted
from .brute_force import ExactResult, infeasible_solution

PRUNE_TOL = 1e-9
INTEGRAL_TOL = 1e-9


def _node_bound(
        inst: ProblemInstance, b_lo: np.ndarray, b_hi: np.ndarray, parent_bound: float,
        parent_b_R: np.ndarray) -> Optional[Tuple[float, np.ndarray, bool]]:
    # a node whose relaxation stops early inherits the bound and relaxed b of its parent
    try:
        bound, _, b_R, _ = line_relaxation(inst, b_lo, b_hi)
    except RelaxationInfeasible:
        return None
    except RelaxationNotConverged:
        return parent_bound, np.clip(parent_b_R, b_lo, b_hi), False
    return bound, np.clip(b_R, b_lo, b_hi), True


def branching_index(b_R: np.ndarray, b_lo: np.ndarray, b_hi: np.ndarray) -> Optional[int]:
    """
    Index of the most fractional unfixed entry of ``b_R`` (lowest index on ties), or ``None``
    if all entries are integral.
    """
    frac = np.where(b_lo == b_hi, 0., np.minimum(b_R, 1. - b_R))
    i = int(np.argmax(frac))
    return i if frac[i] > INTEGRAL_TOL else None


def branch_and_bound(
        inst: ProblemInstance,
        node_budget: int = 10000,
        time_budget: float = 60.,
        show_pbar: bool = False,
        ) -> ExactResult:
    """
    Solve an instance by best-first branch and bound on the entries of ``b``.

    Each node fixes some entries of ``b`` and is bounded by the Line relaxation with these
    entries fixed. Nodes are expanded in order of their bound (creation order on ties) by fixing
    the most fractional entry to 1 and to 0, and pruned if their bound is not below the
    incumbent minus ``1e-9``. Every evaluated node proposes an incumbent by discretizing its
    relaxed ``b``.

    A node whose relaxation stops at the QP iteration limit keeps the bound and relaxed ``b`` of
    its parent, and a proposal whose restricted QP stops there is discarded; either voids the
    optimality proof.

    Parameters
    ----------
    inst : :class:`ProblemInstance`
        The instance.
    node_budget : int, optional
        Maximum number of node relaxations. The default is ``10000``.
    time_budget : float, optional
        Wall time limit in seconds. The default is ``60.``.
    show_pbar : bool, optional
        Whether to show a tqdm progress bar. The default is ``False``.

    Returns
    -------
    :class:`ExactResult`
        ``proved_optimal`` is ``True`` iff the tree was exhausted within the budgets and every
        QP converged.
    """
    # pylint: disable=too-many-locals
    if node_budget < 1:
        raise ValueError('node_budget must be at least 1')
    start = time.monotonic()
    incumbent: WeightedSolution = infeasible_solution(inst.n)
    node_ids = itertools.count()
    converged = True

    def propose(b_R):
        nonlocal incumbent, converged
        try:
            selection = discretize(b_R, inst)
        except RelaxationInfeasible:
            return
        sol = solve_restricted(inst, selection)
        converged &= sol.status is not SolutionStatus.NOT_CONVERGED
        if sol.objective < incumbent.objective:
            incumbent = sol

    b_lo, b_hi = np.zeros(inst.n), np.ones(inst.n)
    nodes = 1
    root = _node_bound(inst, b_lo, b_hi, -np.inf, np.full(inst.n, 0.5))
    if root is None:
        return ExactResult(solution=incumbent, proved_optimal=True, nodes_explored=nodes)
    converged &= root[2]
    propose(root[1])
    heap = [(root[0], next(node_ids), b_lo, b_hi, root[1])]

    wall_budget_hit = node_budget_hit = False
    with tqdm(total=node_budget, initial=nodes, desc='branch_and_bound',
              disable=not show_pbar) as pbar:
        while heap:
            if heap[0][0] >= incumbent.objective - PRUNE_TOL:
                heap.clear()  # best-first: every remaining node is pruned
                break
            if nodes >= node_budget:
                node_budget_hit = True
                break
            if time.monotonic() - start > time_budget:
                wall_budget_hit = True
                break
            bound, _, lo, hi, b_R = heapq.heappop(heap)
            i = branching_index(b_R, lo, hi)
            if i is None:
                continue  # integral relaxation, already proposed
            for value in (1., 0.):
                child_lo, child_hi = lo.copy(), hi.copy()
                child_lo[i] = child_hi[i] = value
                child = _node_bound(inst, child_lo, child_hi, bound, b_R)
                nodes += 1
                pbar.update(1)
                if child is None:
                    continue
                converged &= child[2]
                propose(child[1])
                if child[0] < incumbent.objective - PRUNE_TOL:
                    heapq.heappush(heap, (child[0], next(node_ids), child_lo, child_hi, child[1]))
            pbar.set_postfix({'incumbent': incumbent.objective}, refresh=False)

    return ExactResult(
            solution=incumbent,
            proved_optimal=converged and not (heap or node_budget_hit or wall_budget_hit),
            nodes_explored=nodes, wall_budget_hit=wall_budget_hit)
