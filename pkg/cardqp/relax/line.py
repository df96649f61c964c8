"""
Provides the continuous relaxation of ``b`` (Line model), :func:`solve_line`.
"""

from typing import Optional, Tuple, Any
try:
    from numpy.typing import ArrayLike
except ImportError:
    ArrayLike = Any
import numpy as np
from ..model import ProblemInstance
from ..qpsolve import QpProblem, QpStatus, solve_qp
from .outcome import (
        RelaxationOutcome, RelaxationKind, RelaxationInfeasible, RelaxationNotConverged,
        discretize, discretize_topk)


def line_relaxation(
        inst: ProblemInstance,
        b_lo: Optional[ArrayLike] = None,
        b_hi: Optional[ArrayLike] = None,
        ) -> Tuple[float, np.ndarray, np.ndarray, int]:
    """
    Solve the Line model with ``b_R`` restricted to ``[b_lo, b_hi]`` (default ``[0, 1]``).

    The coupled bounds ``l * b_R <= x <= u * b_R`` are put into box form by splitting
    ``x = l * b_R + w`` with ``w >= 0`` and ``(u - l) * b_R - w - s = 0`` with ``s >= 0``,
    so the QP runs over ``(b_R, w, s)``.

    Returns
    -------
    bound : float
        Relaxed objective value.
    x : ndarray
        Relaxed ``x``.
    b_R : ndarray
        Relaxed ``b``.
    iterations : int
        Number of QP iterations.

    Raises
    ------
    RelaxationInfeasible
        If the relaxation has no feasible point.
    RelaxationNotConverged
        If the QP stops at its iteration limit.
    """
    n = inst.n
    b_lo = np.zeros(n) if b_lo is None else np.asarray(b_lo, dtype=float)
    b_hi = np.ones(n) if b_hi is None else np.asarray(b_hi, dtype=float)
    eye, zero = np.eye(n), np.zeros((n, n))
    # x = M @ (b_R, w, s)
    M = np.hstack([np.diag(inst.lower), eye, zero])
    H = M.T @ inst.Q @ M
    H = 0.5 * (H + H.T)
    Aeq = np.vstack([
            inst.A @ M,
            np.hstack([inst.B.astype(float), np.zeros((inst.m_b, 2 * n))]),
            np.hstack([np.diag(inst.upper - inst.lower), -eye, -eye])])
    beq = np.concatenate([inst.c_a, inst.c_b.astype(float), np.zeros(n)])
    lo = np.concatenate([b_lo, np.zeros(2 * n)])
    hi = np.concatenate([b_hi, np.full(2 * n, np.inf)])
    result = solve_qp(
            QpProblem(H=H, g=M.T @ inst.q, Aeq=Aeq, beq=beq, lo=lo, hi=hi),
            drop_dependent_rows=True)
    if result.status is QpStatus.ITERATION_LIMIT:
        raise RelaxationNotConverged(
                f'Line relaxation stopped after {result.iterations} iterations')
    if not result.is_optimal:
        raise RelaxationInfeasible(f'Line relaxation status: {result.status.value}')
    z = result.x
    return result.objective, M @ z, z[:n], result.iterations


def solve_line(inst: ProblemInstance, k: Optional[int] = None) -> RelaxationOutcome:
    """
    Solve the Line model and discretize ``b_R`` by keeping its top entries.

    Parameters
    ----------
    inst : :class:`ProblemInstance`
        The instance.
    k : int, optional
        Cardinality; must equal ``c_b[0]`` for a single-row ``B``. If not specified, the
        instance's cardinality rows are used (with a greedy fill for multi-row ``B``).

    Returns
    -------
    :class:`RelaxationOutcome`
    """
    if k is not None and inst.k is not None and k != inst.k:
        raise ValueError(f'k={k} does not match the instance cardinality {inst.k}')
    bound, x, b_R, iterations = line_relaxation(inst)
    selection = discretize_topk(b_R, k) if k is not None else discretize(b_R, inst)
    return RelaxationOutcome(
            kind=RelaxationKind.LINE, selection=selection, continuous_b=b_R, x_hat=x,
            bound=bound, iterations=iterations)
