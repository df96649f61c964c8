"""
Provides :class:`RelaxationOutcome` and the top-``k`` discretization shared by all relaxations.
"""

from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
from typing import Any
try:
    from numpy.typing import ArrayLike
except ImportError:
    ArrayLike = Any
import numpy as np
from ..model import BinarySelection, ProblemInstance


class RelaxationInfeasible(RuntimeError):
    """Raised if a relaxation has an empty feasible set."""


class RelaxationNotConverged(RuntimeError):
    """Raised if the QP of a relaxation stops at its iteration limit."""


class RelaxationKind(Enum):
    LINE = 'line'
    DUAL = 'dual'
    AUGM = 'augm'


@dataclass(frozen=True, eq=False)
class RelaxationOutcome:
    """
    Result of a relaxation: the proposed ``selection``, the continuous payload
    ``continuous_b`` (``b_R`` for Line, the negated coefficient vector of ``b`` for Dual and
    Augm), the continuous ``x_hat``, the relaxation's objective value ``bound`` and the number of
    ``iterations`` (QP iterations for Line, ascent iterations otherwise).
    """
    kind: RelaxationKind
    selection: BinarySelection
    continuous_b: np.ndarray
    x_hat: np.ndarray
    bound: float
    iterations: int


def discretize_topk(b_R: ArrayLike, k: int) -> BinarySelection:
    """
    Map the ``k`` largest entries of ``b_R`` to one and the others to zero; ties are broken by
    lowest index.
    """
    b_R = np.asarray(b_R, dtype=float)
    if not 0 <= k <= b_R.shape[0]:
        raise ValueError(f'k={k} must be in [0, {b_R.shape[0]}]')
    order = np.argsort(-b_R, kind='stable')
    return BinarySelection.from_indices(b_R.shape[0], order[:k], k=k)


def discretize(scores: ArrayLike, inst: ProblemInstance) -> BinarySelection:
    """
    Discretize ``scores`` to a selection satisfying ``B b = c_b``.

    For a single all-ones cardinality row this is :func:`discretize_topk`; otherwise indices are
    added greedily by descending score (lowest index first on ties) whenever no row of
    ``B b <= c_b`` is exceeded.
    """
    if inst.k is not None:
        return discretize_topk(scores, inst.k)
    scores = np.asarray(scores, dtype=float)
    counts = np.zeros(inst.m_b, dtype=np.int64)
    chosen = []
    for i in np.argsort(-scores, kind='stable'):
        if np.all(counts + inst.B[:, i] <= inst.c_b):
            counts += inst.B[:, i]
            chosen.append(int(i))
        if np.all(counts == inst.c_b):
            break
    selection = BinarySelection.from_indices(inst.n, chosen)
    if not inst.is_cardinality_feasible(selection):
        raise RelaxationInfeasible('greedy fill could not satisfy the cardinality rows')
    return selection
