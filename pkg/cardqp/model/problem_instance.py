"""
Provides the generalized cardinality-constrained model :class:`ProblemInstance`,

.. math::

    \\min_{x, b} \\ x^T Q x + q x \\quad \\text{s.t.} \\quad A x = c_a, \\quad
    l \\circ b \\leq x \\leq u \\circ b, \\quad B b = c_b, \\quad b \\in \\{0, 1\\}^n,

its mean-variance specialization (:class:`MvSpec`, :func:`build_from_mv`) and :func:`validate`.
"""

from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import List, Optional, Tuple, Any
try:
    from numpy.typing import ArrayLike
except ImportError:
    ArrayLike = Any
import numpy as np
from ..utils import symmetry_violation, min_eigenvalue
from .selection import BinarySelection

SYMMETRY_RTOL = 1e-12
MIN_EIGENVALUE = 1e-10


class DimensionMismatch(ValueError):
    """Raised if matrix and vector dimensions are inconsistent."""


class InvalidBounds(ValueError):
    """Raised if the weight bounds make the budget constraint unsatisfiable."""


def _readonly(arr: ArrayLike, ndim: int, name: str, dtype=float) -> np.ndarray:
    arr = np.array(arr, dtype=dtype)
    if arr.ndim != ndim:
        raise DimensionMismatch(f'{name} must be {ndim}-dimensional, got shape {arr.shape}')
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """
    Instance of the generalized model. Immutable after construction.

    The diagonal bound matrices ``L`` and ``U`` are stored as vectors ``lower`` and ``upper``.
    ``B`` and ``c_b`` are integer arrays.
    """
    Q: np.ndarray
    q: np.ndarray
    A: np.ndarray
    c_a: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    B: np.ndarray
    c_b: np.ndarray

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, 'Q', _readonly(self.Q, 2, 'Q'))
        set_(self, 'q', _readonly(self.q, 1, 'q'))
        set_(self, 'A', _readonly(self.A, 2, 'A'))
        set_(self, 'c_a', _readonly(self.c_a, 1, 'c_a'))
        set_(self, 'lower', _readonly(self.lower, 1, 'lower'))
        set_(self, 'upper', _readonly(self.upper, 1, 'upper'))
        set_(self, 'B', _readonly(self.B, 2, 'B', dtype=np.int64))
        set_(self, 'c_b', _readonly(self.c_b, 1, 'c_b', dtype=np.int64))
        n = self.Q.shape[0]
        checks = [
            ('Q', self.Q.shape, (n, n)),
            ('q', self.q.shape, (n,)),
            ('A', self.A.shape, (self.c_a.shape[0], n)),
            ('lower', self.lower.shape, (n,)),
            ('upper', self.upper.shape, (n,)),
            ('B', self.B.shape, (self.c_b.shape[0], n)),
        ]
        for name, shape, expected in checks:
            if shape != expected:
                raise DimensionMismatch(f'{name} has shape {shape}, expected {expected}')
        if n < 1:
            raise DimensionMismatch('instance needs at least one variable')

    @property
    def n(self) -> int:
        """Number of decision variables."""
        return self.Q.shape[0]

    @property
    def m_a(self) -> int:
        """Number of linear equality constraints ``A x = c_a``."""
        return self.A.shape[0]

    @property
    def m_b(self) -> int:
        """Number of cardinality constraints ``B b = c_b``."""
        return self.B.shape[0]

    @property
    def k(self) -> Optional[int]:
        """
        The cardinality if the instance has a single all-ones cardinality row (like every
        mean-variance instance), otherwise ``None``.
        """
        if self.m_b == 1 and np.all(self.B[0] == 1):
            return int(self.c_b[0])
        return None

    @cached_property
    def Q_inv(self) -> np.ndarray:
        """Inverse of ``Q`` (computed once)."""
        inv = np.linalg.inv(self.Q)
        inv = 0.5 * (inv + inv.T)
        inv.setflags(write=False)
        return inv

    def is_cardinality_feasible(self, selection: BinarySelection) -> bool:
        """Whether ``B @ selection.bits == c_b``."""
        return selection.n == self.n and selection.satisfies(self.B, self.c_b)

    def objective(self, x: ArrayLike) -> float:
        """Return ``x^T Q x + q x``."""
        x = np.asarray(x, dtype=float)
        return float(x @ self.Q @ x + self.q @ x)


@dataclass(frozen=True)
class MvSpec:
    """
    Mean-variance model with cardinality ``k`` and per-asset weight bounds ``[lower, upper]``
    for the selected assets.
    """
    returns: np.ndarray
    target_return: float
    k: int
    lower: float = 0.01
    upper: float = 1.

    @property
    def n(self) -> int:
        return len(self.returns)


def build_from_mv(spec: MvSpec, Q: ArrayLike) -> ProblemInstance:
    """
    Map a mean-variance model to a :class:`ProblemInstance`:
    ``A = [r^T; 1^T]``, ``c_a = [target_return, 1]``, ``L = lower * I``, ``U = upper * I``,
    ``B = 1^T``, ``c_b = [k]`` and ``q = 0``.

    Raises
    ------
    DimensionMismatch
        If ``Q`` is not ``n x n``.
    InvalidBounds
        If ``k * lower > 1``, ``k * upper < 1``, ``lower >= upper``, ``k`` is not in ``[1, n]``
        or ``lower`` is negative.
    """
    returns = np.asarray(spec.returns, dtype=float)
    n = returns.shape[0]
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (n, n):
        raise DimensionMismatch(f'Q has shape {Q.shape}, expected {(n, n)}')
    if not 1 <= spec.k <= n:
        raise InvalidBounds(f'k={spec.k} must be in [1, {n}]')
    if spec.lower < 0. or spec.lower >= spec.upper:
        raise InvalidBounds(f'bounds must satisfy 0 <= lower < upper, got [{spec.lower}, '
                            f'{spec.upper}]')
    if spec.k * spec.lower > 1.:
        raise InvalidBounds(f'k * lower = {spec.k * spec.lower} > 1')
    if spec.k * spec.upper < 1.:
        raise InvalidBounds(f'k * upper = {spec.k * spec.upper} < 1')
    return ProblemInstance(
            Q=Q,
            q=np.zeros(n),
            A=np.stack([returns, np.ones(n)]),
            c_a=np.array([spec.target_return, 1.]),
            lower=np.full(n, spec.lower),
            upper=np.full(n, spec.upper),
            B=np.ones((1, n), dtype=np.int64),
            c_b=np.array([spec.k], dtype=np.int64))


@dataclass(frozen=True)
class Diagnostic:
    """A violated invariant, naming the offending index and value."""
    code: str
    index: Optional[Tuple[int, ...]] = None
    value: Optional[float] = None

    def __str__(self) -> str:
        return f'{self.code} at {self.index}: {self.value}'


def validate(inst: ProblemInstance) -> List[Diagnostic]:
    """
    Check the invariants of a :class:`ProblemInstance` that are not enforced by its constructor.

    Returns
    -------
    diagnostics : list of :class:`Diagnostic`
        Empty iff all invariants hold; otherwise one diagnostic per violated invariant.
    """
    diagnostics = []
    asym, (i, j) = symmetry_violation(inst.Q)
    if asym > SYMMETRY_RTOL:
        diagnostics.append(Diagnostic('AsymmetricQ', (i, j), float(inst.Q[i, j] - inst.Q[j, i])))
    eig = min_eigenvalue(inst.Q)
    if eig <= MIN_EIGENVALUE:
        diagnostics.append(Diagnostic('NotPositiveDefinite', None, eig))
    if np.any(inst.lower < 0.):
        i = int(np.argmin(inst.lower))
        diagnostics.append(Diagnostic('NegativeLowerBound', (i,), float(inst.lower[i])))
    if np.any(inst.upper <= 0.):
        i = int(np.argmin(inst.upper))
        diagnostics.append(Diagnostic('NonpositiveUpperBound', (i,), float(inst.upper[i])))
    if np.any(inst.lower > inst.upper):
        i = int(np.argmax(inst.lower - inst.upper))
        diagnostics.append(Diagnostic(
                'LowerAboveUpper', (i,), float(inst.lower[i] - inst.upper[i])))
    if np.any(inst.B < 0):
        i, j = np.unravel_index(np.argmin(inst.B), inst.B.shape)
        diagnostics.append(Diagnostic('NegativeB', (int(i), int(j)), float(inst.B[i, j])))
    if np.any(inst.c_b <= 0):
        i = int(np.argmin(inst.c_b))
        diagnostics.append(Diagnostic('NonpositiveCb', (i,), float(inst.c_b[i])))
    return diagnostics


class SolutionStatus(Enum):
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    NOT_CONVERGED = 'not_converged'


@dataclass(frozen=True)
class WeightedSolution:
    """
    Solution ``x`` of the restricted problem for a fixed ``selection``, with objective
    ``x^T Q x + q x`` (``inf`` if infeasible or if the QP hit its iteration limit).
    """
    x: np.ndarray
    selection: BinarySelection
    objective: float
    status: SolutionStatus

    @property
    def is_optimal(self) -> bool:
        return self.status is SolutionStatus.OPTIMAL
