"""
Provides :func:`solve_qp`, a primal active-set method for convex quadratic programs

.. math::

    \\min_x \\ x^T H x + g^T x \\quad \\text{s.t.} \\quad A_{eq} x = b_{eq}, \\quad
    lo \\leq x \\leq hi,

with symmetric positive-semidefinite ``H``. Note the objective has no ``1/2`` factor.
"""

from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple, Any
try:
    from numpy.typing import ArrayLike
except ImportError:
    ArrayLike = Any
import numpy as np
import scipy.linalg
from scipy.optimize import linprog
from ..utils import symmetry_violation

ACTIVE_TOL = 1e-9
KKT_TOL = 1e-8
FEAS_TOL = 1e-7
RANK_RTOL = 1e-10
PIVOT_RTOL = 1e-12


class SingularKkt(ValueError):
    """Raised if the equality rows are linearly dependent."""


class UnboundedQp(RuntimeError):
    """Raised if the objective is unbounded below on the feasible set."""


@dataclass(frozen=True, eq=False)
class QpProblem:
    """Convex QP with equality constraints and (possibly infinite) box bounds."""
    H: np.ndarray
    g: np.ndarray
    Aeq: np.ndarray
    beq: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        H = np.array(self.H, dtype=float, ndmin=2)
        d = H.shape[0]
        Aeq = np.array(self.Aeq, dtype=float).reshape(-1, d)
        arrays = {
            'H': H, 'g': np.array(self.g, dtype=float).reshape(-1), 'Aeq': Aeq,
            'beq': np.array(self.beq, dtype=float).reshape(-1),
            'lo': np.array(self.lo, dtype=float).reshape(-1),
            'hi': np.array(self.hi, dtype=float).reshape(-1)}
        if H.shape != (d, d):
            raise ValueError(f'H must be square, got shape {H.shape}')
        for name in ('g', 'lo', 'hi'):
            if arrays[name].shape != (d,):
                raise ValueError(f'{name} has shape {arrays[name].shape}, expected {(d,)}')
        if arrays['beq'].shape != (Aeq.shape[0],):
            raise ValueError(f'beq has shape {arrays["beq"].shape}, expected {(Aeq.shape[0],)}')
        if symmetry_violation(H)[0] > 1e-12:
            raise ValueError('H is not symmetric')
        if np.any(arrays['lo'] > arrays['hi']):
            raise ValueError('lo must not exceed hi')
        for name, arr in arrays.items():
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def d(self) -> int:
        """Number of variables."""
        return self.H.shape[0]

    @property
    def m(self) -> int:
        """Number of equality rows."""
        return self.Aeq.shape[0]

    def objective(self, x: ArrayLike) -> float:
        """Return ``x^T H x + g^T x``."""
        x = np.asarray(x, dtype=float)
        return float(x @ self.H @ x + self.g @ x)


class QpStatus(Enum):
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    ITERATION_LIMIT = 'iteration_limit'


@dataclass(frozen=True, eq=False)
class QpResult:
    """
    Result of :func:`solve_qp`. For infeasible problems ``x`` is filled with ``nan`` and
    ``objective`` is ``inf``.
    """
    x: np.ndarray
    objective: float
    status: QpStatus
    iterations: int = 0
    kkt_residual: float = np.nan
    eq_multipliers: Optional[np.ndarray] = None

    @property
    def is_optimal(self) -> bool:
        return self.status is QpStatus.OPTIMAL


def independent_rows(mat: ArrayLike, rtol: float = RANK_RTOL) -> np.ndarray:
    """
    Return (ascending) indices of a maximal set of linearly independent rows of ``mat``,
    determined by a QR decomposition with column pivoting of ``mat.T``.
    """
    mat = np.asarray(mat, dtype=float)
    if mat.shape[0] == 0 or mat.shape[1] == 0:
        return np.zeros(0, dtype=int)
    _, R, piv = scipy.linalg.qr(mat.T, mode='economic', pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.:
        return np.zeros(0, dtype=int)
    rank = int(np.sum(diag > rtol * diag[0]))
    return np.sort(piv[:rank])


def _phase_one(A: np.ndarray, b: np.ndarray, lo: np.ndarray, hi: np.ndarray
        ) -> Optional[np.ndarray]:
    if A.shape[0] == 0:
        return np.clip(np.zeros(lo.shape[0]), lo, hi)
    bounds = [(None if np.isinf(l) else l, None if np.isinf(h) else h) for l, h in zip(lo, hi)]
    res = linprog(np.zeros(lo.shape[0]), A_eq=A, b_eq=b, bounds=bounds, method='highs')
    if res.status != 0 or res.x is None:
        return None
    return np.clip(res.x, lo, hi)


def _ldl_solve(K: np.ndarray, rhs: np.ndarray) -> Optional[np.ndarray]:
    # symmetric indefinite (Bunch-Kaufman) factorization K = lu @ d @ lu.T
    lu, dmat, perm = scipy.linalg.ldl(K, lower=True)
    eig = np.abs(np.linalg.eigvalsh(dmat))
    if eig.min() <= PIVOT_RTOL * max(eig.max(), 1.):
        return None
    tri = lu[perm]
    y = scipy.linalg.solve_triangular(tri, rhs[perm], lower=True)
    z = np.linalg.solve(dmat, y)
    w = scipy.linalg.solve_triangular(tri.T, z, lower=False)
    sol = np.empty_like(w)
    sol[perm] = w
    return sol


def _eqp_direction(H2: np.ndarray, grad: np.ndarray, A: np.ndarray, free: np.ndarray
        ) -> Tuple[np.ndarray, np.ndarray, bool]:
    """
    Return a step ``p`` (zero on non-free variables) minimizing ``p^T H2 p / 2 + grad^T p``
    subject to ``A p = 0``, the equality multipliers ``nu`` (with ``grad + H2 p = A^T nu`` on
    free variables) and whether ``p`` is a descent ray of zero curvature.
    """
    d, m = grad.shape[0], A.shape[0]
    F = np.flatnonzero(free)
    p = np.zeros(d)
    if F.size == 0:
        nu = np.linalg.lstsq(A.T, grad, rcond=None)[0] if m else np.zeros(0)
        return p, nu, False
    Hf, Af, gf = H2[np.ix_(F, F)], A[:, F], grad[F]
    K = np.block([[Hf, Af.T], [Af, np.zeros((m, m))]]) if m else Hf
    rhs = np.concatenate([-gf, np.zeros(m)])
    sol = _ldl_solve(K, rhs)
    if sol is None:
        # singular reduced Hessian: follow a zero-curvature descent direction if there is one
        null = scipy.linalg.null_space(np.vstack([Hf, Af]))
        if null.size:
            r = null @ (null.T @ gf)
            if np.linalg.norm(r, np.inf) > 1e-12 * (1. + np.linalg.norm(gf, np.inf)):
                p[F] = -r
                return p, np.zeros(m), True
        sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    p[F] = sol[:F.size]
    return p, -sol[F.size:], False


def _active_set(
        H2: np.ndarray, c: np.ndarray, A: np.ndarray, x: np.ndarray,
        lo: np.ndarray, hi: np.ndarray, max_iter: int, active_tol: float, kkt_tol: float
        ) -> Tuple[np.ndarray, np.ndarray, dict, bool, int]:
    working = {}  # index -> -1 (at lower bound) or 1 (at upper bound)
    nu = np.zeros(A.shape[0])
    for it in range(max_iter):
        grad = H2 @ x + c
        free = np.ones(x.shape[0], dtype=bool)
        free[list(working)] = False
        p, nu, ray = _eqp_direction(H2, grad, A, free)
        if not ray and np.linalg.norm(p, np.inf) <= active_tol * (1. + np.linalg.norm(x, np.inf)):
            mu = grad - A.T @ nu
            drop, drop_val = None, -kkt_tol
            for i in sorted(working):
                signed = mu[i] if working[i] < 0 else -mu[i]
                if signed < drop_val:  # strict: lowest index wins ties
                    drop, drop_val = i, signed
            if drop is None:
                return x, nu, working, True, it + 1
            del working[drop]
            continue
        alpha, block = (np.inf if ray else 1.), None
        with np.errstate(divide='ignore', invalid='ignore'):
            t_lo = np.where(free & (p < 0.) & np.isfinite(lo), (lo - x) / p, np.inf)
            t_hi = np.where(free & (p > 0.) & np.isfinite(hi), (hi - x) / p, np.inf)
        t = np.maximum(np.minimum(t_lo, t_hi), 0.)
        i = int(np.argmin(t))  # first occurrence: lowest index among ties
        if t[i] < alpha:
            alpha, block = t[i], (i, -1 if t_lo[i] <= t_hi[i] else 1)
        if np.isinf(alpha):
            raise UnboundedQp('objective is unbounded below along a zero-curvature direction')
        x = x + alpha * p
        if block is not None:
            i, side = block
            x[i] = lo[i] if side < 0 else hi[i]
            working[i] = side
        x = np.clip(x, lo, hi)
    return x, nu, working, False, max_iter


def solve_qp(
        p: QpProblem,
        x0: Optional[ArrayLike] = None,
        drop_dependent_rows: bool = False,
        max_iter: Optional[int] = None,
        active_tol: float = ACTIVE_TOL,
        kkt_tol: float = KKT_TOL,
        ) -> QpResult:
    """
    Solve a convex QP with a primal active-set method.

    A feasible starting point is obtained by a phase-1 feasibility LP (HiGHS via
    :func:`scipy.optimize.linprog`) unless a feasible warm start ``x0`` is given. Each iteration
    solves the equality-constrained subproblem on the current working set of bounds through a
    symmetric indefinite factorization of its KKT matrix, then either takes a step (adding the
    first blocking bound, lowest index on ties) or drops the bound with the most negative
    multiplier (lowest index on ties).

    Parameters
    ----------
    p : :class:`QpProblem`
        The problem.
    x0 : array-like, optional
        Warm start; used if it is feasible (within ``1e-9``), ignored otherwise.
    drop_dependent_rows : bool, optional
        If ``True``, equality rows that are linear combinations of other rows (after eliminating
        variables with ``lo == hi``) are removed, and the problem is reported infeasible if they
        are inconsistent. If ``False``, such rows raise :class:`SingularKkt`.
        The default is ``False``.
    max_iter : int, optional
        Iteration cap. The default is ``50 * d``.
    active_tol : float, optional
        Steps below this (relative) size are treated as zero. The default is ``1e-9``.
    kkt_tol : float, optional
        Multipliers above ``-kkt_tol`` are accepted as nonnegative. The default is ``1e-8``.

    Returns
    -------
    :class:`QpResult`
    """
    # pylint: disable=too-many-locals
    d, m = p.d, p.m
    max_iter = max(50 * d, 50) if max_iter is None else max_iter
    fixed = p.lo == p.hi
    free = ~fixed
    x = np.where(fixed, p.lo, 0.)
    A_free = p.Aeq[:, free]
    b_free = p.beq - p.Aeq[:, fixed] @ p.lo[fixed]
    if not free.any():
        if np.all(np.abs(b_free) <= FEAS_TOL * (1. + np.max(np.abs(p.beq), initial=0.))):
            return QpResult(x=x, objective=p.objective(x), status=QpStatus.OPTIMAL,
                            kkt_residual=0., eq_multipliers=np.zeros(m))
        return QpResult(x=np.full(d, np.nan), objective=np.inf, status=QpStatus.INFEASIBLE)
    rows = np.arange(m)
    if m:
        rows = independent_rows(A_free)
        if rows.size < m and not drop_dependent_rows:
            raise SingularKkt(f'{m - rows.size} of {m} equality rows are linearly dependent')
    A_free, b_free = A_free[rows], b_free[rows]
    lo_f, hi_f = p.lo[free], p.hi[free]

    infeasible = QpResult(x=np.full(d, np.nan), objective=np.inf, status=QpStatus.INFEASIBLE)
    x_free = None
    if x0 is not None:
        x0 = np.asarray(x0, dtype=float)
        if (np.all(x0 >= p.lo - 1e-9) and np.all(x0 <= p.hi + 1e-9) and
                np.all(np.abs(p.Aeq @ x0 - p.beq) <= 1e-9)):
            x_free = np.clip(x0[free], lo_f, hi_f)
    if x_free is None:
        x_free = _phase_one(A_free, b_free, lo_f, hi_f)
        if x_free is None:
            return infeasible
    x[free] = x_free
    if m and np.max(np.abs(p.Aeq @ x - p.beq)) > FEAS_TOL * (1. + np.max(np.abs(p.beq))):
        # dropped rows are inconsistent
        return infeasible

    H2 = 2. * p.H[np.ix_(free, free)]
    c = p.g[free] + 2. * p.H[np.ix_(free, fixed)] @ p.lo[fixed]
    x_free, nu, working, converged, iterations = _active_set(
            H2, c, A_free, x_free, lo_f, hi_f, max_iter=max_iter,
            active_tol=active_tol, kkt_tol=kkt_tol)
    x[free] = x_free

    grad = H2 @ x_free + c
    residual = grad - A_free.T @ nu
    not_working = np.ones(x_free.shape[0], dtype=bool)
    not_working[list(working)] = False
    kkt_residual = float(np.max(np.abs(residual[not_working]), initial=0.))

    eq_multipliers = np.zeros(m)
    eq_multipliers[rows] = nu
    return QpResult(
            x=x, objective=p.objective(x),
            status=QpStatus.OPTIMAL if converged else QpStatus.ITERATION_LIMIT,
            iterations=iterations, kkt_residual=kkt_residual, eq_multipliers=eq_multipliers)
