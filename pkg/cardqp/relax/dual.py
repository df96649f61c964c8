"""
Provides the Lagrangian relaxations of the model: the dual function :func:`dual_objective`, its
diagonalized and penalized variant :func:`augm_objective`, the diagonal lower-bound matrix
:func:`compute_phi`, and the supergradient ascent routines :func:`solve_dual` and
:func:`solve_augm`.

Pricing all constraints into the objective with multipliers ``lam_a`` (``A x = c_a``),
``lam_b`` (``B b = c_b``), ``lam_l >= 0`` (``L b <= x``) and ``lam_u >= 0`` (``x <= U b``)
separates the inner minimization over ``x`` (closed form since ``Q`` is positive-definite)
from the one over ``b`` (a selection of the most negative coefficients).
"""

from __future__ import annotations
from dataclasses import dataclass
from math import sqrt
from typing import Optional, Tuple, Any
try:
    from numpy.typing import ArrayLike
except ImportError:
    ArrayLike = Any
import numpy as np
import torch
from torch import Tensor
from tqdm import tqdm
from ..model import ProblemInstance
from ..utils import get_summary_writer
from .outcome import RelaxationOutcome, RelaxationKind, discretize

MAX_CONDITION = 1e12


class NearSingularQ(ValueError):
    """Raised if ``Q`` is too ill-conditioned to be inverted reliably."""


@dataclass(frozen=True, eq=False)
class DualVariables:
    """Lagrange multipliers; ``lam_l`` and ``lam_u`` are nonnegative."""
    lam_a: np.ndarray
    lam_b: np.ndarray
    lam_l: np.ndarray
    lam_u: np.ndarray

    def __post_init__(self):
        for name in ('lam_a', 'lam_b', 'lam_l', 'lam_u'):
            arr = np.array(getattr(self, name), dtype=float).reshape(-1)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.lam_l < 0.) or np.any(self.lam_u < 0.):
            raise ValueError('lam_l and lam_u must be nonnegative')

    @classmethod
    def zeros(cls, inst: ProblemInstance) -> DualVariables:
        return cls(np.zeros(inst.m_a), np.zeros(inst.m_b), np.zeros(inst.n), np.zeros(inst.n))

    def scaled(self, factor: float) -> DualVariables:
        """Return the multipliers multiplied by a nonnegative ``factor``."""
        return DualVariables(
                factor * self.lam_a, factor * self.lam_b, factor * self.lam_l, factor * self.lam_u)


@dataclass(frozen=True)
class DualAscentParams:
    """
    Parameters of the supergradient ascent.

    ``max_iters`` ascent steps of size ``step0 / sqrt(t)`` are taken; positive entries of the
    coefficient vector of ``b`` are penalized by ``penalty_weight`` times their squares. The
    nonnegative multipliers start at ``init_scale``-sized random values drawn with ``seed``.
    """
    max_iters: int = 500
    step0: float = 1.
    penalty_weight: float = 10.
    seed: int = 0
    init_scale: float = 1e-3

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError('max_iters must be at least 1')
        if self.step0 <= 0.:
            raise ValueError('step0 must be positive')
        if self.penalty_weight < 0.:
            raise ValueError('penalty_weight must be nonnegative')
        if self.init_scale < 0.:
            raise ValueError('init_scale must be nonnegative')


def compute_phi(Q: ArrayLike) -> np.ndarray:
    """
    Return the diagonal matrix ``Phi`` with ``Phi[j, j] = 1 / sum_k |Q^{-1}[j, k]|``, which
    satisfies ``0 < Phi <= Q`` in the Loewner order.

    Raises
    ------
    NearSingularQ
        If the condition number of ``Q`` exceeds ``1e12``.
    """
    Q = np.asarray(Q, dtype=float)
    cond = np.linalg.cond(Q)
    if not cond <= MAX_CONDITION:
        raise NearSingularQ(f'condition number of Q is {cond}')
    return np.diag(1. / np.abs(np.linalg.inv(Q)).sum(axis=1))


def _tensor(arr: ArrayLike) -> Tensor:
    return torch.tensor(np.asarray(arr, dtype=float), dtype=torch.float64)


class LagrangianDual:
    """
    Dual function of an instance, evaluated with torch so that supergradients are available by
    autograd. The Cholesky factor of ``Q`` is computed once on construction.

    With ``use_phi=False`` and ``lambda_g=0.`` this is the Lagrangian dual function (Dual model);
    with ``use_phi=True`` the quadratic term uses :func:`compute_phi` and ``lambda_g`` weights the
    penalty ``|A x_hat - c_a|^2`` (Augm model).
    """

    def __init__(self, inst: ProblemInstance, use_phi: bool = False, lambda_g: float = 0.):
        self.inst = inst
        self.lambda_g = lambda_g
        self.Q = _tensor(inst.Q)
        self.chol = torch.linalg.cholesky(self.Q)
        self.quad = _tensor(compute_phi(inst.Q)) if use_phi else self.Q
        self.q = _tensor(inst.q)
        self.A = _tensor(inst.A)
        self.c_a = _tensor(inst.c_a)
        self.B = _tensor(inst.B)
        self.c_b = _tensor(inst.c_b)
        self.lower = _tensor(inst.lower)
        self.upper = _tensor(inst.upper)
        self.k = inst.k

    def x_hat(self, lam_a: Tensor, lam_l: Tensor, lam_u: Tensor) -> Tensor:
        """Return ``-Q^{-1} (q + A^T lam_a - lam_l + lam_u) / 2``."""
        w = self.q + self.A.T @ lam_a - lam_l + lam_u
        return -0.5 * torch.cholesky_solve(w[:, None], self.chol)[:, 0]

    def b_coefficients(self, lam_b: Tensor, lam_l: Tensor, lam_u: Tensor) -> Tensor:
        """Return the coefficient vector ``B^T lam_b + L lam_l - U lam_u`` of ``b``."""
        return self.B.T @ lam_b + self.lower * lam_l - self.upper * lam_u

    def b_term(self, coef: Tensor) -> Tensor:
        """
        Minimum of ``coef @ b`` over binary ``b``: positive coefficients are clamped to zero,
        and for a single all-ones cardinality row at most ``k`` (the most negative) entries
        are taken.
        """
        neg = torch.clamp(coef, max=0.)
        if self.k is not None:
            return torch.topk(neg, self.k, largest=False).values.sum()
        return neg.sum()

    def __call__(self, lam_a: Tensor, lam_b: Tensor, lam_l: Tensor, lam_u: Tensor) -> Tensor:
        x = self.x_hat(lam_a, lam_l, lam_u)
        value = (-(x @ self.quad @ x) + self.b_term(self.b_coefficients(lam_b, lam_l, lam_u))
                 - lam_a @ self.c_a - lam_b @ self.c_b)
        if self.lambda_g:
            value = value + self.lambda_g * ((self.A @ x - self.c_a) ** 2).sum()
        return value

    def evaluate(self, lam: DualVariables) -> float:
        """Evaluate at numpy multipliers."""
        with torch.no_grad():
            return self(_tensor(lam.lam_a), _tensor(lam.lam_b), _tensor(lam.lam_l),
                        _tensor(lam.lam_u)).item()

    def jacobi_scales(self) -> Tuple[Tensor, Tensor, Tensor]:
        """
        Return curvature scales of the smooth part of the dual function: the inverse of the
        ``lam_a`` block ``A Q^{-1} A^T / 2`` (pseudo-inverse, for nearly collinear rows), and
        diagonal scales for ``lam_b`` and for ``lam_l``/``lam_u`` (``diag(Q^{-1}) / 2``).
        """
        Q_inv = torch.cholesky_inverse(self.chol)
        block = 0.5 * self.A @ Q_inv @ self.A.T
        block_inv = (torch.linalg.pinv(block, hermitian=True) if block.numel()
                     else torch.zeros_like(block))
        diag = 0.5 * torch.diagonal(Q_inv)
        return block_inv, diag.mean().expand(self.B.shape[0]), diag


def dual_objective(inst: ProblemInstance, lam: DualVariables) -> float:
    """
    Evaluate the Lagrangian dual function
    ``-x_hat^T Q x_hat + min_b (B^T lam_b + L lam_l - U lam_u) b - lam_a c_a - lam_b c_b``
    with ``x_hat = -Q^{-1} (q + A^T lam_a - lam_l + lam_u) / 2``. Its value is a lower bound of
    the optimum of the instance for every ``lam``.
    """
    return LagrangianDual(inst).evaluate(lam)


def augm_objective(inst: ProblemInstance, lam: DualVariables, lambda_g: float = 1e-7) -> float:
    """
    Evaluate the augmented variant of :func:`dual_objective`: the quadratic term uses
    ``Phi = compute_phi(Q)`` (``x_hat`` still defined through ``Q``) and
    ``lambda_g * |A x_hat - c_a|^2`` is added.
    """
    return LagrangianDual(inst, use_phi=True, lambda_g=lambda_g).evaluate(lam)


def _dual_ascent(
        dual: LagrangianDual,
        params: DualAscentParams,
        kind: RelaxationKind,
        log_path: Optional[str] = None,
        show_pbar: bool = False,
        ) -> RelaxationOutcome:
    # pylint: disable=too-many-locals
    inst = dual.inst
    generator = torch.Generator().manual_seed(params.seed)
    block_inv, scale_b, scale_lu = dual.jacobi_scales()

    def init_nonneg():
        return params.init_scale * torch.rand(
                inst.n, generator=generator, dtype=torch.float64) / scale_lu

    lam_a = torch.nn.Parameter(torch.zeros(inst.m_a, dtype=torch.float64))
    lam_b = torch.nn.Parameter(torch.zeros(inst.m_b, dtype=torch.float64))
    lam_l = torch.nn.Parameter(init_nonneg())
    lam_u = torch.nn.Parameter(init_nonneg())
    lams = (lam_a, lam_b, lam_l, lam_u)

    optimizer = torch.optim.SGD(lams, lr=params.step0, maximize=True)
    scheduler = torch.optim.lr_scheduler.LambdaLR(optimizer, lambda t: 1. / sqrt(t + 1))
    writer = get_summary_writer(log_path, f'{kind.value}_ascent')

    best_value, best_lams = -np.inf, None
    with tqdm(range(params.max_iters + 1), desc=f'{kind.value}_ascent', disable=not show_pbar,
            miniters=max(params.max_iters // 100, 1)) as pbar:
        for i in pbar:
            optimizer.zero_grad()
            value = dual(*lams)
            if value.item() > best_value:
                best_value = value.item()
                best_lams = tuple(lam.detach().clone() for lam in lams)
            if writer is not None:
                writer.add_scalar('dual_value', value.item(), i)
            if i == params.max_iters:
                break  # the last iterate is only evaluated
            coef = dual.b_coefficients(lam_b, lam_l, lam_u)
            objective = value - params.penalty_weight * (torch.clamp(coef, min=0.) ** 2).sum()
            objective.backward()
            with torch.no_grad():
                # scale supergradients by the curvature of the smooth part
                lam_a.grad.copy_(block_inv @ lam_a.grad)
                lam_b.grad.div_(scale_b)
                lam_l.grad.div_(scale_lu)
                lam_u.grad.div_(scale_lu)
            optimizer.step()
            scheduler.step()
            with torch.no_grad():
                lam_l.clamp_(min=0.)
                lam_u.clamp_(min=0.)
            pbar.set_postfix({'dual_value': best_value}, refresh=False)
    if writer is not None:
        writer.close()

    best_a, best_b, best_l, best_u = best_lams
    with torch.no_grad():
        coef = dual.b_coefficients(best_b, best_l, best_u)
        x_hat = dual.x_hat(best_a, best_l, best_u)
    neg_coef = -coef.numpy()
    return RelaxationOutcome(
            kind=kind, selection=discretize(neg_coef, inst), continuous_b=neg_coef,
            x_hat=x_hat.numpy(), bound=best_value, iterations=params.max_iters)


def solve_dual(
        inst: ProblemInstance,
        params: Optional[DualAscentParams] = None,
        log_path: Optional[str] = None,
        show_pbar: bool = False,
        ) -> RelaxationOutcome:
    """
    Maximize :func:`dual_objective` by projected supergradient ascent and select the indices of
    the largest negated coefficients of ``b`` at the best multipliers found.

    The supergradients are scaled by the (inverse) curvature of the smooth part of the dual
    function (see :meth:`LagrangianDual.jacobi_scales`), steps follow ``step0 / sqrt(t)`` via a
    :class:`torch.optim.lr_scheduler.LambdaLR` schedule, ``lam_l`` and ``lam_u`` are clamped at
    zero after each step, and the sign constraint on the coefficients of ``b`` is enforced softly
    by a quadratic penalty.

    Parameters
    ----------
    inst : :class:`ProblemInstance`
        The instance.
    params : :class:`DualAscentParams`, optional
        Ascent parameters. The default is ``DualAscentParams()``.
    log_path : str, optional
        If specified, the dual value per iteration is logged with tensorboardX to a sub-folder of
        ``log_path``.
    show_pbar : bool, optional
        Whether to show a tqdm progress bar. The default is ``False``.

    Returns
    -------
    :class:`RelaxationOutcome`
        With ``bound`` the best dual value, a lower bound of the optimum.
    """
    params = params or DualAscentParams()
    return _dual_ascent(LagrangianDual(inst), params, RelaxationKind.DUAL,
                        log_path=log_path, show_pbar=show_pbar)


def solve_augm(
        inst: ProblemInstance,
        lambda_g: float = 1e-7,
        params: Optional[DualAscentParams] = None,
        log_path: Optional[str] = None,
        show_pbar: bool = False,
        ) -> RelaxationOutcome:
    """
    Like :func:`solve_dual`, but ascending :func:`augm_objective` with penalty weight
    ``lambda_g``.
    """
    if lambda_g < 0.:
        raise ValueError('lambda_g must be nonnegative')
    params = params or DualAscentParams()
    return _dual_ascent(LagrangianDual(inst, use_phi=True, lambda_g=lambda_g), params,
                        RelaxationKind.AUGM, log_path=log_path, show_pbar=show_pbar)
