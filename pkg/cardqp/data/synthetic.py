"""
Provides synthetic datasets in the OR-Library layout: :func:`random_universe`,
:func:`unconstrained_frontier`, and the writers :func:`format_port` and :func:`format_uef`.
"""

import numpy as np
from ..model import UefCurve
from ..qpsolve import QpProblem, solve_qp
from .port import AssetUniverse, covariance


def random_correlation(n: int, rng: np.random.Generator, factors: int = 3) -> np.ndarray:
    """
    Random correlation matrix from a ``factors``-factor model with idiosyncratic noise, which is
    positive-definite.
    """
    loadings = rng.normal(size=(n, factors))
    cov = loadings @ loadings.T + np.diag(rng.uniform(0.5, 1.5, size=n))
    scale = 1. / np.sqrt(np.diag(cov))
    corr = cov * np.outer(scale, scale)
    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, 1.)
    return corr


def random_universe(n: int, seed: int = 0) -> AssetUniverse:
    """
    Random universe with weekly-scale statistics: mean returns in ``[-0.002, 0.01]``,
    standard deviations in ``[0.02, 0.08]`` and a factor-model correlation.
    """
    rng = np.random.default_rng(seed)
    return AssetUniverse(
            mean_returns=rng.uniform(-0.002, 0.01, size=n),
            std_devs=rng.uniform(0.02, 0.08, size=n),
            correlation=random_correlation(n, rng))


def _min_variance(Q: np.ndarray, A: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = Q.shape[0]
    result = solve_qp(QpProblem(H=Q, g=np.zeros(n), Aeq=A, beq=b, lo=np.zeros(n),
                                hi=np.ones(n)), drop_dependent_rows=True)
    return result.x if result.is_optimal else None


def unconstrained_frontier(u: AssetUniverse, count: int = 100) -> UefCurve:
    """
    Compute the efficient frontier without cardinality constraint (weights in ``[0, 1]``
    summing to one) at ``count`` equally spaced returns from the minimum-variance portfolio's
    return to the largest asset return.
    """
    if count < 1:
        raise ValueError('count must be at least 1')
    Q = covariance(u)
    mu, ones = u.mean_returns, np.ones(u.n)
    x_min = _min_variance(Q, ones[None], np.ones(1))
    returns, variances = [], []
    for r in np.linspace(float(mu @ x_min), float(mu.max()), count):
        x = _min_variance(Q, np.stack([mu, ones]), np.array([r, 1.]))
        if x is not None and (not returns or r > returns[-1]):
            returns.append(float(r))
            variances.append(float(x @ Q @ x))
    return UefCurve(returns=returns, variances=variances)


def format_port(u: AssetUniverse) -> str:
    """Write a universe in the OR-Library ``port`` layout (upper triangle, 1-based)."""
    lines = [f'{u.n}']
    lines += [f'{m:.17g} {s:.17g}' for m, s in zip(u.mean_returns, u.std_devs)]
    lines += [f'{i + 1} {j + 1} {u.correlation[i, j]:.17g}'
              for i in range(u.n) for j in range(i, u.n)]
    return '\n'.join(lines) + '\n'


def format_uef(curve: UefCurve) -> str:
    """Write a frontier as ``mean_return variance`` lines."""
    return ''.join(f'{r:.17g} {v:.17g}\n' for r, v in curve.points)
