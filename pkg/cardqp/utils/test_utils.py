"""
Utilities for testing.
"""

from typing import Optional, Tuple
import numpy as np
from ..model import MvSpec, ProblemInstance, build_from_mv
from ..data.synthetic import random_correlation


def get_random_pd_matrix(n: int, rng: np.random.Generator) -> np.ndarray:
    """
    Random positive-definite covariance matrix ``diag(sd) @ corr @ diag(sd)`` with a random
    factor-model correlation ``corr`` and standard deviations ``sd`` in ``[0.02, 0.08]``.
    """
    sd = rng.uniform(0.02, 0.08, size=n)
    return random_correlation(n, rng) * np.outer(sd, sd)


def get_random_mv_instance(
        n: int, k: int, rng: np.random.Generator,
        lower: float = 0.01, upper: float = 1., target_return: Optional[float] = None
        ) -> Tuple[ProblemInstance, np.ndarray]:
    """
    Random mean-variance instance. By default the target return is that of the equally weighted
    portfolio of a random ``k``-subset, so the instance is feasible if
    ``lower <= 1 / k <= upper``.

    Returns
    -------
    inst : :class:`ProblemInstance`
        The instance.
    returns : ndarray
        The mean returns.
    """
    returns = rng.uniform(-0.002, 0.01, size=n)
    Q = get_random_pd_matrix(n, rng)
    if target_return is None:
        target_return = float(np.mean(returns[rng.choice(n, size=k, replace=False)]))
    inst = build_from_mv(MvSpec(returns=returns, target_return=target_return, k=k, lower=lower,
                                upper=upper), Q)
    return inst, returns
