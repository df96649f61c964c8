"""
Provides :class:`UefCurve`, the unconstrained efficient frontier used as reference line.
"""

from __future__ import annotations
from dataclasses import dataclass
from typing import List, Tuple, Any
try:
    from numpy.typing import ArrayLike
except ImportError:
    ArrayLike = Any
import numpy as np
from .problem_instance import Diagnostic


@dataclass(frozen=True, eq=False)
class UefCurve:
    """
    Points ``(expected_return, variance)`` with strictly increasing returns.
    """
    returns: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        returns = np.array(self.returns, dtype=float).reshape(-1)
        variances = np.array(self.variances, dtype=float).reshape(-1)
        if returns.shape != variances.shape:
            raise ValueError('returns and variances must have the same length')
        if returns.size == 0:
            raise ValueError('curve needs at least one point')
        if np.any(np.diff(returns) <= 0.):
            raise ValueError('returns must be strictly increasing')
        for arr in (returns, variances):
            arr.setflags(write=False)
        object.__setattr__(self, 'returns', returns)
        object.__setattr__(self, 'variances', variances)

    def __len__(self) -> int:
        return self.returns.shape[0]

    @property
    def points(self) -> List[Tuple[float, float]]:
        return list(zip(self.returns.tolist(), self.variances.tolist()))

    @property
    def return_domain(self) -> Tuple[float, float]:
        return float(self.returns[0]), float(self.returns[-1])

    def variance_at(self, target_return: float) -> float:
        """Linear interpolation of the variance at ``target_return``."""
        return float(np.interp(target_return, self.returns, self.variances))

    def return_at(self, variance: float) -> float:
        """
        Inverse interpolation: the return at which the curve reaches ``variance``, searched on
        the longest trailing segment with non-decreasing variance.
        """
        start = self._efficient_start()
        return float(np.interp(variance, self.variances[start:], self.returns[start:]))

    def variance_domain(self) -> Tuple[float, float]:
        """Variance range of the segment used by :meth:`return_at`."""
        start = self._efficient_start()
        return float(self.variances[start]), float(self.variances[-1])

    def _efficient_start(self) -> int:
        decreasing = np.flatnonzero(np.diff(self.variances) < 0.)
        return int(decreasing[-1]) + 1 if decreasing.size else 0

    def validate(self) -> List[Diagnostic]:
        """Report each point where the variance decreases along increasing return."""
        return [Diagnostic('DecreasingVariance', (int(i) + 1,),
                           float(self.variances[i + 1] - self.variances[i]))
                for i in np.flatnonzero(np.diff(self.variances) < 0.)]
