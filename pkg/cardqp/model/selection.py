"""
Provides :class:`BinarySelection`, the bit-vector ``b`` of selected variables.
"""

from __future__ import annotations
from typing import Iterable, List, Optional, Any
try:
    from numpy.typing import ArrayLike
except ImportError:
    ArrayLike = Any
import numpy as np


class CardinalityError(ValueError):
    """Raised if a selection does not have the required number of ones."""


class BinarySelection:
    """
    Immutable bit-vector of length ``n``.

    Instances are hashable (by their bits) so they can be used as keys, e.g. for fitness
    memoization and pool deduplication.
    """

    __slots__ = ('_bits', '_key')

    def __init__(self, bits: ArrayLike, k: Optional[int] = None):
        """
        Parameters
        ----------
        bits : array-like
            One-dimensional array of zeros and ones.
        k : int, optional
            If specified, the number of ones is checked to equal ``k``, raising a
            :class:`CardinalityError` otherwise.
        """
        arr = np.asarray(bits)
        if arr.ndim != 1:
            raise ValueError(f'selection must be one-dimensional, got shape {arr.shape}')
        if not np.all((arr == 0) | (arr == 1)):
            raise ValueError('selection entries must be 0 or 1')
        arr = arr.astype(np.int8)
        if k is not None and int(arr.sum()) != k:
            raise CardinalityError(f'selection has {int(arr.sum())} ones, expected {k}')
        arr.setflags(write=False)
        self._bits = arr
        self._key = arr.tobytes()

    @classmethod
    def from_indices(
            cls, n: int, indices: Iterable[int], k: Optional[int] = None) -> BinarySelection:
        """Return the selection of length ``n`` with ones at ``indices``."""
        bits = np.zeros(n, dtype=np.int8)
        bits[list(indices)] = 1
        return cls(bits, k=k)

    @property
    def bits(self) -> np.ndarray:
        """Read-only ``int8`` array of the bits."""
        return self._bits

    @property
    def n(self) -> int:
        """Length of the bit-vector."""
        return self._bits.shape[0]

    @property
    def popcount(self) -> int:
        """Number of ones."""
        return int(self._bits.sum())

    @property
    def indices(self) -> np.ndarray:
        """Indices of the ones, ascending."""
        return np.flatnonzero(self._bits)

    @property
    def mask(self) -> np.ndarray:
        """Boolean mask of the ones."""
        return self._bits.astype(bool)

    def satisfies(self, B: ArrayLike, c_b: ArrayLike) -> bool:
        """Whether ``B @ bits == c_b``."""
        return bool(np.all(np.asarray(B) @ self._bits == np.asarray(c_b)))

    def tolist(self) -> List[int]:
        return self._bits.tolist()

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinarySelection):
            return NotImplemented
        return self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f'BinarySelection({"".join(str(b) for b in self._bits.tolist())})'
