"""
Provides the initial solution pool: :class:`PoolConfig`, :class:`Pool`,
:func:`random_selection` and :func:`build_pool`.
"""

from __future__ import annotations
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple
import numpy as np
from ..model import BinarySelection, ProblemInstance
from .fitness import FitnessCache


class EmptyPool(RuntimeError):
    """Raised if every candidate of the initial pool is infeasible and no random ones are drawn."""


@dataclass(frozen=True)
class PoolConfig:
    """
    ``m_random`` uniform random selections and ``perturbations_per_relax`` single-swap variants
    of each relaxation selection are added to the pool.
    """
    m_random: int = 100
    perturbations_per_relax: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.m_random < 0:
            raise ValueError('m_random must be nonnegative')
        if self.perturbations_per_relax < 0:
            raise ValueError('perturbations_per_relax must be nonnegative')


@dataclass
class Pool:
    """Selections with their fitness (``inf`` for infeasible ones), in insertion order."""
    entries: List[Tuple[BinarySelection, float]] = field(default_factory=list)
    generation: int = 0

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def selections(self) -> List[BinarySelection]:
        return [b for b, _ in self.entries]

    @property
    def fitnesses(self) -> np.ndarray:
        return np.array([f for _, f in self.entries], dtype=float)

    def best(self) -> Tuple[BinarySelection, float]:
        """Entry with the lowest fitness (first one on ties)."""
        if not self.entries:
            raise ValueError('pool is empty')
        return self.entries[int(np.argmin(self.fitnesses))]

    def finite_entries(self) -> List[Tuple[BinarySelection, float]]:
        return [(b, f) for b, f in self.entries if np.isfinite(f)]


def random_selection(n: int, k: int, rng: np.random.Generator) -> BinarySelection:
    """
    Draw a selection with ``k`` ones uniformly from all ``C(n, k)`` selections, by a partial
    Fisher-Yates shuffle of the indices.
    """
    if not 0 <= k <= n:
        raise ValueError(f'k={k} must be in [0, {n}]')
    idx = np.arange(n)
    for i in range(k):
        j = int(rng.integers(i, n))
        idx[i], idx[j] = idx[j], idx[i]
    return BinarySelection.from_indices(n, idx[:k], k=k)


def swap_one(b: BinarySelection, rng: np.random.Generator, B: Optional[np.ndarray] = None
        ) -> BinarySelection:
    """
    Exchange a uniformly chosen one with a uniformly chosen zero (``b`` if there is none).
    If ``B`` is given, the zero is drawn among indices whose column of ``B`` equals that of the
    removed one, so ``B b`` is preserved.
    """
    ones, zeros = b.indices, np.flatnonzero(b.bits == 0)
    if ones.size == 0 or zeros.size == 0:
        return b
    out = ones[int(rng.integers(ones.size))]
    if B is not None:
        zeros = zeros[np.all(B[:, zeros] == B[:, [out]], axis=0)]
        if zeros.size == 0:
            return b
    bits = b.bits.copy()
    bits[out] = 0
    bits[zeros[int(rng.integers(zeros.size))]] = 1
    return BinarySelection(bits, k=b.popcount)


def _random_feasible_selection(inst: ProblemInstance, rng: np.random.Generator
        ) -> Optional[BinarySelection]:
    # greedy fill in random order for general cardinality rows
    counts = np.zeros(inst.m_b, dtype=np.int64)
    chosen = []
    for i in rng.permutation(inst.n):
        if np.all(counts + inst.B[:, i] <= inst.c_b):
            counts += inst.B[:, i]
            chosen.append(int(i))
    selection = BinarySelection.from_indices(inst.n, chosen)
    return selection if inst.is_cardinality_feasible(selection) else None


def build_pool(
        inst: ProblemInstance,
        relax_selections: Sequence[BinarySelection],
        cfg: PoolConfig,
        rng: Optional[np.random.Generator] = None,
        cache: Optional[FitnessCache] = None,
        ) -> Pool:
    """
    Build the initial pool: the relaxation selections, ``cfg.perturbations_per_relax``
    single-swap variants of each, and ``cfg.m_random`` uniform random selections, deduplicated
    (first occurrence kept) and tagged with their fitness.

    Parameters
    ----------
    inst : :class:`ProblemInstance`
        The instance.
    relax_selections : sequence of :class:`BinarySelection`
        Selections proposed by the relaxations; each must satisfy the cardinality rows.
    cfg : :class:`PoolConfig`
        Pool configuration.
    rng : :class:`numpy.random.Generator`, optional
        Random generator. The default is ``np.random.default_rng(cfg.seed)``.
    cache : :class:`FitnessCache`, optional
        Fitness evaluator to (re)use.

    Raises
    ------
    EmptyPool
        If all candidates are infeasible and ``cfg.m_random == 0``.
    """
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    cache = FitnessCache(inst) if cache is None else cache
    candidates = []
    for b in relax_selections:
        if not inst.is_cardinality_feasible(b):
            raise ValueError(f'relaxation selection {b} violates the cardinality rows')
        candidates.append(b)
        candidates.extend(swap_one(b, rng, inst.B) for _ in range(cfg.perturbations_per_relax))
    for _ in range(cfg.m_random):
        b = (random_selection(inst.n, inst.k, rng) if inst.k is not None
             else _random_feasible_selection(inst, rng))
        if b is not None:
            candidates.append(b)
    unique = list(dict.fromkeys(candidates))
    pool = Pool(entries=list(zip(unique, cache.evaluate_many(unique))))
    if cfg.m_random == 0 and not pool.finite_entries():
        raise EmptyPool('all candidate selections are infeasible')
    return pool
