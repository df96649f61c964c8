"""
Provides the swap neighborhood search refining a selection, :func:`run_vns`.
"""

from dataclasses import dataclass
from typing import Optional
import numpy as np
from ..model import BinarySelection, ProblemInstance
from .fitness import FitnessCache
from .pool import swap_one


@dataclass(frozen=True)
class VnsConfig:
    """
    The search stops after ``max_non_improving`` consecutive rejected proposals. A chain of
    swaps restarts from the incumbent after ``max_depth`` swaps.
    """
    max_non_improving: int = 100
    max_depth: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.max_non_improving < 1:
            raise ValueError('max_non_improving must be at least 1')
        if self.max_depth < 1:
            raise ValueError('max_depth must be at least 1')


def run_vns(
        inst: ProblemInstance,
        b0: BinarySelection,
        cfg: VnsConfig,
        rng: Optional[np.random.Generator] = None,
        cache: Optional[FitnessCache] = None,
        ) -> BinarySelection:
    """
    Refine ``b0`` by chained swaps: each proposal exchanges a uniformly chosen one and zero of
    the previous proposal, and becomes the incumbent if its fitness is strictly lower (which
    resets the count of rejected proposals). After ``cfg.max_depth`` rejected swaps in a row,
    the chain restarts from the incumbent, so the neighborhoods of one up to ``cfg.max_depth``
    swaps around the incumbent are visited in turn.

    Returns
    -------
    :class:`BinarySelection`
        The incumbent; its fitness is at most that of ``b0``.
    """
    if not inst.is_cardinality_feasible(b0):
        raise ValueError(f'{b0} violates the cardinality rows')
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    cache = FitnessCache(inst) if cache is None else cache
    incumbent, incumbent_f = b0, cache(b0)
    proposal, depth = b0, 0
    rejected = 0
    while rejected < cfg.max_non_improving:
        if depth == cfg.max_depth:
            proposal, depth = incumbent, 0
        proposal = swap_one(proposal, rng, inst.B)
        depth += 1
        f = cache(proposal)
        if f < incumbent_f:
            incumbent, incumbent_f = proposal, f
            depth = 0
            rejected = 0
        else:
            rejected += 1
    return incumbent
