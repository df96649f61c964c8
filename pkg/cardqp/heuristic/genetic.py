"""
Provides the genetic algorithm over selections: :class:`GaConfig`, the operators
:func:`ga_select`, :func:`spread_ok`, :func:`crossover`, :func:`mutate`, and the loop
:func:`run_ga`.
"""

from __future__ import annotations
from dataclasses import dataclass
from math import ceil
from typing import List, Optional, Tuple, Union
import numpy as np
from tqdm import tqdm
from ..model import BinarySelection, ProblemInstance
from ..utils import get_summary_writer
from .fitness import FitnessCache
from .pool import Pool, swap_one


class DegenerateSpread(ValueError):
    """Raised if the spread of a pool is undefined (no finite or no positive best fitness)."""


@dataclass(frozen=True)
class GaConfig:
    """
    The ``retain_fraction`` best entries are kept per generation and the population is refilled
    to ``population_size`` (the initial pool size if ``None``) with children, each mutated with
    probability ``mutation_prob``. The loop stops once the relative fitness spread of the
    retained entries is at most ``spread_threshold`` or after ``max_generations``.
    """
    retain_fraction: float = 0.5
    mutation_prob: float = 0.1
    spread_threshold: float = 0.01
    max_generations: int = 200
    population_size: Optional[int] = None

    def __post_init__(self):
        if not 0. < self.retain_fraction <= 1.:
            raise ValueError('retain_fraction must be in (0, 1]')
        if not 0. <= self.mutation_prob <= 1.:
            raise ValueError('mutation_prob must be in [0, 1]')
        if self.spread_threshold <= 0.:
            raise ValueError('spread_threshold must be positive')
        if self.max_generations < 0:
            raise ValueError('max_generations must be nonnegative')
        if self.population_size is not None and self.population_size < 2:
            raise ValueError('population_size must be at least 2')


def ga_select(pool: Pool, retain_fraction: float) -> Pool:
    """
    Keep the ``ceil(retain_fraction * len(pool))`` entries of lowest fitness (at least two if
    the pool has two), ties broken by insertion order.
    """
    if not pool.entries:
        raise ValueError('pool is empty')
    keep = max(ceil(retain_fraction * len(pool)), min(2, len(pool)))
    order = np.argsort(pool.fitnesses, kind='stable')[:keep]
    return Pool(entries=[pool.entries[i] for i in order], generation=pool.generation)


def spread_ok(pool: Pool, threshold: float) -> bool:
    """
    Whether ``(max - min) / min <= threshold`` for the finite fitness values of ``pool``.

    Raises
    ------
    DegenerateSpread
        If there is no finite fitness or the minimum is not positive.
    """
    finite = np.array([f for _, f in pool.finite_entries()])
    if finite.size == 0:
        raise DegenerateSpread('pool has no finite fitness')
    best = finite.min()
    if best <= 0.:
        raise DegenerateSpread(f'best fitness {best} is not positive')
    return bool((finite.max() - best) / best <= threshold)


def crossover(father: BinarySelection, mother: BinarySelection, k: int, rng: np.random.Generator
        ) -> BinarySelection:
    """
    Keep the ones shared by both parents and fill the remaining ``k - |common|`` ones uniformly
    without replacement from the indices where the parents differ.
    """
    if father.popcount != k or mother.popcount != k:
        raise ValueError(f'parents must have {k} ones')
    common = father.bits & mother.bits
    differ = np.flatnonzero(father.bits ^ mother.bits)
    bits = common.copy()
    need = k - int(common.sum())
    if need:
        bits[rng.choice(differ, size=need, replace=False)] = 1
    return BinarySelection(bits, k=k)


def mutate(b: BinarySelection, prob: float, rng: np.random.Generator,
           B: Optional[np.ndarray] = None) -> BinarySelection:
    """With probability ``prob`` swap a uniformly chosen one with a uniformly chosen zero."""
    if rng.random() >= prob:
        return b
    return swap_one(b, rng, B)


def _breed(inst: ProblemInstance, parents: List[Tuple[BinarySelection, float]],
           mutation_prob: float, rng: np.random.Generator) -> BinarySelection:
    i, j = rng.choice(len(parents), size=2, replace=False)
    father, mother = parents[i][0], parents[j][0]
    if father.popcount == mother.popcount:
        child = crossover(father, mother, father.popcount, rng)
    else:
        child = father
    child = mutate(child, mutation_prob, rng, inst.B)
    return child if inst.is_cardinality_feasible(child) else father


def run_ga(
        inst: ProblemInstance,
        pool: Pool,
        cfg: GaConfig,
        rng: np.random.Generator,
        cache: Optional[FitnessCache] = None,
        return_history: bool = False,
        log_path: Optional[str] = None,
        show_pbar: bool = False,
        ) -> Union[BinarySelection, Tuple[BinarySelection, List[float]]]:
    """
    Evolve ``pool`` and return the best selection seen.

    Each generation keeps the best entries (:func:`ga_select`) and stops if their spread is
    within ``cfg.spread_threshold`` (:func:`spread_ok`; a degenerate spread counts as not
    within). Otherwise children are bred until the population is back at its size: two distinct
    parents are drawn uniformly from the retained entries with finite fitness (from all
    retained entries if fewer than two are finite), crossed over and mutated. Children already
    in the population are discarded, with at most ``2 * need`` draws per generation. All random
    draws of a generation precede the (possibly parallel) evaluation of its children.

    Parameters
    ----------
    inst : :class:`ProblemInstance`
        The instance.
    pool : :class:`Pool`
        Initial pool with fitness values.
    cfg : :class:`GaConfig`
        GA configuration.
    rng : :class:`numpy.random.Generator`
        Random generator.
    cache : :class:`FitnessCache`, optional
        Fitness evaluator to (re)use.
    return_history : bool, optional
        If ``True``, also return the best fitness after each generation (starting with the
        initial pool's best). The default is ``False``.
    log_path : str, optional
        If specified, the best fitness and the population size per generation are logged with
        tensorboardX.
    show_pbar : bool, optional
        Whether to show a tqdm progress bar. The default is ``False``.

    Returns
    -------
    best : :class:`BinarySelection`
        Selection with the lowest fitness seen.
    history : list of float
        Only returned if ``return_history``.
    """
    # pylint: disable=too-many-locals
    cache = FitnessCache(inst) if cache is None else cache
    best_b, best_f = pool.best()
    history = [best_f]
    population_size = cfg.population_size or len(pool)
    writer = get_summary_writer(log_path, 'ga') if len(pool.finite_entries()) >= 2 else None

    if len(pool.finite_entries()) >= 2:
        for _ in tqdm(range(cfg.max_generations), desc='ga', disable=not show_pbar):
            retained = ga_select(pool, cfg.retain_fraction)
            try:
                if spread_ok(retained, cfg.spread_threshold):
                    break
            except DegenerateSpread:
                pass
            finite = retained.finite_entries()
            parents = finite if len(finite) >= 2 else retained.entries
            entries = dict(retained.entries)
            need = max(population_size - len(entries), 1)
            children = []
            for _ in range(2 * need):
                child = _breed(inst, parents, cfg.mutation_prob, rng)
                if child not in entries and child not in children:
                    children.append(child)
                    if len(children) == need:
                        break
            for child, f in zip(children, cache.evaluate_many(children)):
                entries[child] = f
                if f < best_f:
                    best_b, best_f = child, f
            pool = Pool(entries=list(entries.items()), generation=pool.generation + 1)
            history.append(best_f)
            if writer is not None:
                writer.add_scalar('best_fitness', best_f, pool.generation)
                writer.add_scalar('population_size', len(pool), pool.generation)
    if writer is not None:
        writer.close()
    return (best_b, history) if return_history else best_b
