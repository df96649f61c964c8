"""
Provides the end-to-end heuristic :func:`solve_pipeline`: relaxations, initial pool, genetic
algorithm, neighborhood search and a final restricted QP.
"""

from typing import List, Optional, Tuple, Union
import warnings
import numpy as np
from ..model import ProblemInstance, WeightedSolution
from ..relax import (
        RelaxationOutcome, RelaxationInfeasible, RelaxationNotConverged, NearSingularQ,
        DualAscentParams, solve_line, solve_dual, solve_augm)
from .fitness import FitnessCache
from .pool import PoolConfig, EmptyPool, build_pool
from .genetic import GaConfig, run_ga
from .neighborhood_search import VnsConfig, run_vns


class PipelineInfeasible(RuntimeError):
    """Raised if no candidate selection yields a feasible restricted QP."""


def run_relaxations(
        inst: ProblemInstance,
        dual_params: Optional[DualAscentParams] = None,
        lambda_g: float = 1e-7,
        show_pbar: bool = False,
        ) -> List[RelaxationOutcome]:
    """
    Run the Line, Dual and Augm relaxations; a relaxation that fails is skipped with a warning.
    """
    dual_params = dual_params or DualAscentParams()
    runs = [
        ('line', lambda: solve_line(inst)),
        ('dual', lambda: solve_dual(inst, dual_params, show_pbar=show_pbar)),
        ('augm', lambda: solve_augm(inst, lambda_g, dual_params, show_pbar=show_pbar)),
    ]
    outcomes = []
    for name, run in runs:
        try:
            outcomes.append(run())
        except (RelaxationInfeasible, RelaxationNotConverged, NearSingularQ) as e:
            warnings.warn(f'skipping {name} relaxation: {e}')
    return outcomes


def solve_pipeline(
        inst: ProblemInstance,
        pool_cfg: Optional[PoolConfig] = None,
        ga_cfg: Optional[GaConfig] = None,
        vns_cfg: Optional[VnsConfig] = None,
        dual_params: Optional[DualAscentParams] = None,
        lambda_g: float = 1e-7,
        seed: Optional[int] = None,
        jobs: int = 1,
        relaxations: Optional[List[RelaxationOutcome]] = None,
        return_relaxations: bool = False,
        show_pbar: bool = False,
        log_path: Optional[str] = None,
        ) -> Union[WeightedSolution, Tuple[WeightedSolution, List[RelaxationOutcome]]]:
    """
    Solve an instance heuristically.

    The selections of the Line, Dual and Augm relaxations seed the initial pool
    (:func:`build_pool`), which is evolved by :func:`run_ga`; the GA result is refined by
    :func:`run_vns` and its weights are computed by the restricted QP.

    Parameters
    ----------
    inst : :class:`ProblemInstance`
        The instance.
    pool_cfg, ga_cfg, vns_cfg : optional
        Component configurations; defaults are ``PoolConfig()``, ``GaConfig()``,
        ``VnsConfig()``.
    dual_params : :class:`DualAscentParams`, optional
        Ascent parameters of the Dual and Augm relaxations.
    lambda_g : float, optional
        Penalty weight of the Augm relaxation. The default is ``1e-7``.
    seed : int, optional
        Root seed; independent random streams for the pool, the GA and the search are spawned
        from it. The default is ``pool_cfg.seed``.
    jobs : int, optional
        Number of worker threads for fitness evaluation of the initial pool and of the GA
        children. The default is 1.
    relaxations : list of :class:`RelaxationOutcome`, optional
        Precomputed relaxation outcomes; by default they are computed with
        :func:`run_relaxations`.
    return_relaxations : bool, optional
        If ``True``, also return the relaxation outcomes. The default is ``False``.
    show_pbar : bool, optional
        Whether to show tqdm progress bars. The default is ``False``.
    log_path : str, optional
        If specified, GA progress is logged with tensorboardX.

    Raises
    ------
    PipelineInfeasible
        If no candidate selection yields a feasible restricted QP.
    """
    pool_cfg = pool_cfg or PoolConfig()
    ga_cfg = ga_cfg or GaConfig()
    vns_cfg = vns_cfg or VnsConfig()
    seed = pool_cfg.seed if seed is None else seed
    pool_rng, ga_rng, vns_rng = (
            np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3))

    outcomes = relaxations if relaxations is not None else run_relaxations(
            inst, dual_params, lambda_g=lambda_g, show_pbar=show_pbar)
    cache = FitnessCache(inst, jobs=jobs)
    try:
        pool = build_pool(inst, [o.selection for o in outcomes], pool_cfg, rng=pool_rng,
                          cache=cache)
    except EmptyPool as e:
        raise PipelineInfeasible(str(e)) from e
    if not pool.finite_entries():
        raise PipelineInfeasible('no selection in the initial pool is feasible')
    best = run_ga(inst, pool, ga_cfg, ga_rng, cache=cache, log_path=log_path,
                  show_pbar=show_pbar)
    refined = run_vns(inst, best, vns_cfg, rng=vns_rng, cache=cache)
    solution = cache.solution(refined)
    if not solution.is_optimal:
        raise PipelineInfeasible('refined selection is infeasible')
    return (solution, outcomes) if return_relaxations else solution
