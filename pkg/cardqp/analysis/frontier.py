"""
Provides efficient-frontier sweeps over target returns (:func:`sweep_frontier`) and the
percentage error of frontier points against the unconstrained frontier
(:func:`percentage_error`).
"""

from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple, Union
import numpy as np
from tqdm import tqdm
from ..model import BinarySelection, MvSpec, UefCurve, build_from_mv
from ..relax import RelaxationKind, DualAscentParams
from ..heuristic import (
        PoolConfig, GaConfig, VnsConfig, PipelineInfeasible, run_relaxations, solve_pipeline,
        solve_restricted)
from ..exact import branch_and_bound
from ..data import PortDataset
from .gaps import GapReport, ReferenceSolution, compute_gap_report, summarize

DOMAIN_TOL = 1e-12


class OutOfRange(ValueError):
    """Raised if a target return lies outside the return domain of the frontier."""


class DatasetMissing(ValueError):
    """Raised if a sweep lacks its dataset or frontier."""


class FrontierMethod(Enum):
    LINE = 'line'
    DUAL = 'dual'
    AUGM = 'augm'
    OURS = 'ours'
    EXACT = 'exact'


class PointStatus(Enum):
    OK = 'ok'
    INFEASIBLE = 'infeasible'


RELAXATION_METHODS = {
    RelaxationKind.LINE: FrontierMethod.LINE,
    RelaxationKind.DUAL: FrontierMethod.DUAL,
    RelaxationKind.AUGM: FrontierMethod.AUGM,
}


@dataclass(frozen=True, eq=False)
class FrontierPoint:
    """
    Solution of one method at one target return; ``risk`` is its objective (the portfolio
    variance). ``proved_optimal`` is only set for the exact method.
    """
    target_return: float
    risk: float
    selection: Optional[BinarySelection]
    method: FrontierMethod
    status: PointStatus
    proved_optimal: Optional[bool] = None

    @property
    def is_ok(self) -> bool:
        return self.status is PointStatus.OK

    def to_dict(self) -> dict:
        return {
            'method': self.method.value, 'target_return': self.target_return,
            'status': self.status.value, 'risk': self.risk if self.is_ok else None,
            'selection': ''.join(map(str, self.selection.tolist())) if self.selection else None,
            'proved_optimal': self.proved_optimal,
        }


def percentage_error(
        point: FrontierPoint, uef: UefCurve, return_components: bool = False
        ) -> Union[float, Tuple[float, float, Optional[float]]]:
    """
    Return ``100 * min(vertical, horizontal)``: the relative deviation of the point's risk from
    the frontier variance at its target return, and the relative deviation of its target return
    from the frontier return at its risk. The horizontal deviation is only used if the risk lies
    within the variance range of the frontier.

    Parameters
    ----------
    point : :class:`FrontierPoint`
        Feasible point.
    uef : :class:`UefCurve`
        Reference frontier.
    return_components : bool, optional
        If ``True``, return ``(pe, vertical, horizontal)`` in percent (``horizontal`` is
        ``None`` if not defined). The default is ``False``.

    Raises
    ------
    OutOfRange
        If the target return lies outside the return domain of ``uef``.
    """
    if not point.is_ok:
        raise ValueError('percentage error of an infeasible point')
    r_min, r_max = uef.return_domain
    r = point.target_return
    if not r_min - DOMAIN_TOL <= r <= r_max + DOMAIN_TOL:
        raise OutOfRange(f'target return {r} outside [{r_min}, {r_max}]')
    variance = uef.variance_at(r)
    vertical = 100. * abs(point.risk - variance) / variance
    horizontal = None
    v_min, v_max = uef.variance_domain()
    if v_min <= point.risk <= v_max and r != 0.:
        horizontal = 100. * abs(r - uef.return_at(point.risk)) / abs(r)
    pe = vertical if horizontal is None else min(vertical, horizontal)
    return (pe, vertical, horizontal) if return_components else pe


def sweep_targets(uef: UefCurve, count: int) -> np.ndarray:
    """
    ``count`` equally spaced returns over the domain of the frontier (its minimum if
    ``count == 1``).
    """
    if count < 1:
        raise ValueError('count must be at least 1')
    r_min, r_max = uef.return_domain
    return np.linspace(r_min, r_max, count) if count > 1 else np.array([r_min])


@dataclass(frozen=True)
class SweepSettings:
    """Model and solver settings shared by all targets of a sweep."""
    k: int = 10
    lower: float = 0.01
    upper: float = 1.
    lambda_g: float = 1e-7
    seed: int = 0
    pool: PoolConfig = field(default_factory=PoolConfig)
    ga: GaConfig = field(default_factory=GaConfig)
    vns: VnsConfig = field(default_factory=VnsConfig)
    dual: DualAscentParams = field(default_factory=DualAscentParams)
    node_budget: int = 10000
    time_budget: float = 60.


@dataclass
class FrontierSweep:
    """
    Frontier points per target (in target order, methods in request order), per-point
    percentage errors (``None`` for infeasible points) with their ``(vertical, horizontal)``
    components, per-method percentage error summaries and, if the exact method was run, the gap
    report against it. Each summary also counts in ``vertical_only`` the points whose risk lies
    outside the variance range of the frontier, so that only the vertical deviation applies.
    """
    targets: np.ndarray
    points: List[FrontierPoint]
    percentage_errors: List[Optional[float]]
    pe_aggregates: Dict[str, Optional[Dict[str, float]]]
    gap_report: Optional[GapReport] = None
    pe_components: List[Optional[Tuple[float, Optional[float]]]] = field(default_factory=list)


def target_seed(seed: int, index: int) -> int:
    """Seed of the ``index``-th target, independent of the scheduling of targets."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def solve_target(
        dataset: PortDataset, target_return: float, index: int,
        methods: List[FrontierMethod], settings: SweepSettings) -> List[FrontierPoint]:
    """Run the requested methods at one target return."""
    inst = build_from_mv(MvSpec(returns=dataset.universe.mean_returns,
                                target_return=float(target_return), k=settings.k,
                                lower=settings.lower, upper=settings.upper), dataset.Q)

    def point(method, solution, proved=None):
        if solution is None or not solution.is_optimal:
            return FrontierPoint(float(target_return), np.inf, None, method,
                                 PointStatus.INFEASIBLE, proved)
        return FrontierPoint(float(target_return), solution.objective, solution.selection,
                             method, PointStatus.OK, proved)

    relax_methods = [m for m in methods if m in RELAXATION_METHODS.values()]
    outcomes = None
    if relax_methods or FrontierMethod.OURS in methods:
        outcomes = run_relaxations(inst, settings.dual, lambda_g=settings.lambda_g)
    by_method = {RELAXATION_METHODS[o.kind]: o for o in outcomes or []}

    points = []
    for method in methods:
        if method in relax_methods:
            outcome = by_method.get(method)
            points.append(point(
                    method, solve_restricted(inst, outcome.selection) if outcome else None))
        elif method is FrontierMethod.OURS:
            try:
                solution = solve_pipeline(
                        inst, settings.pool, settings.ga, settings.vns, settings.dual,
                        lambda_g=settings.lambda_g, seed=target_seed(settings.seed, index),
                        relaxations=outcomes)
            except PipelineInfeasible:
                solution = None
            points.append(point(method, solution))
        else:
            result = branch_and_bound(
                    inst, node_budget=settings.node_budget, time_budget=settings.time_budget)
            points.append(point(method, result.solution, result.proved_optimal))
    return points


def sweep_frontier(
        dataset: PortDataset,
        methods: Iterable[Union[str, FrontierMethod]],
        count: int = 50,
        settings: Optional[SweepSettings] = None,
        jobs: int = 1,
        show_pbar: bool = False,
        ) -> FrontierSweep:
    """
    Sweep ``count`` equally spaced target returns over the domain of the dataset's frontier
    and run each method at each target.

    Relaxation methods are scored by the restricted QP on their selection, ``ours`` is
    :func:`solve_pipeline`, and ``exact`` is :func:`branch_and_bound` (whose solutions then
    serve as gap references). Infeasible points are kept with status ``infeasible`` and
    excluded from the summaries.

    Parameters
    ----------
    dataset : :class:`PortDataset`
        Dataset with frontier.
    methods : iterable of str or :class:`FrontierMethod`
        Methods to run.
    count : int, optional
        Number of target returns. The default is ``50``.
    settings : :class:`SweepSettings`, optional
        Model and solver settings. The default is ``SweepSettings()``.
    jobs : int, optional
        Number of targets solved concurrently (by threads). Results do not depend on it.
        The default is ``1``.
    show_pbar : bool, optional
        Whether to show a tqdm progress bar. The default is ``False``.

    Raises
    ------
    DatasetMissing
        If ``dataset`` is ``None`` or has no frontier.
    """
    # pylint: disable=too-many-locals
    if dataset is None or dataset.uef is None:
        raise DatasetMissing('sweeping the frontier requires a dataset with frontier')
    if jobs < 1:
        raise ValueError('jobs must be at least 1')
    settings = settings or SweepSettings()
    methods = list(dict.fromkeys(FrontierMethod(m) for m in methods))
    targets = sweep_targets(dataset.uef, count)

    def run(item):
        index, target = item
        return solve_target(dataset, target, index, methods, settings)

    items = list(enumerate(targets))
    if jobs == 1:
        results = [run(item) for item in tqdm(items, desc='frontier', disable=not show_pbar)]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            results = list(tqdm(executor.map(run, items), total=len(items), desc='frontier',
                                disable=not show_pbar))
    points = [p for target_points in results for p in target_points]

    components = [percentage_error(p, dataset.uef, return_components=True) if p.is_ok else None
                  for p in points]
    pes = [c[0] if c is not None else None for c in components]
    pe_aggregates = {}
    for m in methods:
        ok = [c for p, c in zip(points, components) if p.method is m and c is not None]
        summary = summarize([c[0] for c in ok])
        if summary is not None:
            summary['vertical_only'] = sum(c[2] is None for c in ok)
        pe_aggregates[m.value] = summary

    gap_report = None
    if FrontierMethod.EXACT in methods:
        references = {
            p.target_return: ReferenceSolution(p.selection, p.risk, bool(p.proved_optimal))
            if p.is_ok else None
            for p in points if p.method is FrontierMethod.EXACT}
        others = [m for m in methods if m is not FrontierMethod.EXACT]
        gap_report = compute_gap_report(
                {m.value: {p.target_return: p.selection for p in points if p.method is m}
                 for m in others},
                {m.value: {p.target_return: p.risk for p in points if p.method is m}
                 for m in others},
                references)
    return FrontierSweep(targets=targets, points=points, percentage_errors=pes,
                         pe_aggregates=pe_aggregates, gap_report=gap_report,
                         pe_components=[c[1:] if c is not None else None for c in components])
