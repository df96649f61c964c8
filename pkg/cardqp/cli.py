"""
Provides the commands behind the hydra entry scripts in ``experiments/``: :func:`cmd_solve`,
:func:`cmd_frontier`, :func:`cmd_gaps` and :func:`cmd_oracle`.

Each command takes a run configuration (see :class:`RunConfig`) and returns an exit code with
the report (``None`` unless the exit code is 0):

* 0: success
* 1: input error (unreadable or malformed files, invalid configuration or instance)
* 2: infeasible instance
* 3: exact oracle refused (too many selections to enumerate without budgets)

Error messages are printed to ``sys.stderr``. Failures of the solvers themselves (for example
a singular KKT system) are not input errors and propagate as exceptions.
"""

from __future__ import annotations
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple
import datetime
import sys
from omegaconf import DictConfig, OmegaConf
from omegaconf.errors import OmegaConfBaseException
import numpy as np
from . import __version__
from .model import (
        DimensionMismatch, InvalidBounds, MvSpec, WeightedSolution, build_from_mv, validate)
from .relax import DualAscentParams
from .heuristic import PoolConfig, GaConfig, VnsConfig, PipelineInfeasible, solve_pipeline
from .exact import TooLarge, brute_force, branch_and_bound
from .analysis import (
        DatasetMissing, OutOfRange, FrontierMethod, FrontierSweep, SweepSettings, sweep_frontier)
from .data import (
        PortDataset, PortFormatError, NotPsd, ReportDocument, load_dataset, random_universe,
        unconstrained_frontier, save_report, write_report)
from .utils import resolve_path

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_ORACLE_GUARD = 3

DEFAULT_GAP_NODE_BUDGET = 10 ** 6
DEFAULT_GAP_TIME_BUDGET = 60.

# not echoed into reports, so that reports do not depend on them
NON_RESULT_KEYS = ('jobs', 'out', 'show_pbar')


class InvalidConfig(ValueError):
    """Raised if a run configuration or the instance it describes is invalid."""


@dataclass
class DatasetConfig:
    name: str = 'port1'
    path: Optional[str] = None
    uef_path: Optional[str] = None
    swap_uef_columns: bool = False
    synthetic_n: Optional[int] = None
    synthetic_seed: int = 0
    uef_points: int = 100


@dataclass
class RelaxConfig:
    max_iters: int = 500
    step0: float = 1.
    penalty_weight: float = 10.
    init_scale: float = 1e-3
    lambda_g: float = 1e-7


@dataclass
class HeuristicConfig:
    m_random: int = 100
    perturbations_per_relax: int = 10
    retain_fraction: float = 0.5
    mutation_prob: float = 0.1
    spread_threshold: float = 0.01
    max_generations: int = 200
    population_size: Optional[int] = None
    max_non_improving: int = 100
    max_depth: int = 3


@dataclass
class OracleConfig:
    node_budget: Optional[int] = None
    time_budget: Optional[float] = None
    max_selections: int = 10 ** 6


@dataclass
class RunConfig:
    """Schema of the run configuration composed by hydra (``experiments/hydra_cfg``)."""
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    relax: RelaxConfig = field(default_factory=RelaxConfig)
    heuristic: HeuristicConfig = field(default_factory=HeuristicConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    k: int = 10
    lower: float = 0.01
    upper: float = 1.
    target_return: Optional[float] = None
    sweep: int = 50
    methods: List[str] = field(default_factory=lambda: ['line', 'dual', 'augm', 'ours'])
    seed: int = 0
    jobs: int = 1
    out: Optional[str] = None
    format: str = 'json'
    include_timestamps: bool = False
    show_pbar: bool = False


def validate_run_config(cfg: DictConfig) -> DictConfig:
    """
    Merge ``cfg`` into the :class:`RunConfig` schema (checking keys and types) and check the
    invariants of the embedded configurations.

    Raises
    ------
    InvalidConfig
        If an invariant is violated.
    omegaconf.errors.OmegaConfBaseException
        If a key is unknown or a value has the wrong type.
    """
    cfg = OmegaConf.merge(OmegaConf.structured(RunConfig), cfg)
    if cfg.k < 1:
        raise InvalidConfig('k must be at least 1')
    if not 0. <= cfg.lower < cfg.upper:
        raise InvalidConfig('bounds must satisfy 0 <= lower < upper')
    if cfg.sweep < 1:
        raise InvalidConfig('sweep must be at least 1')
    if cfg.jobs < 1:
        raise InvalidConfig('jobs must be at least 1')
    if cfg.format not in ('json', 'csv'):
        raise InvalidConfig(f'unknown format {cfg.format}')
    try:
        for method in cfg.methods:
            FrontierMethod(method)
    except ValueError as e:
        raise InvalidConfig(str(e)) from e
    if cfg.relax.lambda_g < 0.:
        raise InvalidConfig('lambda_g must be nonnegative')
    if cfg.dataset.path is None and cfg.dataset.synthetic_n is None:
        raise InvalidConfig('either dataset.path or dataset.synthetic_n must be set')
    if cfg.dataset.synthetic_n is not None and cfg.dataset.synthetic_n < 1:
        raise InvalidConfig('dataset.synthetic_n must be at least 1')
    if cfg.dataset.uef_points < 1:
        raise InvalidConfig('dataset.uef_points must be at least 1')
    for build in (pool_config, ga_config, vns_config, dual_params):
        try:
            build(cfg)
        except ValueError as e:
            raise InvalidConfig(str(e)) from e
    return cfg


def default_run_config(**overrides) -> DictConfig:
    """Return a validated run configuration with (nested) ``overrides``."""
    return validate_run_config(OmegaConf.create(overrides))


def pool_config(cfg: DictConfig) -> PoolConfig:
    return PoolConfig(m_random=cfg.heuristic.m_random,
                      perturbations_per_relax=cfg.heuristic.perturbations_per_relax,
                      seed=cfg.seed)


def ga_config(cfg: DictConfig) -> GaConfig:
    return GaConfig(retain_fraction=cfg.heuristic.retain_fraction,
                    mutation_prob=cfg.heuristic.mutation_prob,
                    spread_threshold=cfg.heuristic.spread_threshold,
                    max_generations=cfg.heuristic.max_generations,
                    population_size=cfg.heuristic.population_size)


def vns_config(cfg: DictConfig) -> VnsConfig:
    return VnsConfig(max_non_improving=cfg.heuristic.max_non_improving,
                     max_depth=cfg.heuristic.max_depth, seed=cfg.seed)


def dual_params(cfg: DictConfig) -> DualAscentParams:
    return DualAscentParams(max_iters=cfg.relax.max_iters, step0=cfg.relax.step0,
                            penalty_weight=cfg.relax.penalty_weight,
                            init_scale=cfg.relax.init_scale, seed=cfg.seed)


def sweep_settings(cfg: DictConfig, node_budget: int, time_budget: float) -> SweepSettings:
    return SweepSettings(
            k=cfg.k, lower=cfg.lower, upper=cfg.upper, lambda_g=cfg.relax.lambda_g, seed=cfg.seed,
            pool=pool_config(cfg), ga=ga_config(cfg), vns=vns_config(cfg), dual=dual_params(cfg),
            node_budget=node_budget, time_budget=time_budget)


def load_run_dataset(cfg: DictConfig) -> PortDataset:
    """
    Load the configured dataset, or generate a synthetic one (with its frontier) if
    ``dataset.synthetic_n`` is set.
    """
    if cfg.dataset.synthetic_n is not None:
        universe = random_universe(cfg.dataset.synthetic_n, seed=cfg.dataset.synthetic_seed)
        return PortDataset.from_universe(
                cfg.dataset.name, universe,
                uef=unconstrained_frontier(universe, count=cfg.dataset.uef_points))
    uef_path = cfg.dataset.uef_path
    return load_dataset(
            resolve_path(cfg.dataset.path),
            uef_path=None if uef_path is None else resolve_path(uef_path),
            swap_columns=cfg.dataset.swap_uef_columns)


def build_metadata(cfg: DictConfig, command: str, dataset: PortDataset) -> Dict[str, Any]:
    config = OmegaConf.to_container(cfg, resolve=True)
    for key in NON_RESULT_KEYS:
        config.pop(key, None)
    metadata = {
        'command': command,
        'version': __version__,
        'dataset': dataset.name,
        'n': dataset.universe.n,
        'seed': cfg.seed,
        'return_unit': 'as-published',
        'covariance_shift': dataset.shift,
        'config': config,
    }
    if cfg.include_timestamps:
        metadata['timestamp'] = datetime.datetime.now().isoformat()
    return metadata


def solution_record(method: str, target_return: float, solution: WeightedSolution,
                    **extra) -> Dict[str, Any]:
    record = {
        'method': method,
        'target_return': target_return,
        'status': solution.status.value,
        'objective': solution.objective if solution.is_optimal else None,
        'selection': ''.join(map(str, solution.selection.tolist())),
        'weights': solution.x.tolist() if solution.is_optimal else None,
    }
    record.update(extra)
    return record


def _run(command: str, body: Callable[[DictConfig], Tuple[int, Optional[ReportDocument]]],
         cfg: DictConfig) -> Tuple[int, Optional[ReportDocument]]:
    try:
        cfg = validate_run_config(cfg)
        return body(cfg)
    except TooLarge as e:
        print(f'{command}: {e}; set oracle.node_budget or oracle.time_budget', file=sys.stderr)
        return EXIT_ORACLE_GUARD, None
    except PipelineInfeasible as e:
        print(f'{command}: infeasible: {e}', file=sys.stderr)
        return EXIT_INFEASIBLE, None
    except (OSError, PortFormatError, NotPsd, InvalidBounds, DimensionMismatch, DatasetMissing,
            OutOfRange, OmegaConfBaseException, InvalidConfig) as e:
        print(f'{command}: input error: {e}', file=sys.stderr)
        return EXIT_INPUT_ERROR, None


def _instance(cfg: DictConfig, dataset: PortDataset):
    if cfg.target_return is None:
        raise InvalidConfig('target_return must be set')
    inst = build_from_mv(MvSpec(returns=dataset.universe.mean_returns,
                                target_return=cfg.target_return, k=cfg.k, lower=cfg.lower,
                                upper=cfg.upper), dataset.Q)
    diagnostics = validate(inst)
    if diagnostics:
        raise InvalidConfig('invalid instance: ' + '; '.join(map(str, diagnostics)))
    return inst


def _solve(cfg: DictConfig) -> Tuple[int, Optional[ReportDocument]]:
    dataset = load_run_dataset(cfg)
    inst = _instance(cfg, dataset)
    solution, outcomes = solve_pipeline(
            inst, pool_config(cfg), ga_config(cfg), vns_config(cfg), dual_params(cfg),
            lambda_g=cfg.relax.lambda_g, seed=cfg.seed, jobs=cfg.jobs, return_relaxations=True,
            show_pbar=cfg.show_pbar)
    doc = ReportDocument(metadata=build_metadata(cfg, 'solve', dataset))
    doc.solutions.append(solution_record('ours', cfg.target_return, solution))
    for outcome in outcomes:
        doc.solutions.append({
            'method': outcome.kind.value,
            'target_return': cfg.target_return,
            'bound': outcome.bound,
            'selection': ''.join(map(str, outcome.selection.tolist())),
        })
    return EXIT_OK, doc


def _frontier_report(cfg: DictConfig, command: str, dataset: PortDataset,
                     sweep: FrontierSweep) -> ReportDocument:
    doc = ReportDocument(metadata=build_metadata(cfg, command, dataset))
    for point, pe, components in zip(sweep.points, sweep.percentage_errors,
                                     sweep.pe_components):
        record = point.to_dict()
        record['percentage_error'] = pe
        record['pe_vertical'], record['pe_horizontal'] = components or (None, None)
        doc.frontier.append(record)
    doc.aggregates['percentage_error'] = sweep.pe_aggregates
    if sweep.gap_report is not None:
        doc.gaps = [r.to_dict() for r in sweep.gap_report.records]
        doc.aggregates.update(sweep.gap_report.aggregates)
    return doc


def _frontier(cfg: DictConfig) -> Tuple[int, Optional[ReportDocument]]:
    dataset = load_run_dataset(cfg)
    if dataset.uef is None:
        raise DatasetMissing('the frontier command needs dataset.uef_path')
    oracle = cfg.oracle
    sweep = sweep_frontier(
            dataset, cfg.methods, count=cfg.sweep,
            settings=sweep_settings(
                    cfg, oracle.node_budget or DEFAULT_GAP_NODE_BUDGET,
                    DEFAULT_GAP_TIME_BUDGET if oracle.time_budget is None else oracle.time_budget),
            jobs=cfg.jobs, show_pbar=cfg.show_pbar)
    return EXIT_OK, _frontier_report(cfg, 'frontier', dataset, sweep)


def _gaps(cfg: DictConfig) -> Tuple[int, Optional[ReportDocument]]:
    dataset = load_run_dataset(cfg)
    if dataset.uef is None:
        raise DatasetMissing('the gaps command needs dataset.uef_path')
    methods = [m for m in cfg.methods if m != FrontierMethod.EXACT.value]
    oracle = cfg.oracle
    sweep = sweep_frontier(
            dataset, methods + [FrontierMethod.EXACT.value], count=cfg.sweep,
            settings=sweep_settings(
                    cfg, oracle.node_budget or DEFAULT_GAP_NODE_BUDGET,
                    DEFAULT_GAP_TIME_BUDGET if oracle.time_budget is None else oracle.time_budget),
            jobs=cfg.jobs, show_pbar=cfg.show_pbar)
    return EXIT_OK, _frontier_report(cfg, 'gaps', dataset, sweep)


def _oracle(cfg: DictConfig) -> Tuple[int, Optional[ReportDocument]]:
    dataset = load_run_dataset(cfg)
    inst = _instance(cfg, dataset)
    oracle = cfg.oracle
    if oracle.node_budget is None and oracle.time_budget is None:
        result = brute_force(inst, max_selections=oracle.max_selections,
                             show_pbar=cfg.show_pbar)
    else:
        result = branch_and_bound(
                inst,
                node_budget=oracle.node_budget or DEFAULT_GAP_NODE_BUDGET,
                time_budget=np.inf if oracle.time_budget is None else oracle.time_budget,
                show_pbar=cfg.show_pbar)
    if not result.solution.is_optimal and result.proved_optimal:
        raise PipelineInfeasible('no selection has a feasible restricted QP')
    doc = ReportDocument(metadata=build_metadata(cfg, 'oracle', dataset))
    doc.solutions.append(solution_record(
            'exact', cfg.target_return, result.solution,
            proved_optimal=result.proved_optimal, nodes_explored=result.nodes_explored,
            wall_budget_hit=result.wall_budget_hit))
    return EXIT_OK, doc


def cmd_solve(cfg: DictConfig) -> Tuple[int, Optional[ReportDocument]]:
    """Solve the instance at ``cfg.target_return`` with the heuristic pipeline."""
    return _run('solve', _solve, cfg)


def cmd_frontier(cfg: DictConfig) -> Tuple[int, Optional[ReportDocument]]:
    """Sweep the frontier with ``cfg.methods`` and report percentage errors."""
    return _run('frontier', _frontier, cfg)


def cmd_gaps(cfg: DictConfig) -> Tuple[int, Optional[ReportDocument]]:
    """Sweep the frontier with ``cfg.methods`` and the exact reference and report the gaps."""
    return _run('gaps', _gaps, cfg)


def cmd_oracle(cfg: DictConfig) -> Tuple[int, Optional[ReportDocument]]:
    """
    Solve the instance at ``cfg.target_return`` exactly: by enumeration if no oracle budget is
    set, by branch and bound otherwise.
    """
    return _run('oracle', _oracle, cfg)


COMMANDS = {
    'solve': cmd_solve,
    'frontier': cmd_frontier,
    'gaps': cmd_gaps,
    'oracle': cmd_oracle,
}


def run_command(name: str, cfg: DictConfig) -> int:
    """
    Run a command and emit its report: to ``cfg.out`` if set (a file for JSON, a directory of
    tables for CSV), otherwise the JSON document to ``sys.stdout``.

    Returns
    -------
    int
        The exit code.
    """
    code, doc = COMMANDS[name](cfg)
    if doc is None:
        return code
    out = cfg.get('out')
    fmt = cfg.get('format', 'json')
    if out is not None:
        save_report(doc, resolve_path(out), fmt)
    else:
        sys.stdout.write(write_report(doc, 'json').decode('utf-8'))
    return code
