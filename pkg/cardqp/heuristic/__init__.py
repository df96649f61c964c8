"""
Heuristic search over selections: initial pool, genetic algorithm, neighborhood search and the
end-to-end pipeline.
"""
from .fitness import solve_restricted, fitness, FitnessCache
from .pool import PoolConfig, Pool, EmptyPool, random_selection, swap_one, build_pool
from .genetic import GaConfig, DegenerateSpread, ga_select, spread_ok, crossover, mutate, run_ga
from .neighborhood_search import VnsConfig, run_vns
from .pipeline import PipelineInfeasible, run_relaxations, solve_pipeline
