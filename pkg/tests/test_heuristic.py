"""
Tests for the pool, genetic algorithm, neighborhood search and pipeline in
:mod:`cardqp.heuristic`.
"""
from itertools import combinations
import pytest
import numpy as np
from scipy.optimize import minimize
from scipy.stats import chisquare
from hypothesis import given, settings, strategies as st
from cardqp.model import BinarySelection, ProblemInstance, MvSpec, build_from_mv
from cardqp.heuristic import (
        PoolConfig, Pool, EmptyPool, GaConfig, VnsConfig, DegenerateSpread, PipelineInfeasible,
        FitnessCache, fitness, solve_restricted, random_selection, build_pool, ga_select,
        spread_ok, crossover, mutate, run_ga, run_vns, run_relaxations, solve_pipeline)
from cardqp.exact import brute_force
from cardqp.utils.test_utils import get_random_mv_instance

def _pool(fitnesses, n=6, k=2):
    selections = [BinarySelection.from_indices(n, idx) for idx in combinations(range(n), k)]
    return Pool(entries=list(zip(selections, fitnesses)))

@pytest.fixture(scope='session')
def simplex_instance():
    return ProblemInstance(
            Q=np.eye(3), q=np.zeros(3), A=np.ones((1, 3)), c_a=[1.], lower=np.zeros(3),
            upper=np.ones(3), B=np.ones((1, 3)), c_b=[2])

@pytest.fixture(scope='session')
def small_instances():
    rng = np.random.default_rng(11)
    instances = []
    for _ in range(10):
        inst, _ = get_random_mv_instance(8, 3, rng)
        instances.append((inst, brute_force(inst)))
    return instances

def test_random_selection():
    rng = np.random.default_rng(0)
    assert random_selection(4, 4, rng) == BinarySelection([1, 1, 1, 1])
    assert random_selection(5, 0, rng).popcount == 0
    with pytest.raises(ValueError):
        random_selection(3, 4, rng)

def test_random_selection_uniform():
    rng = np.random.default_rng(1)
    keys = [tuple(random_selection(4, 2, rng).indices) for _ in range(60000)]
    counts = [keys.count(idx) for idx in combinations(range(4), 2)]
    assert sum(counts) == 60000
    np.testing.assert_allclose(np.array(counts) / 60000, 1. / 6, atol=0.01)
    assert chisquare(counts).pvalue > 0.001

def test_fitness_symmetric(simplex_instance):
    sol = solve_restricted(simplex_instance, BinarySelection([1, 1, 0]))
    assert sol.is_optimal
    np.testing.assert_allclose(sol.x, [0.5, 0.5, 0.], atol=1e-10)
    assert sol.objective == pytest.approx(0.5)

def test_fitness_infeasible():
    inst = build_from_mv(MvSpec(returns=[0.1, 0.2, 0.3], target_return=0.3, k=2), np.eye(3))
    assert fitness(inst, BinarySelection([1, 1, 0])) == np.inf
    assert not solve_restricted(inst, BinarySelection([1, 1, 0])).is_optimal

def test_fitness_against_slsqp():
    rng = np.random.default_rng(2)
    inst, _ = get_random_mv_instance(7, 3, rng)
    for idx in list(combinations(range(7), 3))[:10]:
        b = BinarySelection.from_indices(7, idx)
        value = fitness(inst, b)
        S = list(idx)
        Q, A = inst.Q[np.ix_(S, S)], inst.A[:, S]
        res = minimize(lambda x: x @ Q @ x, np.full(3, 1. / 3), jac=lambda x: 2. * Q @ x,
                       method='SLSQP', bounds=[(inst.lower[0], inst.upper[0])] * 3,
                       constraints=[{'type': 'eq', 'fun': lambda x: A @ x - inst.c_a}],
                       options={'ftol': 1e-15, 'maxiter': 500})
        if not np.isfinite(value):
            assert not res.success or np.max(np.abs(A @ res.x - inst.c_a)) > 1e-8
        elif res.success:
            assert value <= res.fun + 1e-10
            assert value == pytest.approx(res.fun, rel=1e-5)

def test_fitness_cache(small_instances):
    inst, _ = small_instances[0]
    rng = np.random.default_rng(3)
    selections = [random_selection(8, 3, rng) for _ in range(20)]
    sequential = FitnessCache(inst).evaluate_many(selections)
    cache = FitnessCache(inst, jobs=4)
    assert cache.evaluate_many(selections) == sequential
    assert len(cache) == len(set(selections))
    assert selections[0] in cache
    assert cache(selections[0]) == sequential[0]

def test_build_pool_counts(small_instances):
    inst, _ = small_instances[0]
    rng = np.random.default_rng(4)
    relax = [random_selection(8, 3, rng) for _ in range(3)]
    pool = build_pool(inst, relax, PoolConfig(m_random=5, perturbations_per_relax=0))
    assert len(pool) <= 8
    assert all(inst.is_cardinality_feasible(b) for b in pool.selections)
    assert np.array_equal(pool.fitnesses, [fitness(inst, b) for b in pool.selections])
    unique = list(dict.fromkeys(relax))
    assert pool.selections[:len(unique)] == unique

def test_build_pool_deduplicates(small_instances):
    inst, _ = small_instances[0]
    b = BinarySelection.from_indices(8, [0, 1, 2])
    pool = build_pool(inst, [b, b, b], PoolConfig(m_random=0, perturbations_per_relax=0))
    assert pool.selections == [b]

def test_build_pool_empty():
    inst = build_from_mv(MvSpec(returns=[0.1, 0.2, 0.3], target_return=0.35, k=2), np.eye(3))
    with pytest.raises(EmptyPool):
        build_pool(inst, [BinarySelection([1, 1, 0])],
                   PoolConfig(m_random=0, perturbations_per_relax=2))

def test_pool_config_invalid():
    with pytest.raises(ValueError):
        PoolConfig(m_random=-1)

def test_ga_select():
    pool = _pool([3., 1., 2.])
    kept = ga_select(pool, 0.34)
    assert kept.fitnesses.tolist() == [1., 2.]
    assert ga_select(pool, 1.).fitnesses.tolist() == [1., 2., 3.]
    infeasible = _pool([np.inf] * 4)
    assert ga_select(infeasible, 0.5).selections == infeasible.selections[:2]

def test_spread_ok():
    assert spread_ok(_pool([1., 1.005]), 0.01)
    assert not spread_ok(_pool([1., 2.]), 0.01)
    assert spread_ok(_pool([1.]), 0.01)
    assert spread_ok(_pool([1., np.inf]), 0.01)
    with pytest.raises(DegenerateSpread):
        spread_ok(_pool([np.inf, np.inf]), 0.01)
    with pytest.raises(DegenerateSpread):
        spread_ok(_pool([0., 1.]), 0.01)

def test_crossover():
    rng = np.random.default_rng(5)
    parent = BinarySelection([1, 0, 1, 0])
    assert crossover(parent, parent, 2, rng) == parent
    father, mother = BinarySelection([1, 1, 0, 0]), BinarySelection([1, 0, 1, 0])
    children = [crossover(father, mother, 2, rng) for _ in range(10000)]
    assert all(c.bits[0] == 1 and c.bits[3] == 0 and c.bits[1] + c.bits[2] == 1
               for c in children)
    assert np.mean([c.bits[1] for c in children]) == pytest.approx(0.5, abs=0.02)
    with pytest.raises(ValueError):
        crossover(father, BinarySelection([1, 1, 1, 0]), 2, rng)

def test_mutate():
    rng = np.random.default_rng(6)
    b = BinarySelection([1, 0, 1, 0, 0])
    assert mutate(b, 0., rng) == b
    assert mutate(BinarySelection([1, 0]), 1., rng) == BinarySelection([0, 1])
    assert mutate(BinarySelection([1, 1]), 1., rng) == BinarySelection([1, 1])
    assert all(mutate(b, 1., rng) != b for _ in range(100))

def test_operators_preserve_popcount():
    rng = np.random.default_rng(7)
    for _ in range(10 ** 5):
        n = int(rng.integers(1, 15))
        k = int(rng.integers(0, n + 1))
        father, mother = random_selection(n, k, rng), random_selection(n, k, rng)
        assert father.popcount == k
        assert crossover(father, mother, k, rng).popcount == k
        assert mutate(father, 0.5, rng).popcount == k

@settings(max_examples=100, deadline=None)
@given(st.integers(1, 30), st.data())
def test_crossover_keeps_common_ones(n, data):
    k = data.draw(st.integers(0, n))
    seed = data.draw(st.integers(0, 2 ** 32 - 1))
    rng = np.random.default_rng(seed)
    father, mother = random_selection(n, k, rng), random_selection(n, k, rng)
    child = crossover(father, mother, k, rng)
    assert np.all(child.bits >= (father.bits & mother.bits))
    assert np.all(child.bits <= (father.bits | mother.bits))

@pytest.mark.parametrize('kwargs', [
        {'retain_fraction': 0.}, {'retain_fraction': 1.5}, {'mutation_prob': 2.},
        {'spread_threshold': 0.}, {'max_generations': -1}, {'population_size': 1}])
def test_ga_config_invalid(kwargs):
    with pytest.raises(ValueError):
        GaConfig(**kwargs)

def test_run_ga_within_spread(small_instances):
    inst, _ = small_instances[0]
    rng = np.random.default_rng(8)
    b = [BinarySelection.from_indices(8, idx) for idx in ([0, 1, 2], [0, 1, 3], [0, 1, 4])]
    pool = Pool(entries=[(b[0], 1.002), (b[1], 1.), (b[2], 1.001)])
    best, history = run_ga(inst, pool, GaConfig(), rng, return_history=True)
    assert best == b[1]
    assert history == [1.]

def test_run_ga_monotone(small_instances):
    for seed, (inst, _) in enumerate(small_instances):
        rng = np.random.default_rng(seed)
        pool = build_pool(inst, [], PoolConfig(m_random=10, seed=seed))
        best, history = run_ga(inst, pool, GaConfig(max_generations=50), rng,
                               return_history=True)
        assert np.all(np.diff(history) <= 0.)
        assert fitness(inst, best) == history[-1] <= pool.best()[1]
        assert inst.is_cardinality_feasible(best)

def test_run_vns(small_instances):
    for seed, (inst, exact) in enumerate(small_instances):
        rng = np.random.default_rng(seed)
        b0 = random_selection(8, 3, rng)
        refined = run_vns(inst, b0, VnsConfig(max_non_improving=20), rng)
        assert fitness(inst, refined) <= fitness(inst, b0)
        assert refined.popcount == 3
        optimal = run_vns(inst, exact.solution.selection, VnsConfig(max_non_improving=1), rng)
        assert optimal == exact.solution.selection

def test_vns_config_invalid():
    with pytest.raises(ValueError):
        VnsConfig(max_non_improving=0)
    with pytest.raises(ValueError):
        VnsConfig(max_depth=0)

def test_pipeline_single_selection():
    rng = np.random.default_rng(9)
    inst, _ = get_random_mv_instance(4, 4, rng)
    solution = solve_pipeline(inst, PoolConfig(m_random=5))
    assert solution.selection == BinarySelection([1, 1, 1, 1])
    assert solution.objective == pytest.approx(fitness(inst, solution.selection))

def test_pipeline_against_brute_force(small_instances):
    matches = 0
    for seed, (inst, exact) in enumerate(small_instances):
        solution = solve_pipeline(inst, PoolConfig(m_random=30), seed=seed)
        assert solution.objective >= exact.solution.objective - 1e-8
        assert inst.is_cardinality_feasible(solution.selection)
        np.testing.assert_allclose(inst.A @ solution.x, inst.c_a, atol=1e-8)
        matches += solution.objective <= exact.solution.objective + 1e-8
    print('pipeline matched the optimum on', matches, 'of', len(small_instances))
    assert matches >= 0.9 * len(small_instances)

def test_pipeline_deterministic(small_instances):
    inst, _ = small_instances[1]
    first, relaxations = solve_pipeline(inst, PoolConfig(m_random=10), seed=5, jobs=2,
                                        return_relaxations=True)
    second = solve_pipeline(inst, PoolConfig(m_random=10), seed=5)
    assert first.selection == second.selection
    assert first.objective == second.objective
    assert [o.kind.value for o in relaxations] == ['line', 'dual', 'augm']

def test_pipeline_infeasible():
    inst = build_from_mv(MvSpec(returns=[0.1, 0.2, 0.3, 0.25], target_return=0.5, k=2),
                         np.eye(4))
    with pytest.warns(UserWarning):
        with pytest.raises(PipelineInfeasible):
            solve_pipeline(inst, PoolConfig(m_random=5))

def test_run_ga_keeps_population(monkeypatch):
    rng = np.random.default_rng(13)
    inst, _ = get_random_mv_instance(12, 4, rng)
    pool = build_pool(inst, [], PoolConfig(m_random=40, perturbations_per_relax=0, seed=13))
    sizes = []

    def recording_select(pool, retain_fraction):
        sizes.append(len(pool))
        return ga_select(pool, retain_fraction)

    monkeypatch.setattr('cardqp.heuristic.genetic.ga_select', recording_select)
    run_ga(inst, pool, GaConfig(spread_threshold=1e-12, max_generations=10), rng)
    assert sizes[0] == len(pool)
    assert len(sizes) == 10
    assert min(sizes) >= 25
    sizes.clear()
    run_ga(inst, pool, GaConfig(spread_threshold=1e-12, max_generations=10, population_size=30),
           rng)
    assert all(size <= 30 for size in sizes[1:])

def test_run_vns_restarts_from_incumbent(small_instances):
    for seed, (inst, _) in enumerate(small_instances[:5]):
        rng = np.random.default_rng(seed)
        refined = run_vns(inst, random_selection(8, 3, rng),
                          VnsConfig(max_non_improving=500, max_depth=1), rng)
        best = fitness(inst, refined)
        # no single swap of the result improves it
        for i in refined.indices:
            for j in np.flatnonzero(refined.bits == 0):
                bits = refined.bits.copy()
                bits[i], bits[j] = 0, 1
                assert fitness(inst, BinarySelection(bits)) >= best

def test_ga_then_vns_against_brute_force():
    rng = np.random.default_rng(31)
    matches, runs = 0, 25
    for seed in range(runs):
        inst, _ = get_random_mv_instance(10, 3, rng)
        exact = brute_force(inst)
        cache = FitnessCache(inst)
        relax = [o.selection for o in run_relaxations(inst)]
        pool = build_pool(inst, relax, PoolConfig(seed=seed), cache=cache)
        ga_rng, vns_rng = (np.random.default_rng(s)
                           for s in np.random.SeedSequence(seed).spawn(2))
        best = run_ga(inst, pool, GaConfig(), ga_rng, cache=cache)
        refined = run_vns(inst, best, VnsConfig(), vns_rng, cache=cache)
        assert cache(refined) >= exact.solution.objective - 1e-8
        matches += cache(refined) <= exact.solution.objective + 1e-8
    assert matches >= 0.9 * runs

def test_pipeline_against_brute_force_n12():
    rng = np.random.default_rng(2024)
    matches, runs = 0, 20
    for seed in range(runs):
        inst, _ = get_random_mv_instance(12, 4, rng)
        exact = brute_force(inst)
        solution = solve_pipeline(inst, seed=seed)
        assert solution.objective >= exact.solution.objective - 1e-8
        matches += solution.objective <= exact.solution.objective + 1e-8
    assert matches >= 0.9 * runs
