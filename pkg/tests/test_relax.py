"""
Tests for the relaxations in :mod:`cardqp.relax`.
"""
import pytest
import numpy as np
import torch
from hypothesis import given, settings, strategies as st
from cardqp.model import BinarySelection, ProblemInstance, MvSpec, build_from_mv
from cardqp.relax import (
        RelaxationKind, RelaxationInfeasible, NearSingularQ, DualVariables, DualAscentParams,
        LagrangianDual, discretize_topk, discretize, solve_line, line_relaxation, compute_phi,
        dual_objective, augm_objective, solve_dual, solve_augm)
from cardqp.exact import brute_force
from cardqp.utils.test_utils import get_random_pd_matrix, get_random_mv_instance

@pytest.fixture(scope='session')
def random_instances():
    rng = np.random.default_rng(3)
    instances = []
    for _ in range(10):
        n = int(rng.integers(5, 9))
        k = int(rng.integers(1, 4))
        inst, _ = get_random_mv_instance(n, k, rng)
        instances.append((inst, brute_force(inst).solution.objective))
    return instances

def _random_duals(inst, rng, scale):
    return DualVariables(
            lam_a=scale * rng.normal(size=inst.m_a), lam_b=scale * rng.normal(size=inst.m_b),
            lam_l=scale * np.abs(rng.normal(size=inst.n)),
            lam_u=scale * np.abs(rng.normal(size=inst.n)))

def test_discretize_topk_ties():
    assert discretize_topk([0.5, 0.5, 0.5, 0.5], 2) == BinarySelection([1, 1, 0, 0])
    assert discretize_topk([0.1, 0.9, 0.3], 1) == BinarySelection([0, 1, 0])
    with pytest.raises(ValueError):
        discretize_topk([0.1, 0.2], 3)

@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-10., 10.), min_size=2, max_size=12, unique=True), st.data())
def test_discretize_topk_permutation_equivariant(scores, data):
    scores = np.array(scores)
    k = data.draw(st.integers(0, len(scores)))
    perm = np.array(data.draw(st.permutations(range(len(scores)))))
    selection = discretize_topk(scores, k)
    assert selection.popcount == k
    assert discretize_topk(scores[perm], k).bits.tolist() == selection.bits[perm].tolist()

def test_discretize_single_row():
    inst = build_from_mv(MvSpec(returns=np.linspace(0.1, 0.4, 4), target_return=0.2, k=2),
                         np.eye(4))
    assert discretize([0.1, 0.4, 0.3, 0.2], inst) == BinarySelection([0, 1, 1, 0])

def test_discretize_multiple_rows():
    inst = ProblemInstance(
            Q=np.eye(4), q=np.zeros(4), A=np.ones((1, 4)), c_a=[1.], lower=np.zeros(4),
            upper=np.ones(4), B=[[1, 1, 0, 0], [0, 0, 1, 1]], c_b=[1, 1])
    assert discretize([0.9, 0.8, 0.1, 0.2], inst) == BinarySelection([1, 0, 0, 1])

def test_line_symmetric_instance():
    # equal returns: x spreads evenly over all assets with b_R = k / n
    inst = build_from_mv(MvSpec(returns=np.full(4, 0.1), target_return=0.1, k=2, lower=0.),
                         np.eye(4))
    outcome = solve_line(inst)
    assert outcome.kind is RelaxationKind.LINE
    assert outcome.bound == pytest.approx(0.25, abs=1e-9)
    np.testing.assert_allclose(outcome.x_hat, 0.25, atol=1e-8)
    assert outcome.selection.popcount == 2
    with pytest.raises(ValueError):
        solve_line(inst, k=3)

def test_line_infeasible():
    inst = build_from_mv(MvSpec(returns=[0.1, 0.2, 0.3], target_return=0.5, k=2), np.eye(3))
    with pytest.raises(RelaxationInfeasible):
        solve_line(inst)

def test_line_lower_bound(random_instances):
    for inst, optimum in random_instances:
        bound, x, b_R, _ = line_relaxation(inst)
        assert bound <= optimum + 1e-8
        assert np.all(b_R >= -1e-9) and np.all(b_R <= 1. + 1e-9)
        assert b_R.sum() == pytest.approx(inst.k)
        np.testing.assert_allclose(inst.A @ x, inst.c_a, atol=1e-8)

def test_line_respects_fixed_entries():
    rng = np.random.default_rng(4)
    inst, _ = get_random_mv_instance(6, 2, rng)
    b_lo, b_hi = np.zeros(6), np.ones(6)
    b_hi[0] = 0.
    _, _, b_R, _ = line_relaxation(inst, b_lo, b_hi)
    assert b_R[0] == pytest.approx(0., abs=1e-12)

def test_compute_phi_loewner_order():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(2, 12))
        Q = get_random_pd_matrix(n, rng)
        phi = compute_phi(Q)
        assert np.all(np.diag(phi) > 0.)
        assert np.count_nonzero(phi - np.diag(np.diag(phi))) == 0
        assert np.linalg.eigvalsh(Q - phi).min() >= -1e-8

def test_compute_phi_near_singular():
    with pytest.raises(NearSingularQ):
        compute_phi(np.ones((3, 3)))
    np.testing.assert_allclose(compute_phi(np.diag([2., 4.])), np.diag([2., 4.]))

def test_dual_variables_sign():
    with pytest.raises(ValueError):
        DualVariables(lam_a=[0.], lam_b=[0.], lam_l=[-1.], lam_u=[0.])

@pytest.mark.parametrize('kwargs', [
        {'max_iters': 0}, {'step0': 0.}, {'penalty_weight': -1.}, {'init_scale': -1.}])
def test_dual_ascent_params_invalid(kwargs):
    with pytest.raises(ValueError):
        DualAscentParams(**kwargs)

def test_b_term_takes_k_most_negative():
    inst = build_from_mv(MvSpec(returns=np.linspace(0.1, 0.4, 4), target_return=0.2, k=2),
                         np.eye(4))
    dual = LagrangianDual(inst)
    coef = torch.tensor([-3., 1., -1., -2.], dtype=torch.float64)
    assert dual.b_term(coef).item() == pytest.approx(-5.)

def test_dual_zero_multipliers():
    inst = build_from_mv(MvSpec(returns=np.linspace(0.1, 0.4, 4), target_return=0.2, k=2),
                         np.eye(4))
    assert dual_objective(inst, DualVariables.zeros(inst)) == pytest.approx(0.)

def test_weak_duality(random_instances):
    rng = np.random.default_rng(6)
    for inst, optimum in random_instances:
        for i in range(50):
            lam = _random_duals(inst, rng, scale=10. ** rng.uniform(-4, 0))
            assert dual_objective(inst, lam) <= optimum + 1e-8, i

def test_augm_dominates_dual(random_instances):
    rng = np.random.default_rng(7)
    for inst, _ in random_instances[:3]:
        for _ in range(10):
            lam = _random_duals(inst, rng, scale=1e-2)
            assert augm_objective(inst, lam, lambda_g=1e-7) >= dual_objective(inst, lam) - 1e-12

def test_solve_dual(random_instances):
    params = DualAscentParams(max_iters=100)
    for inst, optimum in random_instances[:5]:
        outcome = solve_dual(inst, params)
        assert outcome.kind is RelaxationKind.DUAL
        assert outcome.bound <= optimum + 1e-8
        assert outcome.bound >= dual_objective(inst, DualVariables.zeros(inst)) - 1e-3
        assert inst.is_cardinality_feasible(outcome.selection)
        assert outcome.iterations == 100

def test_solve_dual_deterministic(random_instances):
    inst, _ = random_instances[0]
    params = DualAscentParams(max_iters=50, seed=3)
    first, second = solve_dual(inst, params), solve_dual(inst, params)
    assert first.selection == second.selection
    assert first.bound == second.bound

def test_solve_augm(random_instances):
    inst, _ = random_instances[1]
    outcome = solve_augm(inst, lambda_g=1e-7, params=DualAscentParams(max_iters=50))
    assert outcome.kind is RelaxationKind.AUGM
    assert inst.is_cardinality_feasible(outcome.selection)
    with pytest.raises(ValueError):
        solve_augm(inst, lambda_g=-1.)

def test_augm_matches_dual_for_diagonal_q():
    rng = np.random.default_rng(12)
    inst = build_from_mv(MvSpec(returns=rng.uniform(0., 0.01, size=6), target_return=0.005, k=2),
                         np.diag(rng.uniform(0.5, 2., size=6)))
    np.testing.assert_allclose(compute_phi(inst.Q), inst.Q, rtol=1e-12)
    for scale in (1e-3, 1e-1, 1.):
        for _ in range(10):
            lam = _random_duals(inst, rng, scale)
            assert augm_objective(inst, lam, lambda_g=0.) == pytest.approx(
                    dual_objective(inst, lam), rel=1e-10, abs=1e-12)
    params = DualAscentParams(max_iters=50)
    dual, augm = solve_dual(inst, params), solve_augm(inst, 0., params)
    assert augm.bound == pytest.approx(dual.bound, rel=1e-6, abs=1e-10)

def test_solve_dual_logging(tmp_path, random_instances):
    inst, _ = random_instances[2]
    outcome = solve_dual(inst, DualAscentParams(max_iters=10), log_path=str(tmp_path))
    assert outcome.kind is RelaxationKind.DUAL
    log_dirs = list(tmp_path.iterdir())
    assert len(log_dirs) == 1
    assert log_dirs[0].name.endswith('dual_ascent')
    assert any(f.name.startswith('events.out.tfevents') for f in log_dirs[0].iterdir())
