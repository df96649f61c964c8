"""
Tests for the domain types in :mod:`cardqp.model`.
"""
import pytest
import numpy as np
from hypothesis import given, settings, strategies as st
from cardqp.model import (
        BinarySelection, CardinalityError, ProblemInstance, MvSpec, DimensionMismatch,
        InvalidBounds, UefCurve, build_from_mv, validate)

def _mv_spec(n=4, k=2, lower=0.01, upper=1.):
    return MvSpec(returns=np.linspace(0.1, 0.4, n), target_return=0.2, k=k, lower=lower,
                  upper=upper)

def test_selection_basics():
    b = BinarySelection([1, 0, 1, 0], k=2)
    assert b.n == 4
    assert b.popcount == 2
    assert b.indices.tolist() == [0, 2]
    assert b.mask.tolist() == [True, False, True, False]
    assert repr(b) == 'BinarySelection(1010)'
    assert not b.bits.flags.writeable
    assert BinarySelection.from_indices(4, [2, 0]) == b
    assert len({b, BinarySelection([1, 0, 1, 0]), BinarySelection([0, 1, 1, 0])}) == 2

def test_selection_errors():
    with pytest.raises(CardinalityError):
        BinarySelection([1, 0, 0], k=2)
    with pytest.raises(ValueError):
        BinarySelection([1, 2, 0])
    with pytest.raises(ValueError):
        BinarySelection([[1, 0]])

@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=20))
def test_selection_hash_follows_bits(bits):
    assert hash(BinarySelection(bits)) == hash(BinarySelection(np.array(bits, dtype=np.int64)))
    assert BinarySelection(bits).tolist() == bits

def test_build_from_mv():
    Q = np.eye(4)
    inst = build_from_mv(_mv_spec(), Q)
    assert inst.n == 4 and inst.m_a == 2 and inst.m_b == 1
    assert inst.k == 2
    np.testing.assert_allclose(inst.A, np.stack([np.linspace(0.1, 0.4, 4), np.ones(4)]))
    np.testing.assert_allclose(inst.c_a, [0.2, 1.])
    np.testing.assert_allclose(inst.lower, 0.01)
    np.testing.assert_allclose(inst.upper, 1.)
    assert inst.c_b.tolist() == [2]
    assert not inst.Q.flags.writeable
    assert validate(inst) == []

@pytest.mark.parametrize('kwargs', [
        {'k': 0}, {'k': 5}, {'lower': 0.6}, {'upper': 0.4}, {'lower': 0.5, 'upper': 0.5},
        {'lower': -0.1}])
def test_build_from_mv_invalid_bounds(kwargs):
    with pytest.raises(InvalidBounds):
        build_from_mv(_mv_spec(**kwargs), np.eye(4))

def test_build_from_mv_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        build_from_mv(_mv_spec(), np.eye(3))

def test_validate_diagnostics():
    Q = np.array([[1., 0.5], [0.4, 1.]])
    inst = ProblemInstance(
            Q=Q, q=np.zeros(2), A=np.ones((1, 2)), c_a=[1.], lower=[-0.1, 0.], upper=[1., 0.],
            B=np.ones((1, 2)), c_b=[0])
    codes = {d.code for d in validate(inst)}
    assert codes == {'AsymmetricQ', 'NegativeLowerBound', 'NonpositiveUpperBound',
                     'NonpositiveCb'}
    asym = next(d for d in validate(inst) if d.code == 'AsymmetricQ')
    assert asym.index == (0, 1)

def test_validate_not_positive_definite():
    inst = ProblemInstance(
            Q=np.ones((2, 2)), q=np.zeros(2), A=np.ones((1, 2)), c_a=[1.], lower=[0., 0.],
            upper=[1., 1.], B=np.ones((1, 2)), c_b=[1])
    assert [d.code for d in validate(inst)] == ['NotPositiveDefinite']

def test_objective_and_general_k():
    inst = ProblemInstance(
            Q=np.diag([1., 2.]), q=[1., 0.], A=np.zeros((0, 2)), c_a=np.zeros(0),
            lower=[0., 0.], upper=[1., 1.], B=[[1, 0], [0, 1]], c_b=[1, 1])
    assert inst.k is None
    assert inst.objective([1., 1.]) == pytest.approx(4.)
    assert inst.is_cardinality_feasible(BinarySelection([1, 1]))
    assert not inst.is_cardinality_feasible(BinarySelection([1, 0]))

def test_uef_curve():
    uef = UefCurve(returns=[0.1, 0.2], variances=[1., 2.])
    assert uef.points == [(0.1, 1.), (0.2, 2.)]
    assert uef.variance_at(0.15) == pytest.approx(1.5)
    assert uef.return_at(1.65) == pytest.approx(0.165)
    assert uef.validate() == []
    with pytest.raises(ValueError):
        UefCurve(returns=[0.2, 0.1], variances=[1., 2.])

def test_uef_curve_decreasing_head():
    uef = UefCurve(returns=[0.0, 0.1, 0.2], variances=[1.5, 1., 2.])
    assert [d.code for d in uef.validate()] == ['DecreasingVariance']
    # inverse interpolation uses the efficient (increasing) part
    assert uef.variance_domain() == (1., 2.)
    assert uef.return_at(1.5) == pytest.approx(0.15)
