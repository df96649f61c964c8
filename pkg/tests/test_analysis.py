"""
Tests for the gap metrics, percentage errors and frontier sweeps in :mod:`cardqp.analysis`.
"""
import pytest
import numpy as np
from hypothesis import given, settings, strategies as st
from cardqp.model import BinarySelection, UefCurve
from cardqp.relax import DualAscentParams
from cardqp.heuristic import PoolConfig, GaConfig, VnsConfig
from cardqp.data import PortDataset, random_universe, unconstrained_frontier
from cardqp.analysis import (
        LengthMismatch, NonpositiveReference, OutOfRange, DatasetMissing, FrontierMethod,
        PointStatus, FrontierPoint, ReferenceSolution, SweepSettings, binary_gap,
        objective_gap, summarize, compute_gap_report, percentage_error, sweep_targets,
        sweep_frontier, target_seed)

@st.composite
def selection_triples(draw):
    n = draw(st.integers(1, 12))
    bits = st.lists(st.integers(0, 1), min_size=n, max_size=n)
    return tuple(BinarySelection(draw(bits)) for _ in range(3))

@pytest.fixture(scope='session')
def uef():
    return UefCurve(returns=[0.1, 0.2], variances=[1., 2.])

@pytest.fixture(scope='session')
def small_dataset():
    universe = random_universe(6, seed=3)
    return PortDataset.from_universe(
            'synthetic6', universe, uef=unconstrained_frontier(universe, count=20))

@pytest.fixture(scope='session')
def small_settings():
    return SweepSettings(
            k=2, seed=5, pool=PoolConfig(m_random=10, perturbations_per_relax=2),
            ga=GaConfig(max_generations=5), vns=VnsConfig(max_non_improving=5),
            dual=DualAscentParams(max_iters=50), node_budget=500, time_budget=60.)

def test_binary_gap_examples():
    assert binary_gap(BinarySelection([1, 1, 0, 0]), BinarySelection([0, 0, 1, 1])) == 2.
    assert binary_gap(BinarySelection([1, 0, 1]), BinarySelection([1, 0, 1])) == 0.
    assert binary_gap(BinarySelection([1, 1, 0]), BinarySelection([1, 0, 1])) == 1.
    with pytest.raises(LengthMismatch):
        binary_gap(BinarySelection([1, 0]), BinarySelection([1, 0, 0]))

@settings(max_examples=100, deadline=None)
@given(selection_triples())
def test_binary_gap_metric(triple):
    b1, b2, b3 = triple
    assert binary_gap(b1, b1) == 0.
    assert binary_gap(b1, b2) == binary_gap(b2, b1)
    assert binary_gap(b1, b3) <= binary_gap(b1, b2) + binary_gap(b2, b3)
    assert (binary_gap(b1, b2) == 0.) == (b1 == b2)

def test_objective_gap():
    assert objective_gap(1.1, 1.) == pytest.approx(0.1)
    assert objective_gap(2., 2.) == 0.
    assert objective_gap(0.9, 1.) < 0.
    for ref in (0., -1.):
        with pytest.raises(NonpositiveReference):
            objective_gap(1., ref)

def test_summarize():
    assert summarize([]) is None
    assert summarize([3., 1., 2.]) == {'mean': 2., 'median': 2., 'max': 3., 'min': 1.}

def test_percentage_error(uef):
    point = FrontierPoint(0.15, 1.65, None, FrontierMethod.OURS, PointStatus.OK)
    pe, vertical, horizontal = percentage_error(point, uef, return_components=True)
    assert vertical == pytest.approx(10.)
    assert horizontal == pytest.approx(10.)
    assert pe == pytest.approx(10.)

def test_percentage_error_outside_variance_range(uef):
    point = FrontierPoint(0.1, 3., None, FrontierMethod.OURS, PointStatus.OK)
    pe, vertical, horizontal = percentage_error(point, uef, return_components=True)
    assert horizontal is None
    assert pe == vertical == pytest.approx(200.)

def test_percentage_error_on_frontier(uef):
    point = FrontierPoint(0.2, 2., None, FrontierMethod.EXACT, PointStatus.OK)
    assert percentage_error(point, uef) == pytest.approx(0., abs=1e-12)

def test_percentage_error_out_of_range(uef):
    with pytest.raises(OutOfRange):
        percentage_error(FrontierPoint(0.3, 2., None, FrontierMethod.OURS, PointStatus.OK), uef)
    with pytest.raises(ValueError):
        percentage_error(FrontierPoint(
                0.15, np.inf, None, FrontierMethod.OURS, PointStatus.INFEASIBLE), uef)

def test_sweep_targets(uef):
    np.testing.assert_allclose(sweep_targets(uef, 1), [0.1])
    np.testing.assert_allclose(sweep_targets(uef, 3), [0.1, 0.15, 0.2])
    with pytest.raises(ValueError):
        sweep_targets(uef, 0)

def test_target_seed():
    assert target_seed(0, 1) == target_seed(0, 1)
    assert target_seed(0, 1) != target_seed(0, 2)
    assert target_seed(0, 1) != target_seed(1, 1)

def test_compute_gap_report():
    ref = ReferenceSolution(BinarySelection([1, 1, 0, 0]), 2., True)
    unproved = ReferenceSolution(BinarySelection([1, 0, 1, 0]), 1., False)
    report = compute_gap_report(
            {'ours': {0.1: BinarySelection([1, 0, 0, 1]), 0.2: BinarySelection([1, 0, 1, 0]),
                      0.3: None},
             'line': {0.1: None}},
            {'ours': {0.1: 2.2, 0.2: 1., 0.3: np.inf}, 'line': {0.1: np.inf}},
            {0.1: ref, 0.2: unproved, 0.3: None})
    assert [r.target_return for r in report.records] == [0.1, 0.2]
    assert report.records[0].binary_gap == 1.
    assert report.records[0].objective_gap == pytest.approx(0.1)
    assert report.records[1].binary_gap == 0.
    assert report.aggregates['binary_gap']['ours']['max'] == 1.
    assert report.aggregates['binary_gap_proved']['ours'] == {
            'mean': 1., 'median': 1., 'max': 1., 'min': 1.}
    assert report.aggregates['objective_gap']['line'] is None
    assert report.aggregates['objective_gap_proved']['line'] is None

def test_compute_gap_report_empty():
    report = compute_gap_report({'ours': {}}, {'ours': {}}, {})
    assert not report.records
    assert all(table['ours'] is None for table in report.aggregates.values())

def test_sweep_frontier_missing_frontier(small_dataset):
    dataset = PortDataset.from_universe('no_uef', small_dataset.universe)
    with pytest.raises(DatasetMissing):
        sweep_frontier(dataset, ['ours'])

def test_sweep_frontier(small_dataset, small_settings):
    methods = ['line', 'ours', 'exact']
    sweep = sweep_frontier(small_dataset, methods, count=3, settings=small_settings)
    assert len(sweep.targets) == 3
    assert [p.method.value for p in sweep.points] == methods * 3
    assert len(sweep.percentage_errors) == len(sweep.pe_components) == len(sweep.points)
    for pe, components in zip(sweep.percentage_errors, sweep.pe_components):
        assert (pe is None) == (components is None)
        if pe is not None:
            vertical, horizontal = components
            assert pe == (vertical if horizontal is None else min(vertical, horizontal))
    for point, pe in zip(sweep.points, sweep.percentage_errors):
        assert (pe is None) == (point.status is PointStatus.INFEASIBLE)
        if pe is not None:
            assert pe >= 0.
            assert point.selection.popcount == 2
    for i in range(3):
        line, ours, exact = sweep.points[3 * i:3 * i + 3]
        if exact.is_ok and exact.proved_optimal:
            for point in (line, ours):
                assert not point.is_ok or point.risk >= exact.risk * (1. - 1e-8)
        if ours.is_ok or line.is_ok:
            assert exact.is_ok or not exact.proved_optimal
    assert set(sweep.pe_aggregates) == set(methods)
    assert sweep.gap_report is not None
    assert set(sweep.gap_report.aggregates['binary_gap']) == {'line', 'ours'}
    for record in sweep.gap_report.records:
        if record.reference_proved:
            assert record.objective_gap >= -1e-8

def test_sweep_frontier_jobs(small_dataset, small_settings):
    serial = sweep_frontier(small_dataset, ['ours'], count=3, settings=small_settings)
    threaded = sweep_frontier(small_dataset, ['ours'], count=3, settings=small_settings, jobs=3)
    assert [p.to_dict() for p in serial.points] == [p.to_dict() for p in threaded.points]
    assert serial.pe_aggregates == threaded.pe_aggregates
