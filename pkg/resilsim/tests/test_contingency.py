import os

import numpy as np
import pandas as pd
import pytest

from resilsim.engine.metrics import RunMetrics, mean_metrics
from resilsim.scenario_io.contingency import ContingencyMatrix, IncompleteGridError, build_contingency_matrix, \
    expected_merit, merit_value


def _mean(deaths_a, deaths_b, utilization, hospital_deaths=(0, 0), unattended=(0, 0)):
    """Two day result: populations a and b, one hospital h with one ICU"""
    run = RunMetrics(['a.cumulative_deaths', 'b.cumulative_deaths', 'h:ICU.utilization', 'h:ICU.deaths',
                      'h.unattended_deaths'])
    run.log_row(0, {'a.cumulative_deaths': 0, 'b.cumulative_deaths': 0, 'h:ICU.utilization': 0,
                    'h:ICU.deaths': hospital_deaths[0], 'h.unattended_deaths': unattended[0]})
    run.log_row(1, {'a.cumulative_deaths': deaths_a, 'b.cumulative_deaths': deaths_b,
                    'h:ICU.utilization': utilization, 'h:ICU.deaths': hospital_deaths[1],
                    'h.unattended_deaths': unattended[1]})
    return mean_metrics([run])


def test_merit_values():
    mean = _mean(3, 4, 1.5, hospital_deaths=(1, 2), unattended=(0, 1))
    assert merit_value(mean, 'deaths') == 7
    assert merit_value(mean, 'cumulative_deaths', hospital='h') == 4
    assert merit_value(mean, 'utilization') == 1.5
    assert merit_value(mean, 'peak_utilization', hospital='h') == 1.5
    with pytest.raises(KeyError):
        merit_value(mean, 'deaths', hospital='ghost')
    with pytest.raises(ValueError):
        merit_value(mean, 'happiness')


def test_single_risk_two_measures():
    results = {('only', 'baseline'): _mean(5, 5, 1), ('only', 'highBeds'): _mean(2, 2, 1)}
    m = build_contingency_matrix(results, 'deaths')
    assert m.shape == (1, 2)
    assert m.columns == ['baseline', 'highBeds']
    np.testing.assert_array_equal(m.values, [[10, 4]])
    np.testing.assert_array_equal(m.ranks, [[2, 1]])
    assert m.best_column('only') == ['highBeds']


def test_ties_share_rank_one():
    results = {('r', 'baseline'): _mean(1, 1, 2.), ('r', 'mHealth'): _mean(1, 1, 2.), ('r', 'lowBeds'): _mean(1, 1, 3.)}
    m = build_contingency_matrix(results, 'utilization', measures=['mHealth', 'lowBeds'])
    assert m.columns == ['baseline', 'mHealth', 'lowBeds']
    np.testing.assert_array_equal(m.ranks, [[1, 1, 3]])
    assert m.best_column('r') == ['baseline', 'mHealth']


def test_missing_cell():
    results = {('r1', 'baseline'): _mean(1, 1, 1), ('r1', 'highBeds'): _mean(1, 1, 1),
               ('r2', 'baseline'): _mean(1, 1, 1)}
    with pytest.raises(IncompleteGridError):
        build_contingency_matrix(results, 'deaths')
    with pytest.raises(IncompleteGridError):
        build_contingency_matrix({}, 'deaths')
    with pytest.raises(ValueError):
        build_contingency_matrix(results, 'happiness')


def test_matrix_needs_a_baseline():
    with pytest.raises(AssertionError):
        ContingencyMatrix(['r'], ['highBeds'], np.zeros((1, 1)), 'cumulative_deaths')


def test_expected_merit():
    m = ContingencyMatrix(['calm', 'storm'], ['baseline', 'highBeds'], np.array([[10., 12.], [100., 40.]]),
                          'cumulative_deaths')
    expected, best = expected_merit(m, {'calm': 0.9, 'storm': 0.1})
    assert expected == pytest.approx({'baseline': 19., 'highBeds': 14.8})
    assert best == 'highBeds'
    # weights are normalized
    assert expected_merit(m, {'calm': 9, 'storm': 1})[0] == pytest.approx(expected)
    expected, best = expected_merit(m, {'calm': 1})
    assert best == 'baseline'
    with pytest.raises(KeyError):
        expected_merit(m, {'earthquake': 1})
    with pytest.raises(ValueError):
        expected_merit(m, {'calm': 0})


def test_writers(tmp_path):
    m = ContingencyMatrix(['calm', 'storm'], ['baseline', 'highBeds'], np.array([[10., 12.], [100., 40.]]),
                          'cumulative_deaths')
    target = os.path.join(str(tmp_path), 'matrix.csv')
    m.write_csv(target)
    with open(target, 'rb') as f:
        assert f.read().startswith(b'risk,baseline,highBeds,baseline.rank,highBeds.rank\r\n')
    frame = pd.read_csv(target, index_col='risk')
    assert list(frame['highBeds.rank']) == [2, 1]
    text = m.to_text()
    assert '10.00 (1)' in text and '40.00 (1)' in text and 'cumulative_deaths' in text
    m.write_text(target + '.txt')
    with open(target + '.txt') as f:
        assert f.read() == text + '\n'
    with pytest.raises(RuntimeError):
        m.write_csv('/nonexistent/folder/matrix.csv')
