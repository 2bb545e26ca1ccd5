import os

import numpy as np
import pytest

from resilsim.engine.simulation import run_simulation
from resilsim.scenario_io.scenario import parse_scenario
from resilsim.scenario_io.timeseries import write_timeseries, write_kpis, read_timeseries, timeseries_frame
from resilsim.tests.conftest import minimal_document, small_document


def test_one_row_per_day_plus_header(tmp_path):
    metrics = run_simulation(parse_scenario(small_document(horizon=12)), 7, 0)
    target = os.path.join(str(tmp_path), 'run.csv')
    write_timeseries(metrics, target)
    with open(target, 'rb') as f:
        content = f.read()
    lines = content.split(b'\r\n')
    # header, 13 days (0..12) and the empty string after the last line end
    assert len(lines) == 12 + 2 + 1 and lines[-1] == b''
    header = lines[0].decode().split(',')
    assert header[0] == 'day'
    assert header[1:] == sorted(header[1:], key=lambda c: c.rpartition('.')[::2])
    df = read_timeseries(target)
    np.testing.assert_array_equal(df['day'], np.arange(13))
    assert 'hospital_b:ICU.occupancy' in df.columns and 'town_b.infected' in df.columns
    assert 'hospital_b_it.quality' in df.columns


def test_identical_runs_give_identical_bytes(tmp_path):
    config = parse_scenario(small_document(horizon=15))
    paths = []
    for i in range(2):
        paths.append(os.path.join(str(tmp_path), f'run{i}.csv'))
        write_timeseries(run_simulation(config, 3, 1), paths[-1])
    with open(paths[0], 'rb') as a, open(paths[1], 'rb') as b:
        assert a.read() == b.read()


def test_world_without_hospitals(tmp_path):
    metrics = run_simulation(parse_scenario(minimal_document(horizon=4)), 0, 0)
    frame = timeseries_frame(metrics)
    assert len(frame) == 5
    assert not any(':' in c for c in frame.columns)
    target = os.path.join(str(tmp_path), 'kpis.csv')
    write_kpis(metrics, target)
    kpis = read_timeseries(target)
    assert list(kpis.columns) == ['metric', 'value']
    assert list(kpis['metric']) == sorted(kpis['metric'])


def test_empty_world(tmp_path):
    metrics = run_simulation(parse_scenario({'horizon': 3}), 0, 0)
    target = os.path.join(str(tmp_path), 'empty.csv')
    write_timeseries(metrics, target)
    with open(target, 'rb') as f:
        assert f.read() == b'day\r\n0\r\n1\r\n2\r\n3\r\n'


def test_unwritable_target():
    metrics = run_simulation(parse_scenario(minimal_document(horizon=2)), 0, 0)
    with pytest.raises(RuntimeError) as e:
        write_timeseries(metrics, '/nonexistent/folder/run.csv')
    assert '/nonexistent/folder/run.csv' in str(e.value)
