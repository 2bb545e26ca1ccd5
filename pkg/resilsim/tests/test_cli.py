import json
import os

import pandas as pd
import pytest

from resilsim.run.cli import cli, EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME
from resilsim.tests.conftest import TWO_TOWNS, small_document


def _write(folder, name, document):
    path = os.path.join(str(folder), name)
    with open(path, 'w') as f:
        json.dump(document, f)
    return path


@pytest.fixture
def small_file(tmp_path):
    return _write(tmp_path, 'small.json', small_document(horizon=10))


def test_validate(small_file, tmp_path, capsys):
    assert cli(['validate', TWO_TOWNS]) == EXIT_OK
    assert 'ok' in capsys.readouterr().out
    assert cli(['validate', small_file]) == EXIT_OK

    broken = small_document()
    broken['hospitals'][1]['referral_partners'] = ['ghost']
    assert cli(['validate', _write(tmp_path, 'broken.json', broken)]) == EXIT_VALIDATION
    assert 'hospitals[hospital_b].referral_partners[0]' in capsys.readouterr().err

    not_json = os.path.join(str(tmp_path), 'not.json')
    with open(not_json, 'w') as f:
        f.write('{"horizon": ')
    assert cli(['validate', not_json]) == EXIT_VALIDATION
    assert cli(['validate', os.path.join(str(tmp_path), 'missing.json')]) == EXIT_RUNTIME


def test_simulate_writes_every_file(small_file, tmp_path):
    out = os.path.join(str(tmp_path), 'out')
    assert cli(['simulate', small_file, '--out', out, '--runs', '2', '--parallel', '1']) == EXIT_OK
    assert sorted(os.listdir(out)) == ['kpis.csv', 'mean.csv', 'resilsim_log.txt', 'run_000.csv', 'run_001.csv']
    mean = pd.read_csv(os.path.join(out, 'mean.csv'))
    runs = [pd.read_csv(os.path.join(out, f'run_00{i}.csv')) for i in range(2)]
    assert len(mean) == 11
    pd.testing.assert_series_equal(mean['town_b.infected'], (runs[0]['town_b.infected'] +
                                                             runs[1]['town_b.infected']) / 2, check_dtype=False)
    kpis = pd.read_csv(os.path.join(out, 'kpis.csv'))
    assert 'cumulative_deaths' in set(kpis['metric'])


def test_simulate_is_reproducible(small_file, tmp_path):
    contents = []
    for i in range(2):
        out = os.path.join(str(tmp_path), f'out{i}')
        assert cli(['simulate', small_file, '--out', out, '--runs', '1', '--seed', '5', '--parallel', '1',
                    '--measure', 'lowBeds+referral']) == EXIT_OK
        with open(os.path.join(out, 'run_000.csv'), 'rb') as f:
            contents.append(f.read())
    assert contents[0] == contents[1]


def test_simulate_usage_errors(small_file, tmp_path):
    out = os.path.join(str(tmp_path), 'out')
    assert cli(['simulate', small_file, '--out', out, '--measure', 'moreNurses']) == EXIT_VALIDATION
    assert cli(['simulate', small_file, '--out', out, '--runs', '0']) == EXIT_VALIDATION
    assert cli(['simulate', small_file, '--out', out, '--seed', '-2']) == EXIT_VALIDATION


def test_matrix(small_file, tmp_path):
    risks = _write(tmp_path, 'risks.json', {'dimensions': [
        {'name': 'attack', 'levels': {'highAttack': {'attackers[crew].campaign[0].base_outage': 40},
                                      'lowAttack': {}}}]})
    probs = _write(tmp_path, 'probs.json', {'highAttack': 0.25, 'lowAttack': 0.75})
    target = os.path.join(str(tmp_path), 'matrix', 'deaths.csv')
    args = ['matrix', small_file, '--risks', risks, '--measures', 'highBeds,highSecurity', '--merit', 'deaths',
            '--out', target, '--runs', '2', '--parallel', '1', '--risk-probs', probs]
    assert cli(args) == EXIT_OK
    frame = pd.read_csv(target, index_col=0)
    assert list(frame.index) == ['highAttack', 'lowAttack']
    assert list(frame.columns) == ['baseline', 'highBeds', 'highSecurity', 'baseline.rank', 'highBeds.rank',
                                   'highSecurity.rank']
    assert (frame[['baseline.rank', 'highBeds.rank', 'highSecurity.rank']].min(axis=1) == 1).all()
    assert os.path.isfile(target + '.txt')
    with open(os.path.join(str(tmp_path), 'matrix', 'resilsim_log.txt')) as f:
        assert 'best alternative' in f.read()

    with open(target, 'rb') as f:
        first = f.read()
    assert cli(args) == EXIT_OK
    with open(target, 'rb') as f:
        assert f.read() == first


def test_matrix_usage_errors(small_file, tmp_path):
    target = os.path.join(str(tmp_path), 'm.csv')
    assert cli(['matrix', small_file, '--out', target, '--hospital', 'ghost', '--runs', '1']) == EXIT_VALIDATION
    assert cli(['matrix', small_file, '--out', target, '--measures', 'lowBeds,moreNurses']) == EXIT_VALIDATION
    bad_risks = _write(tmp_path, 'bad_risks.json', {'dimensions': [
        {'name': 'x', 'levels': {'high': {'diseases[measles].sir.beta': 1}}}]})
    assert cli(['matrix', small_file, '--out', target, '--risks', bad_risks, '--runs', '1']) == EXIT_VALIDATION
    with pytest.raises(SystemExit):
        cli(['matrix', small_file, '--out', target, '--merit', 'happiness'])


def test_matrix_checks_risk_probabilities_first(small_file, tmp_path, monkeypatch):
    def fail(*args, **kwargs):
        raise AssertionError('the grid must not run with broken risk probabilities')

    monkeypatch.setattr('resilsim.run.cli.run_montecarlo', fail)
    target = os.path.join(str(tmp_path), 'm.csv')
    for probs in ({'typoAttack': 1.}, {'baseline': -1.}, {'baseline': 0.}, [0.5, 0.5]):
        path = _write(tmp_path, 'probs.json', probs)
        assert cli(['matrix', small_file, '--out', target, '--runs', '1', '--risk-probs', path]) == EXIT_VALIDATION


def test_value_error_during_a_run_is_a_runtime_error(small_file, tmp_path, monkeypatch):
    def broken(*args, **kwargs):
        raise ValueError('probabilities do not sum to 1')

    monkeypatch.setattr('resilsim.run.cli.run_montecarlo', broken)
    out = os.path.join(str(tmp_path), 'out')
    assert cli(['simulate', small_file, '--out', out, '--runs', '1']) == EXIT_RUNTIME
    assert cli(['simulate', small_file, '--out', out, '--measure', 'moreNurses']) == EXIT_VALIDATION
