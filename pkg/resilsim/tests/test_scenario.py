import json
import os

import pytest

from resilsim.scenario_io.errors import ScenarioValidationError, Problem
from resilsim.scenario_io.scenario import parse_scenario, load_scenario, serialize_scenario, save_scenario
from resilsim.tests.conftest import TWO_TOWNS, small_document


def _problems(document):
    with pytest.raises(ScenarioValidationError) as e:
        parse_scenario(document)
    return e.value


def test_minimal_document_is_valid(minimal_doc):
    config = parse_scenario(minimal_doc)
    assert config.horizon == 10
    assert config.monte_carlo.n_runs == 1 and config.monte_carlo.master_seed == 0
    assert config.hospitals == () and config.it_nodes == ()
    assert config.population('town').size == 1000


def test_two_towns_fixture():
    config = load_scenario(TWO_TOWNS)
    assert config.horizon == 350
    assert config.monte_carlo.n_runs == 10
    assert config.population('town_a').size == 40000
    assert config.population('town_b').size == 150000
    b = config.hospital('hospital_b')
    assert b.capacities == {'mHealth': None, 'inPerson': 1000, 'generalBed': 278, 'ICU': 30}
    assert b.referral_partners == ('hospital_a',)
    nodes = {n.id: n for n in config.it_nodes}
    assert nodes['hospital_b_it'].vulnerability == 0.9 and nodes['hospital_b_it'].vulnerability_class == 'high'
    assert config.attackers[0].campaign[0].base_outage == 10


def test_json_text_is_accepted(minimal_doc):
    assert parse_scenario(json.dumps(minimal_doc)) == parse_scenario(minimal_doc)
    err = _problems('{"horizon": ')
    assert err.kinds == ['schema'] and err.paths == ['$']


def test_unknown_reference_is_located():
    doc = small_document()
    doc['hospitals'][1]['referral_partners'] = ['ghost']
    err = _problems(doc)
    assert err.problems == [Problem('hospitals[hospital_b].referral_partners[0]', 'unknown_id', err.problems[0].message)]
    assert 'ghost' in str(err)


def test_cyclic_it_graph(minimal_doc):
    minimal_doc['it_nodes'] = [{'id': 'a', 'service_capacity': 1, 'depends_on': ['b']},
                               {'id': 'b', 'service_capacity': 1, 'depends_on': ['a']}]
    assert _problems(minimal_doc).kinds == ['cyclic_it_graph']


def test_outcomes_must_add_up_to_100(minimal_doc):
    minimal_doc['diseases'][0]['outcomes']['moderate']['inPerson'] = [85, 14, 0.05]
    err = _problems(minimal_doc)
    assert err.kinds == ['outcomes_not_100']
    assert err.paths == ['diseases[flu].outcomes.moderate.inPerson']


def test_rounding_in_outcomes_is_tolerated(minimal_doc):
    minimal_doc['diseases'][0]['outcomes']['moderate']['inPerson'] = [85, 14.9, 0.05]
    parse_scenario(minimal_doc)


def test_sojourn_below_one(minimal_doc):
    minimal_doc['diseases'][0]['sojourn']['severe']['generalBed'] = 0.5
    assert _problems(minimal_doc).kinds == ['sojourn_below_one']


@pytest.mark.parametrize('horizon', [0, -3, 2.5, 'long', True, None])
def test_bad_horizon(minimal_doc, horizon):
    minimal_doc['horizon'] = horizon
    assert _problems(minimal_doc).kinds == ['bad_horizon']


def test_routing_must_be_normalizable():
    doc = small_document()
    doc['populations'][0]['routing'] = {'hospital_a': 0}
    assert _problems(doc).kinds == ['non_normalizable']


def test_routing_is_normalized():
    doc = small_document()
    doc['populations'][0]['routing'] = {'hospital_a': 3, 'hospital_b': 1}
    assert parse_scenario(doc).population('town_a').routing == {'hospital_a': 0.75, 'hospital_b': 0.25}


def test_ids_are_unique_across_sections(minimal_doc):
    minimal_doc['hospitals'] = [{'id': 'town', 'capacities': {'ICU': 1}}]
    err = _problems(minimal_doc)
    assert err.paths == ['hospitals[town].id'] and err.kinds == ['schema']


def test_every_problem_is_reported():
    doc = small_document()
    doc['horizon'] = 0
    doc['hospitals'][0]['it_node'] = 'nowhere'
    doc['populations'][1]['epidemics'][0]['disease'] = 'measles'
    doc['unexpected'] = 1
    err = _problems(doc)
    assert set(err.kinds) == {'bad_horizon', 'unknown_id', 'schema'}
    assert {'horizon', 'hospitals[hospital_a].it_node', 'populations[town_b].epidemics[0].disease',
            '$.unexpected'} <= set(err.paths)


def test_hospitals_need_a_node_when_there_are_nodes():
    doc = small_document()
    del doc['hospitals'][0]['it_node']
    assert _problems(doc).paths == ['hospitals[hospital_a].it_node']


def test_events_are_validated():
    doc = small_document()
    doc['attackers'][0]['campaign'] = [{'kind': 'phishing', 'start_day': 3},
                                       {'kind': 'ransomware', 'start_day': 3},
                                       {'kind': 'ddos', 'start_day': 500, 'request_load': 10}]
    err = _problems(doc)
    assert err.paths == ['attackers[crew].campaign[0].kind', 'attackers[crew].campaign[1].base_outage',
                         'attackers[crew].campaign[2].start_day']


def test_round_trip(tmp_path):
    config = load_scenario(TWO_TOWNS)
    assert parse_scenario(serialize_scenario(config)) == config
    small = parse_scenario(small_document())
    target = os.path.join(str(tmp_path), 'small.json')
    save_scenario(small, target)
    assert load_scenario(target) == small


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        load_scenario('/nonexistent/scenario.json')
