import pytest

from resilsim.scenario_io.errors import ScenarioValidationError
from resilsim.scenario_io.overlays import apply_overlay, set_path, parse_risk_grid, load_risk_grid, risk_scenarios
from resilsim.scenario_io.scenario import parse_scenario
from resilsim.tests.conftest import TWO_TOWNS_RISKS, small_document


def test_set_path_by_id_and_by_position():
    doc = small_document()
    set_path(doc, 'diseases[flu].sir.beta', 0.9)
    set_path(doc, 'attackers[crew].campaign[0].base_outage', 3)
    set_path(doc, 'populations[1].size', 10)
    set_path(doc, 'horizon', 5)
    assert doc['diseases'][0]['sir']['beta'] == 0.9
    assert doc['attackers'][0]['campaign'][0]['base_outage'] == 3
    assert doc['populations'][1]['size'] == 10
    assert doc['horizon'] == 5


def test_set_path_may_add_the_last_key_only():
    doc = small_document()
    set_path(doc, 'hospitals[hospital_a].mhealth_enabled', True)
    assert doc['hospitals'][0]['mhealth_enabled'] is True
    with pytest.raises(KeyError):
        set_path(doc, 'hospitals[hospital_a].nothing.here', 1)
    with pytest.raises(KeyError):
        set_path(doc, 'hospitals[ghost].capacities.ICU', 1)
    with pytest.raises(KeyError):
        set_path(doc, 'horizon[0]', 1)


def test_apply_overlay_copies():
    doc = small_document()
    out = apply_overlay(doc, {'diseases[flu].sir.beta': 0.9})
    assert doc['diseases'][0]['sir']['beta'] == 0.4
    assert out['diseases'][0]['sir']['beta'] == 0.9


def test_apply_overlay_reports_every_bad_path():
    with pytest.raises(ScenarioValidationError) as e:
        apply_overlay(small_document(), {'diseases[measles].sir.beta': 1, 'it_nodes[x].vulnerability': 1,
                                         'horizon': 3})
    assert e.value.kinds == ['unknown_id', 'unknown_id']
    assert e.value.paths == ['diseases[measles].sir.beta', 'it_nodes[x].vulnerability']


def test_risk_grid_file():
    dimensions = load_risk_grid(TWO_TOWNS_RISKS)
    assert [d.name for d in dimensions] == ['attack', 'contagion', 'severity']
    assert [lvl.name for lvl in dimensions[0].levels] == ['highAttack', 'lowAttack']


@pytest.mark.parametrize('grid', [
    [],
    {'dimensions': {}},
    {'dimensions': [{'name': 'x', 'levels': {}}]},
    {'dimensions': [{'name': 'x', 'levels': {'high_risk': {}}}]},
    {'dimensions': [{'name': 'x', 'levels': {'a': {}}}, {'name': 'y', 'levels': {'a': {}}}]},
    {'dimensions': [{'name': 'x', 'levels': {'a': 3}}]},
])
def test_bad_risk_grids(grid):
    with pytest.raises(ScenarioValidationError):
        parse_risk_grid(grid)


def test_risk_scenarios_cartesian_product():
    doc = small_document()
    dimensions = parse_risk_grid({'dimensions': [
        {'name': 'attack', 'levels': {'highAttack': {'attackers[crew].campaign[0].base_outage': 40},
                                      'lowAttack': {}}},
        {'name': 'contagion', 'levels': {'highContagious': {'diseases[flu].sir.beta': 0.8},
                                         'lowContagious': {'diseases[flu].sir.beta': 0.2}}},
    ]})
    grid = risk_scenarios(doc, dimensions)
    assert list(grid) == ['highAttack_highContagious', 'highAttack_lowContagious', 'lowAttack_highContagious',
                          'lowAttack_lowContagious']
    cell = grid['highAttack_lowContagious']
    assert cell['name'] == 'highAttack_lowContagious'
    assert cell['attackers'][0]['campaign'][0]['base_outage'] == 40
    assert cell['diseases'][0]['sir']['beta'] == 0.2
    assert grid['lowAttack_highContagious']['attackers'][0]['campaign'][0]['base_outage'] == 20
    # every cell is still a valid scenario
    for d in grid.values():
        parse_scenario(d)


def test_no_dimensions_is_the_scenario_itself():
    doc = small_document()
    assert risk_scenarios(doc, []) == {'small': doc}
