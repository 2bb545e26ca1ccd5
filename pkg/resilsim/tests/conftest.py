import copy
import os

import pytest

from resilsim.disease_progression.disease import DiseaseSpec
from resilsim.epidemics.sir import SirParams

SCENARIO_FOLDER = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'scenarios')
TWO_TOWNS = os.path.join(SCENARIO_FOLDER, 'two_towns.json')
TWO_TOWNS_RISKS = os.path.join(SCENARIO_FOLDER, 'two_towns_risks.json')

SOJOURN = {
    'very_mild': {'no_followup': 5},
    'mild': {'no_followup': 6, 'mHealth': 5},
    'moderate': {'no_followup': 7, 'mHealth': 6, 'inPerson': 5},
    'severe': {'no_followup': 5, 'mHealth': 6, 'inPerson': 7, 'generalBed': 8},
    'critical': {'no_followup': 2, 'mHealth': 3, 'inPerson': 4, 'generalBed': 6, 'ICU': 10},
}
OUTCOMES = {
    'very_mild': {'no_followup': [90, 9.95, 0.05]},
    'mild': {'no_followup': [70, 29.95, 0.05], 'mHealth': [85, 14.95, 0.05]},
    'moderate': {'no_followup': [50, 48, 2], 'mHealth': [70, 29.95, 0.05], 'inPerson': [85, 14.95, 0.05]},
    'severe': {'no_followup': [20, 50, 30], 'mHealth': [35, 50, 15], 'inPerson': [50, 40, 10],
               'generalBed': [80, 18, 2]},
    'critical': {'no_followup': [1, 0, 99], 'mHealth': [20, 0, 80], 'inPerson': [60, 0, 40],
                 'generalBed': [70, 0, 30], 'ICU': [90, 0, 10]},
}


def disease_document(disease_id: str = 'flu', beta: float = 0.3, gamma: float = 0.1) -> dict:
    return {'id': disease_id, 'sir': {'beta': beta, 'gamma': gamma}, 'entry_state': 'very_mild',
            'sojourn': copy.deepcopy(SOJOURN), 'outcomes': copy.deepcopy(OUTCOMES)}


def minimal_document(horizon: int = 10) -> dict:
    """One population, no hospitals, no IT. The smallest valid scenario"""
    return {'schema_version': 1, 'name': 'minimal', 'horizon': horizon,
            'diseases': [disease_document()],
            'populations': [{'id': 'town', 'size': 1000}]}


def small_document(horizon: int = 30) -> dict:
    """
    Two towns, two small hospitals behind one IT hierarchy, an epidemic, baseline demand and a ransomware attack on
    hospital_b's node. Small enough to run in well under a second
    """
    return {
        'schema_version': 1, 'name': 'small', 'horizon': horizon,
        'monte_carlo': {'n_runs': 3, 'master_seed': 7},
        'diseases': [disease_document('flu', beta=0.4, gamma=0.1), disease_document('usual', beta=0, gamma=0)],
        'populations': [
            {'id': 'town_a', 'size': 2000, 'baseline_incidence': 200, 'baseline_disease': 'usual',
             'baseline_entry': {'moderate': 0.6, 'severe': 0.3, 'critical': 0.1}, 'routing': {'hospital_a': 1}},
            {'id': 'town_b', 'size': 5000, 'baseline_incidence': 200, 'baseline_disease': 'usual',
             'baseline_entry': {'moderate': 0.6, 'severe': 0.3, 'critical': 0.1}, 'routing': {'hospital_b': 1},
             'epidemics': [{'disease': 'flu', 'initial_infected': 10, 'start_day': 0}]},
        ],
        'hospitals': [
            {'id': 'hospital_a', 'capacities': {'inPerson': 50, 'generalBed': 20, 'ICU': 5},
             'it_node': 'hospital_a_it'},
            {'id': 'hospital_b', 'capacities': {'inPerson': 20, 'generalBed': 8, 'ICU': 2},
             'it_node': 'hospital_b_it', 'referral_partners': ['hospital_a']},
        ],
        'it_nodes': [
            {'id': 'regional_it', 'service_capacity': 1000, 'vulnerability': 'low'},
            {'id': 'hospital_a_it', 'service_capacity': 100, 'vulnerability': 'medium',
             'depends_on': ['regional_it']},
            {'id': 'hospital_b_it', 'service_capacity': 100, 'vulnerability': 1.0, 'depends_on': ['regional_it']},
        ],
        'attackers': [
            {'id': 'crew', 'threat_level': 1, 'target': 'hospital_b_it',
             'campaign': [{'kind': 'ransomware', 'start_day': 5, 'base_outage': 20}]},
        ],
        'countermeasures': {'targets': ['hospital_b']},
    }


def make_spec(disease_id: str = 'flu', beta: float = 0.3, gamma: float = 0.1) -> DiseaseSpec:
    return DiseaseSpec.from_tables(disease_id, SirParams(beta, gamma), SOJOURN, OUTCOMES)


@pytest.fixture
def spec() -> DiseaseSpec:
    return make_spec()


@pytest.fixture
def minimal_doc() -> dict:
    return minimal_document()


@pytest.fixture
def small_doc() -> dict:
    return small_document()
