from dataclasses import dataclass
from typing import Dict, List, Optional

import networkx as nx
import numpy as np

from resilsim.cyber.attacks import Attacker
from resilsim.cyber.it_node import ItNode
from resilsim.cyber.topology import build_it_graph
from resilsim.disease_progression.disease import DiseaseSpec, N_CARE, N_STATES
from resilsim.disease_progression.health_states import CareLevel, ILL_STATES, SERVICE_LEVELS
from resilsim.disease_progression.patients import PatientTable
from resilsim.engine.metrics import RunMetrics
from resilsim.engine.rng import RngStream, rng_substream
from resilsim.epidemics.population import Population, EpidemicState, MciEvent
from resilsim.healthcare.hospital import Hospital, build_services
from resilsim.scenario_io.countermeasures import effective_hospitals, effective_outage_caps
from resilsim.scenario_io.scenario import ScenarioConfig, QualityLaw

POPULATION_METRICS = ('susceptible', 'infected', 'recovered', 'new_infections', 'new_patients', 'daily_deaths',
                      'cumulative_deaths')
SERVICE_METRICS = ('occupancy', 'capacity', 'queue_length', 'mean_wait', 'utilization', 'quality', 'arrivals',
                   'admissions', 'discharges', 'deaths')
HOSPITAL_METRICS = ('referrals_in', 'referrals_out', 'unattended', 'unattended_deaths')
NODE_METRICS = ('status', 'quality', 'available', 'attacks_received', 'infected')


@dataclass
class SimClock:
    horizon: int
    step: int = 0

    def __post_init__(self):
        assert self.horizon >= 0, f'horizon must be >= 0, got {self.horizon}'

    def advance(self):
        assert self.step < self.horizon, f'cannot step past the horizon ({self.horizon})'
        self.step += 1

    @property
    def done(self) -> bool:
        return self.step >= self.horizon


def service_entity(hospital_id: str, level: CareLevel) -> str:
    return f'{hospital_id}:{level.name}'


class World(object):
    """
    Everything one run mutates. Agents are kept sorted by id and every random draw comes from a stream keyed by
    (phase, entity id, day), so results do not depend on the order agents were declared in.
    """

    def __init__(self, clock: SimClock, master_seed: int, run_index: int, diseases: List[DiseaseSpec],
                 populations: List[Population], hospitals: List[Hospital], it_nodes: List[ItNode],
                 attackers: List[Attacker], contact_matrix: Optional[np.ndarray] = None,
                 quality_law: QualityLaw = QualityLaw(), verbose: bool = False):
        self.clock = clock
        self.master_seed = master_seed
        self.run_index = run_index
        self.diseases = diseases
        self.populations = populations
        self.hospitals = hospitals
        self.it_nodes = it_nodes
        self.attackers = attackers
        self.contact_matrix = contact_matrix
        self.quality_law = quality_law
        self.verbose = verbose

        assert all(h.it_node < len(it_nodes) for h in hospitals)
        self.node_index = {n.id: i for i, n in enumerate(it_nodes)}
        self.it_graph: nx.DiGraph = build_it_graph(it_nodes)
        self.q_eff: Dict[str, float] = {n.id: 1. for n in it_nodes}
        self.hospital_q_it: List[Dict[CareLevel, float]] = [{lvl: 1. for lvl in SERVICE_LEVELS} for _ in hospitals]

        self.patients = PatientTable()
        # patients whose health state changed in the last progression phase and who still hold a place at a hospital.
        # The absorbed ones among them are released by the next allocation
        self.changed = np.zeros(0, dtype=np.int64)

        if diseases:
            self.transition_tables = np.stack([d.transition_table for d in diseases])
            self.degraded_tables = np.stack([d.degraded_table for d in diseases])
        else:
            self.transition_tables = np.zeros((0, N_STATES, N_CARE, 4))
            self.degraded_tables = np.zeros((0, N_STATES, N_CARE, 4))
        self.request_tables = np.stack([h.request_table for h in hospitals]) if hospitals else \
            np.zeros((0, N_STATES), dtype=np.int64)

        self.metrics = RunMetrics(self.metric_keys(), verbose=False)

    def rng(self, *key) -> RngStream:
        return rng_substream(self.master_seed, self.run_index, tuple(key))

    def node(self, node_id: str) -> ItNode:
        return self.it_nodes[self.node_index[node_id]]

    def metric_keys(self) -> List[str]:
        keys = []
        for p in self.populations:
            keys.extend(f'{p.id}.{m}' for m in POPULATION_METRICS)
        for h in self.hospitals:
            keys.extend(f'{h.id}.{m}' for m in HOSPITAL_METRICS)
            for level in SERVICE_LEVELS:
                keys.extend(f'{service_entity(h.id, level)}.{m}' for m in SERVICE_METRICS)
        for n in self.it_nodes:
            keys.extend(f'{n.id}.{m}' for m in NODE_METRICS)
        return keys


def _distribution(weights: Dict[str, float], order: List[str]) -> np.ndarray:
    return np.array([weights.get(k, 0.) for k in order], dtype=float)


def build_world(config: ScenarioConfig, master_seed: int, run_index: int, verbose: bool = False) -> World:
    """
    Fresh agents for one run of config, countermeasures applied. Nothing is seeded or logged yet, that is what
    simulation.create_world adds on top
    """
    diseases_cfg = sorted(config.diseases, key=lambda d: d.id)
    disease_index = {d.id: i for i, d in enumerate(diseases_cfg)}
    diseases = [d.to_spec() for d in diseases_cfg]

    caps = effective_outage_caps(config)
    nodes_cfg = sorted(config.it_nodes, key=lambda n: n.id)
    node_index = {n.id: i for i, n in enumerate(nodes_cfg)}
    it_nodes = [ItNode(n.id, n.service_capacity, n.vulnerability, n.recovery_capacity, list(n.depends_on),
                       n.recovery_ramp_days, n.degraded_quality, outage_cap_days=caps.get(n.id))
                for n in nodes_cfg]

    hospitals_cfg = sorted(effective_hospitals(config), key=lambda h: h.id)
    hospital_order = [h.id for h in hospitals_cfg]
    hospital_index = {h: i for i, h in enumerate(hospital_order)}
    hospitals = []
    for i, h in enumerate(hospitals_cfg):
        capacities = {level: h.capacities.get(level.name) for level in SERVICE_LEVELS}
        hospitals.append(Hospital(h.id, i, build_services(capacities, h.mhealth_enabled),
                                  it_node=node_index[h.it_node] if h.it_node is not None else -1,
                                  referral_partners=[hospital_index[p] for p in h.referral_partners],
                                  referral_enabled=h.referral_enabled))

    ill_names = [h.name for h in ILL_STATES]
    populations_cfg = sorted(config.populations, key=lambda p: p.id)
    populations = []
    for p in populations_cfg:
        epidemics = [EpidemicState(disease_index[e.disease], susceptible=p.size, infected=0, recovered=0,
                                   start_day=e.start_day, initial_infected=e.initial_infected)
                     for e in sorted(p.epidemics, key=lambda e: e.disease)]
        mci = [MciEvent(m.start_day, m.casualty_count, _distribution(m.severity_distribution, ill_names),
                        disease_index[m.disease]) for m in p.mci_events]
        populations.append(Population(
            p.id, p.size, p.baseline_incidence,
            disease_index[p.baseline_disease] if p.baseline_disease is not None else -1,
            _distribution(p.baseline_entry, ill_names),
            _distribution(p.routing, hospital_order) if p.routing and hospital_order else np.zeros(0),
            mci_events=mci, epidemics=epidemics))

    contact = None
    if config.contact_matrix is not None:
        order = [p.id for p in populations_cfg]
        contact = np.eye(len(order))
        for i, pid in enumerate(order):
            if pid in config.contact_matrix:
                contact[i] = _distribution(config.contact_matrix[pid], order)

    attackers = [Attacker(a.id, a.threat_level, a.target, list(a.campaign))
                 for a in sorted(config.attackers, key=lambda a: a.id)]

    return World(SimClock(config.horizon), master_seed, run_index, diseases, populations, hospitals, it_nodes,
                 attackers, contact, config.quality_law, verbose)
