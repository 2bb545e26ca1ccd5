from typing import List

import numpy as np

from resilsim.cyber.attacks import launch_attacks, resolve_attack, botnet_spread
from resilsim.cyber.it_node import recovery_step
from resilsim.cyber.topology import propagate_dependencies, couple_to_hospital
from resilsim.disease_progression.disease import STAY, N_CARE
from resilsim.disease_progression.health_states import HealthState, CareLevel, ILL_STATES
from resilsim.disease_progression.patients import progress_patients
from resilsim.engine.metrics import RunMetrics
from resilsim.engine.world import World, SimClock, build_world, service_entity
from resilsim.epidemics.population import baseline_demand, mci_casualties, infectious_pressure, Population
from resilsim.epidemics.sir import sir_step
from resilsim.healthcare.care_service import service_quality, utilization_rate
from resilsim.healthcare.hospital import allocate, discharge, occupancy_metrics, route_patients
from resilsim.scenario_io.scenario import ScenarioConfig

_ILL_STATE_VALUES = np.array([int(h) for h in ILL_STATES], dtype=np.int64)


def _spawn(world: World, pop_index: int, disease: int, states, count: int, day: int, epidemic: bool,
           route_rng) -> int:
    if count == 0:
        return 0
    homes = route_patients(world.populations[pop_index], count, route_rng)
    world.patients.add(count, pop_index, disease, states, day, epidemic, homes)
    return count


def seed_epidemics(world: World, day: int):
    """Moves the initial infected of every epidemic starting today from S to I and creates their patients"""
    for i, pop in enumerate(world.populations):
        route_rng = world.rng('seed', pop.id, day)
        for e in pop.epidemics:
            if e.seeded or e.start_day != day:
                continue
            n = min(e.initial_infected, e.susceptible)
            e.susceptible -= n
            e.infected += n
            e.new_infections = n
            e.seeded = True
            spec = world.diseases[e.disease]
            pop.new_patients += _spawn(world, i, e.disease, int(spec.entry_state), n, day, True, route_rng)


def cyber_phase(world: World, day: int, attacks: bool = True):
    """Recovery, today's attacks, botnet spread, dependency propagation, coupling into the hospitals"""
    law = world.quality_law
    if attacks:
        for node in world.it_nodes:
            recovery_step(node)
        node_ids = [n.id for n in world.it_nodes]
        for attacker in world.attackers:
            bots = [n.id for n in world.it_nodes if n.infected and n.infected_by == attacker.id]
            launched = launch_attacks(attacker, day, world.rng('launch', attacker.id, day), node_ids, bots)
            for k, (event, target) in enumerate(launched):
                resolve_attack(world.node(target), event, attacker.threat_level,
                               world.rng('attack', attacker.id, day, k), law.ddos_absorb_factor, attacker.id)
        if any(n.infected for n in world.it_nodes):
            botnet_spread(world.it_nodes, world.it_graph, world.rng('botnet', day), law.p_spread)
        for node in world.it_nodes:
            node.check_invariants()

    world.q_eff = propagate_dependencies(world.it_nodes, world.it_graph)
    for h in world.hospitals:
        q = world.q_eff[world.it_nodes[h.it_node].id] if h.it_node >= 0 else 1.
        q_it, mhealth_available = couple_to_hospital(q, law.q_floor)
        world.hospital_q_it[h.index] = q_it
        h.services[CareLevel.mHealth].it_available = mhealth_available


def demand_phase(world: World, day: int):
    """MCI casualties, baseline incidence and epidemic infections become new patients, population by population"""
    pressures = {}
    if world.contact_matrix is not None:
        for d in sorted({e.disease for p in world.populations for e in p.epidemics}):
            pressures[d] = infectious_pressure(world.populations, world.contact_matrix, d)

    seed_epidemics(world, day)
    for i, pop in enumerate(world.populations):
        route_rng = world.rng('route', pop.id, day)
        created = 0
        for k, event in enumerate(pop.mci_events):
            if event.start_day != day:
                continue
            for h, count in mci_casualties(event, world.rng('mci', pop.id, day, k)):
                created += _spawn(world, i, event.disease, int(h), count, day, False, route_rng)

        if pop.baseline_incidence > 0 and pop.baseline_disease >= 0:
            stream = world.rng('baseline', pop.id, day)
            n = baseline_demand(pop, stream)
            if n > 0:
                states = stream.choice(_ILL_STATE_VALUES, size=n, p=pop.baseline_entry)
                created += _spawn(world, i, pop.baseline_disease, states, n, day, False, route_rng)

        for e in pop.epidemics:
            if not e.seeded or e.start_day == day:
                continue
            spec = world.diseases[e.disease]
            pressure = pressures[e.disease][i] if e.disease in pressures else None
            e.susceptible, e.infected, e.recovered, new = sir_step(
                e.susceptible, e.infected, e.recovered, spec.sir, world.rng('sir', pop.id, spec.id, day), pressure)
            e.new_infections = new
            created += _spawn(world, i, e.disease, int(spec.entry_state), new, day, True, route_rng)
        pop.new_patients += created


def allocation_phase(world: World, day: int):
    """Patients present at their home hospital, hospitals allocate, then attention quality is updated"""
    if not world.hospitals:
        return
    table = world.patients
    updates: List[List[int]] = [[] for _ in world.hospitals]

    ids = table.active_ids()
    at_home = ids[(table.hospital[ids] < 0) & (table.home_hospital[ids] >= 0)]
    if len(at_home):
        homes = table.home_hospital[at_home]
        wants_care = world.request_tables[homes, table.state[at_home]] > CareLevel.no_followup
        presenting = at_home[wants_care]
        table.hospital[presenting] = table.home_hospital[presenting]
        for pid in presenting:
            updates[table.hospital[pid]].append(int(pid))
    for pid in world.changed:
        if table.hospital[pid] >= 0:
            updates[table.hospital[pid]].append(int(pid))

    for h in world.hospitals:
        allocate(h, day, table, world.hospitals, updates[h.index])

    law = world.quality_law
    for h in world.hospitals:
        for level, s in h.services.items():
            s.utilization = utilization_rate(s, law.utilization_window)
            s.attention_quality = service_quality(s, world.hospital_q_it[h.index][level], s.utilization, law.k,
                                                  law.q_floor)


def progression_phase(world: World, day: int):
    """
    One Markov step for every active patient. Deaths leave the population right away. Patients who moved keep their
    slots until the next allocation, which releases the absorbed ones first
    """
    table = world.patients
    ids = table.active_ids()
    if len(ids) == 0:
        world.changed = np.zeros(0, dtype=np.int64)
        return
    # last row is for patients at home (hospital -1)
    lookup = np.ones((len(world.hospitals) + 1, N_CARE))
    for h in world.hospitals:
        for level, s in h.services.items():
            lookup[h.index, level] = s.attention_quality
    quality = lookup[table.hospital[ids], table.care[ids]]

    transitions = progress_patients(table, world.transition_tables, world.degraded_tables, quality,
                                    world.rng('progression', day))
    moved = ids[transitions != STAY]
    states = table.state[moved]
    for pid in moved[states == HealthState.death]:
        pop: Population = world.populations[table.population[pid]]
        pop.remove_deceased(int(table.disease[pid]) if table.epidemic[pid] else None)
    world.changed = moved[table.hospital[moved] >= 0]


def sample_metrics(world: World):
    step = world.clock.step
    row = {}
    for p in world.populations:
        row[f'{p.id}.susceptible'] = p.susceptible
        row[f'{p.id}.infected'] = p.infected
        row[f'{p.id}.recovered'] = p.recovered
        row[f'{p.id}.new_infections'] = p.new_infections
        row[f'{p.id}.new_patients'] = p.new_patients
        row[f'{p.id}.daily_deaths'] = p.daily_deaths
        row[f'{p.id}.cumulative_deaths'] = p.cumulative_deaths
        for e in p.epidemics:
            assert e.total + p.cumulative_deaths == p.size, f'population {p.id} is not conserved on day {step}'
    for h in world.hospitals:
        row[f'{h.id}.referrals_in'] = h.referrals_in
        row[f'{h.id}.referrals_out'] = h.referrals_out
        row[f'{h.id}.unattended'] = h.unattended(world.patients)
        row[f'{h.id}.unattended_deaths'] = h.unattended_deaths
        for level, snap in occupancy_metrics(h, step).items():
            e = service_entity(h.id, level)
            assert snap.occupancy <= snap.capacity, f'{e} over capacity on day {step}'
            row[f'{e}.occupancy'] = snap.occupancy
            row[f'{e}.capacity'] = float(snap.capacity)
            row[f'{e}.queue_length'] = snap.queue_length
            row[f'{e}.mean_wait'] = snap.mean_wait
            row[f'{e}.utilization'] = snap.utilization
            row[f'{e}.quality'] = snap.quality
            row[f'{e}.arrivals'] = snap.arrivals
            row[f'{e}.admissions'] = snap.admissions
            row[f'{e}.discharges'] = snap.discharges
            row[f'{e}.deaths'] = snap.deaths
    for n in world.it_nodes:
        q = world.q_eff[n.id]
        row[f'{n.id}.status'] = int(n.status)
        row[f'{n.id}.quality'] = q
        row[f'{n.id}.available'] = int(q > 0)
        row[f'{n.id}.attacks_received'] = n.attacks_received
        row[f'{n.id}.infected'] = int(n.infected)
    world.metrics.log_row(step, row)


def _start_day(world: World, day: int):
    for p in world.populations:
        p.daily_deaths = 0
        p.new_patients = 0
        for e in p.epidemics:
            e.new_infections = 0
    for h in world.hospitals:
        h.start_day(day)


def create_world(config: ScenarioConfig, master_seed: int, run_index: int, verbose: bool = False) -> World:
    """build_world plus the initial state: day 0 epidemics seeded, IT coupling evaluated, metrics row 0 logged"""
    world = build_world(config, master_seed, run_index, verbose)
    _start_day(world, 0)
    seed_epidemics(world, 0)
    cyber_phase(world, 0, attacks=False)
    sample_metrics(world)
    return world


def step(world: World) -> World:
    """
    Advances the clock by one day and runs the phases in their fixed order: cyber, demand, allocation, progression,
    metrics. Mutates world and returns it
    """
    world.clock.advance()
    day = world.clock.step
    _start_day(world, day)
    cyber_phase(world, day)
    demand_phase(world, day)
    allocation_phase(world, day)
    progression_phase(world, day)
    sample_metrics(world)
    if world.verbose and day % 50 == 0:
        print(f'run {world.run_index}: day {day}/{world.clock.horizon}, {len(world.patients)} patients so far')
    return world


def finish_run(world: World) -> RunMetrics:
    """End-of-run aggregates. Stays that ended on the last day are closed first so they count in the treatment times"""
    table = world.patients
    for pid in world.changed:
        if table.state[pid] in (HealthState.healthy, HealthState.death):
            discharge(world.hospitals[table.hospital[pid]], int(pid), table, world.clock.step + 1)
    world.changed = np.zeros(0, dtype=np.int64)
    m = world.metrics
    agg = m.aggregates
    agg['cumulative_deaths'] = float(sum(p.cumulative_deaths for p in world.populations))
    agg['patients_created'] = float(len(world.patients))
    for p in world.populations:
        agg[f'{p.id}.cumulative_deaths'] = float(p.cumulative_deaths)
        assert p.cumulative_deaths == sum(m.series[f'{p.id}.daily_deaths']), \
            f'cumulative deaths of {p.id} do not add up'
    peak = 0.
    for h in world.hospitals:
        for level, s in h.services.items():
            e = service_entity(h.id, level)
            agg[f'{e}.peak_utilization'] = float(np.max(m.get(f'{e}.utilization')))
            agg[f'{e}.mean_treatment_time'] = float(s.mean_treatment_time)
            peak = max(peak, agg[f'{e}.peak_utilization'])
    agg['peak_utilization'] = peak
    for level in CareLevel:
        if not level.is_service:
            continue
        services = [h.services[level] for h in world.hospitals]
        stays = sum(s.total_stays for s in services)
        agg[f'{level.name}.mean_treatment_time'] = \
            float(sum(s.total_stay_days for s in services) / stays) if stays else 0.
    return m


def run_simulation(scenario: ScenarioConfig, master_seed: int, run_index: int, verbose: bool = False) -> RunMetrics:
    """One full run, horizon steps after the initial state. Pure function of its arguments"""
    if run_index < 0:
        raise ValueError(f'run_index must be >= 0, got {run_index}')
    world = create_world(scenario, master_seed, run_index, verbose)
    while not world.clock.done:
        step(world)
    return finish_run(world)


__all__ = ['SimClock', 'World', 'create_world', 'step', 'run_simulation', 'finish_run', 'sample_metrics']
