from typing import Callable, Dict, Union, Mapping, Tuple

import numpy as np

from resilsim.disease_progression.disease import DiseaseSpec, STAY, WORSENING, RECOVERY, DEATH
from resilsim.disease_progression.health_states import HealthState, CareLevel, ILL_STATES, required_care
from resilsim.disease_progression.patients import sample_transitions, next_states, effective_probs
from resilsim.engine.rng import RngStream, as_generator

CarePolicy = Union[str, Mapping[HealthState, CareLevel], Callable[[HealthState], CareLevel]]


def resolve_care_policy(policy: CarePolicy) -> Dict[HealthState, CareLevel]:
    """
    'required': everybody gets what they need. 'no_followup': nobody gets anything. Or a mapping/callable state -> care
    """
    if isinstance(policy, str):
        if policy == 'required':
            return {h: required_care(h) for h in ILL_STATES}
        if policy == 'no_followup':
            return {h: CareLevel.no_followup for h in ILL_STATES}
        raise ValueError(f"Unknown care policy {policy}. Use 'required', 'no_followup', a dict or a callable")
    if callable(policy):
        return {h: CareLevel(policy(h)) for h in ILL_STATES}
    return {HealthState(h): CareLevel(c) for h, c in policy.items()}


def _policy_transition_matrix(spec: DiseaseSpec, policy: Dict[HealthState, CareLevel]) -> np.ndarray:
    """Full 7x7 Markov matrix with care fixed per state by the policy"""
    n = len(HealthState)
    P = np.zeros((n, n))
    P[HealthState.healthy, HealthState.healthy] = 1
    P[HealthState.death, HealthState.death] = 1
    for h in ILL_STATES:
        p = spec.transition_table[h, policy[h]]
        P[h, h] += p[STAY]
        P[h, min(h + 1, HealthState.death)] += p[WORSENING]
        P[h, HealthState.healthy] += p[RECOVERY]
        P[h, HealthState.death] += p[DEATH]
    return P


def absorption_probabilities(spec: DiseaseSpec, care_policy: CarePolicy = 'required'
                             ) -> Dict[HealthState, Tuple[float, float]]:
    """
    Eventual (recovery, death) probability for a patient starting in each ill state, with care fixed by care_policy.
    Uses the fundamental matrix N = (I - Q)^-1 of the absorbing chain, B = N R
    """
    policy = resolve_care_policy(care_policy)
    P = _policy_transition_matrix(spec, policy)
    transient = [int(h) for h in ILL_STATES]
    absorbing = [int(HealthState.healthy), int(HealthState.death)]
    Q = P[np.ix_(transient, transient)]
    R = P[np.ix_(transient, absorbing)]
    B = np.linalg.solve(np.eye(len(transient)) - Q, R)
    return {h: (float(B[i, 0]), float(B[i, 1])) for i, h in enumerate(ILL_STATES)}


def expected_time_to_absorption(spec: DiseaseSpec, care_policy: CarePolicy = 'required') -> Dict[HealthState, float]:
    policy = resolve_care_policy(care_policy)
    P = _policy_transition_matrix(spec, policy)
    transient = [int(h) for h in ILL_STATES]
    Q = P[np.ix_(transient, transient)]
    t = np.linalg.solve(np.eye(len(transient)) - Q, np.ones(len(transient)))
    return {h: float(t[i]) for i, h in enumerate(ILL_STATES)}


def simulate_lifetimes(spec: DiseaseSpec, start_state: HealthState, n: int,
                       rng: Union[RngStream, np.random.Generator], care_policy: CarePolicy = 'required',
                       max_days: int = 100000) -> Dict[str, np.ndarray]:
    """
    Monte Carlo counterpart of absorption_probabilities: n independent patients start in start_state and evolve until
    absorbed. Returns the final states and the number of days each patient lived through
    """
    rng = as_generator(rng)
    policy = resolve_care_policy(care_policy)
    care_of_state = np.zeros(len(HealthState), dtype=np.int64)
    for h, c in policy.items():
        care_of_state[h] = c
    table = spec.transition_table

    states = np.full(n, int(start_state), dtype=np.int64)
    days = np.zeros(n, dtype=np.int64)
    active = np.flatnonzero((states != HealthState.healthy) & (states != HealthState.death))
    day = 0
    while len(active) and day < max_days:
        s = states[active]
        probs = table[s, care_of_state[s]]
        t = sample_transitions(probs, rng.random(len(active)))
        states[active] = next_states(s, t)
        days[active] += 1
        active = active[(states[active] != HealthState.healthy) & (states[active] != HealthState.death)]
        day += 1
    return {'final_state': states, 'days': days}


def simulate_sojourns(spec: DiseaseSpec, h: HealthState, c: CareLevel, n: int,
                      rng: Union[RngStream, np.random.Generator], quality: float = 1.0) -> Dict[str, np.ndarray]:
    """
    n patients held in (h, c) until they leave it. Returns the sojourn length (days, >= 1) and the exit transition
    (WORSENING, RECOVERY or DEATH) of each
    """
    rng = as_generator(rng)
    p = effective_probs(spec, HealthState(h), CareLevel(c), quality).as_array()
    if p[STAY] >= 1:
        raise ValueError('this state is never left')
    sojourn = np.zeros(n, dtype=np.int64)
    exits = np.full(n, -1, dtype=np.int64)
    active = np.arange(n)
    probs = np.broadcast_to(p, (n, 4))
    while len(active):
        t = sample_transitions(probs[:len(active)], rng.random(len(active)))
        sojourn[active] += 1
        left = t != STAY
        exits[active[left]] = t[left]
        active = active[~left]
    return {'sojourn': sojourn, 'exit': exits}
