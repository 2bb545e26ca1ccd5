from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Union, Sequence

import numpy as np

from resilsim.disease_progression.disease import DiseaseSpec, TransitionProbs, derive_transition_probs, \
    apply_quality, interpolate_quality, STAY, WORSENING, RECOVERY, DEATH
from resilsim.disease_progression.health_states import HealthState, CareLevel, lower_care, required_care
from resilsim.engine.rng import RngStream, as_generator


@dataclass(frozen=True)
class Patient:
    """
    A single patient agent. The engine keeps patients in a PatientTable (one row per patient) for speed, Patient is
    the row as a value. care_received is the level of the slot the patient currently holds (no_followup = no slot).
    arrival_day_in_queue is None unless the patient waits for its required level
    """
    id: int
    population: int
    disease: int
    state: HealthState
    care_received: CareLevel = CareLevel.no_followup
    arrival_day_in_queue: Optional[int] = None
    days_waiting: int = 0
    days_in_current_state: int = 0
    hospital: Optional[int] = None
    home_hospital: Optional[int] = None
    created_day: int = 0
    epidemic: bool = False

    def __post_init__(self):
        if self.state.is_absorbing:
            assert self.hospital is None or self.care_received == CareLevel.no_followup, \
                'dead/healthy patients hold no hospital slot'
        else:
            assert self.care_received <= required_care(self.state), \
                f'patient {self.id} receives {self.care_received.name} but only needs ' \
                f'{required_care(self.state).name}'

    @property
    def alive(self) -> bool:
        return self.state != HealthState.death


def sample_transitions(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """
    probs: (n, 4) rows of (stay, worsening, recovery, death). u: (n,) uniforms in [0, 1). Returns transition codes
    (STAY, WORSENING, RECOVERY, DEATH) by inverse cdf
    """
    cdf = np.cumsum(probs, axis=1)[:, :3]
    return (u[:, None] >= cdf).sum(axis=1)


def next_states(states: np.ndarray, transitions: np.ndarray) -> np.ndarray:
    new = states.copy()
    new[transitions == WORSENING] += 1  # critical + 1 == death
    new[transitions == RECOVERY] = HealthState.healthy
    new[transitions == DEATH] = HealthState.death
    return new


def effective_probs(spec: DiseaseSpec, h: HealthState, c: CareLevel, quality: float) -> TransitionProbs:
    nominal = derive_transition_probs(spec, h, c)
    if h.is_absorbing:
        return nominal
    degraded = derive_transition_probs(spec, h, lower_care(c))
    return apply_quality(nominal, degraded, quality)


def patient_step(patient: Patient, spec: DiseaseSpec, quality: float, rng: Union[RngStream, np.random.Generator]
                 ) -> Patient:
    """
    Samples one day of disease evolution for a single patient under the care it currently receives, at the attention
    quality of the service providing it
    """
    if patient.state.is_absorbing:
        return patient
    rng = as_generator(rng)
    probs = effective_probs(spec, patient.state, patient.care_received, quality)
    t = int(sample_transitions(probs.as_array()[None], np.array([rng.random()]))[0])
    waiting = patient.days_waiting + (1 if patient.arrival_day_in_queue is not None else 0)
    if t == STAY:
        return replace(patient, days_in_current_state=patient.days_in_current_state + 1, days_waiting=waiting)
    new_state = HealthState(int(next_states(np.array([patient.state]), np.array([t]))[0]))
    if new_state.is_absorbing:
        return replace(patient, state=new_state, days_in_current_state=0, days_waiting=waiting,
                       care_received=CareLevel.no_followup, hospital=None, arrival_day_in_queue=None)
    return replace(patient, state=new_state, days_in_current_state=0, days_waiting=waiting)


class PatientTable(object):
    """
    Structure of arrays holding every patient of a run. Row index == patient id, ids are handed out in creation
    order, which the engine keeps independent of how the scenario file orders its agents
    """
    _fields = {
        'population': (np.int32, -1),
        'disease': (np.int32, -1),
        'state': (np.int8, 0),
        'care': (np.int8, 0),
        'hospital': (np.int32, -1),
        'home_hospital': (np.int32, -1),
        'queue_day': (np.int32, -1),
        'days_waiting': (np.int32, 0),
        'days_in_state': (np.int32, 0),
        'created_day': (np.int32, 0),
        'epidemic': (np.bool_, False),
    }

    def __init__(self, initial_capacity: int = 1024):
        self.n = 0
        self._capacity = max(int(initial_capacity), 1)
        for name, (dtype, fill) in self._fields.items():
            setattr(self, name, np.full(self._capacity, fill, dtype=dtype))

    def __len__(self):
        return self.n

    def _grow(self, needed: int):
        new_capacity = self._capacity
        while new_capacity < needed:
            new_capacity *= 2
        if new_capacity == self._capacity:
            return
        for name, (dtype, fill) in self._fields.items():
            old = getattr(self, name)
            new = np.full(new_capacity, fill, dtype=dtype)
            new[:self.n] = old[:self.n]
            setattr(self, name, new)
        self._capacity = new_capacity

    def add(self, count: int, population: int, disease: int, states: Union[int, Sequence[int], np.ndarray],
            day: int, epidemic: bool, home_hospitals: Union[int, Sequence[int], np.ndarray] = -1) -> np.ndarray:
        if count == 0:
            return np.zeros(0, dtype=np.int64)
        self._grow(self.n + count)
        ids = np.arange(self.n, self.n + count)
        self.population[ids] = population
        self.disease[ids] = disease
        self.state[ids] = states
        self.care[ids] = CareLevel.no_followup
        self.hospital[ids] = -1
        self.home_hospital[ids] = home_hospitals
        self.queue_day[ids] = -1
        self.days_waiting[ids] = 0
        self.days_in_state[ids] = 0
        self.created_day[ids] = day
        self.epidemic[ids] = epidemic
        self.n += count
        return ids

    def view(self, name: str) -> np.ndarray:
        return getattr(self, name)[:self.n]

    def active_ids(self) -> np.ndarray:
        states = self.view('state')
        return np.flatnonzero((states != HealthState.healthy) & (states != HealthState.death))

    def get(self, pid: int) -> Patient:
        hospital = int(self.hospital[pid])
        home = int(self.home_hospital[pid])
        queue_day = int(self.queue_day[pid])
        return Patient(id=int(pid), population=int(self.population[pid]), disease=int(self.disease[pid]),
                       state=HealthState(int(self.state[pid])), care_received=CareLevel(int(self.care[pid])),
                       arrival_day_in_queue=None if queue_day < 0 else queue_day,
                       days_waiting=int(self.days_waiting[pid]), days_in_current_state=int(self.days_in_state[pid]),
                       hospital=None if hospital < 0 else hospital, home_hospital=None if home < 0 else home,
                       created_day=int(self.created_day[pid]), epidemic=bool(self.epidemic[pid]))


def progress_patients(table: PatientTable, transition_tables: np.ndarray, degraded_tables: np.ndarray,
                      quality: np.ndarray, rng: Union[RngStream, np.random.Generator]) -> np.ndarray:
    """
    Vectorized patient_step for every active patient of the table, in id order (one uniform per patient).

    transition_tables/degraded_tables: (n_diseases, N_STATES, N_CARE, 4), stacked DiseaseSpec.transition_table and
    degraded_table. quality: (n_active,) attention quality of the service each active patient is in (1 for patients at
    home). Returns the transition codes of the active patients (aligned with table.active_ids() before the call).
    Absorbed patients keep their care/hospital fields here. Releasing their slots is the hospitals' job
    """
    rng = as_generator(rng)
    ids = table.active_ids()
    if len(ids) == 0:
        return np.zeros(0, dtype=np.int64)
    diseases = table.disease[ids]
    states = table.state[ids].astype(np.int64)
    cares = table.care[ids].astype(np.int64)
    nominal = transition_tables[diseases, states, cares]
    degraded = degraded_tables[diseases, states, cares]
    probs = interpolate_quality(nominal, degraded, np.clip(quality, 0, 1))
    u = rng.random(len(ids))
    transitions = sample_transitions(probs, u)

    new_states = next_states(states, transitions)
    changed = new_states != states
    table.days_in_state[ids] = np.where(changed, 0, table.days_in_state[ids] + 1)
    table.state[ids] = new_states
    waiting = table.queue_day[ids] >= 0
    table.days_waiting[ids[waiting]] += 1
    return transitions
