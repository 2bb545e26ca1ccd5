import heapq
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from resilsim.disease_progression.health_states import HealthState, CareLevel, SERVICE_LEVELS, required_care
from resilsim.disease_progression.patients import Patient, PatientTable
from resilsim.engine.rng import RngStream, as_generator
from resilsim.epidemics.population import Population
from resilsim.healthcare.care_service import CareService, ServiceSnapshot


@dataclass(frozen=True)
class AllocationChange:
    """
    One thing allocate did to one patient. kind is one of admitted, promoted, fallback, transferred, queued,
    released. from_level/to_level are the held slots before and after (no_followup = none)
    """
    patient: int
    kind: str
    from_level: CareLevel
    to_level: CareLevel
    hospital: str


@dataclass(frozen=True)
class ReferralOutcome:
    kind: str  # 'transferred' or 'queued'
    hospital: str


class Hospital(object):
    def __init__(self, hospital_id: str, index: int, services: Dict[CareLevel, CareService], it_node: int = -1,
                 referral_partners: Sequence[int] = (), referral_enabled: bool = False):
        """
        index is the position of this hospital in the engine's (id sorted) hospital list, which is what patients store.
        referral_partners holds indices into that same list, in the configured order
        """
        assert set(services.keys()) == set(SERVICE_LEVELS), \
            f'hospital {hospital_id} needs exactly one service per care level, got {sorted(services.keys())}'
        assert index not in referral_partners, f'hospital {hospital_id} cannot refer to itself'
        self.id = hospital_id
        self.index = index
        self.services = services
        self.it_node = it_node
        self.referral_partners = list(referral_partners)
        self.referral_enabled = referral_enabled

        # pid -> level for patients in one of our queues
        self.queued: Dict[int, CareLevel] = {}
        # pid -> level for patients that asked for care today and have not been placed yet
        self.pending: Dict[int, CareLevel] = {}

        self.referrals_in = 0
        self.referrals_out = 0
        self.unattended_deaths = 0

        self.request_table = np.zeros(len(HealthState), dtype=np.int64)
        self.refresh_request_table()

    def __repr__(self):
        return f'Hospital({self.id}, {list(self.services.values())})'

    def refresh_request_table(self):
        """Call this whenever a service becomes (un)offered"""
        for h in HealthState:
            self.request_table[h] = self.request_level(h) if h.is_ill else CareLevel.no_followup

    def request_level(self, h: HealthState) -> CareLevel:
        """
        What a patient in state h asks this hospital for: the required level, or the highest offered level below it
        if this hospital does not offer it at all. no_followup means there is nothing here for this patient
        """
        c = required_care(HealthState(h))
        while c > CareLevel.no_followup and not self.services[c].offered:
            c = CareLevel(c - 1)
        return c

    def start_day(self, day: int):
        for s in self.services.values():
            s.start_day(day)
        self.referrals_in = 0
        self.referrals_out = 0
        self.unattended_deaths = 0

    def unattended(self, patients: PatientTable) -> int:
        """Patients waiting in one of our queues without holding any slot"""
        return sum(1 for pid in self.queued if patients.care[pid] == CareLevel.no_followup)

    @property
    def deaths(self) -> int:
        return self.unattended_deaths + sum(s.deaths for s in self.services.values())


def _release_slot(hospital: Hospital, pid: int, patients: PatientTable, day: int, died: bool = False):
    held = CareLevel(int(patients.care[pid]))
    if held != CareLevel.no_followup:
        hospital.services[held].release(pid, day, died)
        patients.care[pid] = CareLevel.no_followup


def _unqueue(hospital: Hospital, pid: int, patients: PatientTable):
    level = hospital.queued.pop(pid, None)
    if level is not None:
        hospital.services[level].dequeue(pid, int(patients.queue_day[pid]))
        patients.queue_day[pid] = -1
    hospital.pending.pop(pid, None)


def _enqueue(hospital: Hospital, pid: int, level: CareLevel, patients: PatientTable, day: int):
    hospital.pending.pop(pid, None)
    hospital.services[level].enqueue(pid, day)
    hospital.services[level].record_arrival()
    hospital.queued[pid] = level
    patients.queue_day[pid] = day


def _occupy(hospital: Hospital, pid: int, level: CareLevel, patients: PatientTable, day: int):
    _release_slot(hospital, pid, patients, day)
    hospital.services[level].admit(pid, day)
    patients.care[pid] = level
    patients.hospital[pid] = hospital.index


def discharge(hospital: Hospital, pid: int, patients: PatientTable, day: int):
    """Patient reached healthy or death: frees its slot, leaves every queue and goes home"""
    died = patients.state[pid] == HealthState.death
    if died and patients.care[pid] == CareLevel.no_followup:
        hospital.unattended_deaths += 1
    _release_slot(hospital, pid, patients, day, died=died)
    _unqueue(hospital, pid, patients)
    patients.hospital[pid] = -1


def route_new_patient(patient: Patient, populations: Sequence[Population], hospitals: Sequence[Hospital],
                      rng: Union[RngStream, np.random.Generator]) -> Optional[int]:
    """Home hospital of a new patient, sampled from its population's routing vector. None if there are no hospitals"""
    routes = route_patients(populations[patient.population], 1, rng)
    if len(hospitals) == 0 or routes[0] < 0:
        return None
    return int(routes[0])


def route_patients(pop: Population, count: int, rng: Union[RngStream, np.random.Generator]) -> np.ndarray:
    """Vectorized route_new_patient for count patients of one population. -1 where there is no hospital"""
    if len(pop.routing) == 0 or count == 0:
        return np.full(count, -1, dtype=np.int64)
    rng = as_generator(rng)
    return rng.choice(len(pop.routing), size=count, p=pop.routing).astype(np.int64)


def refer(from_hospital: Hospital, pid: int, patients: PatientTable, hospitals: Sequence[Hospital], day: int,
          level: Optional[CareLevel] = None) -> ReferralOutcome:
    """
    Called when the level a patient asks for is full at from_hospital. With referral enabled the patient moves to the
    first partner (configured order) that has room at that level. Otherwise the patient waits in from_hospital's
    queue, keeping whatever lower slot it already holds.
    """
    if level is None:
        level = from_hospital.pending.get(pid, from_hospital.queued.get(pid))
        if level is None:
            level = from_hospital.request_level(HealthState(int(patients.state[pid])))
    if from_hospital.referral_enabled:
        for idx in from_hospital.referral_partners:
            partner = hospitals[idx]
            if partner.services[level].has_room():
                _release_slot(from_hospital, pid, patients, day)
                _unqueue(from_hospital, pid, patients)
                partner.services[level].record_arrival()
                _occupy(partner, pid, level, patients, day)
                from_hospital.referrals_out += 1
                partner.referrals_in += 1
                return ReferralOutcome('transferred', partner.id)
    if from_hospital.queued.get(pid) != level:
        _unqueue(from_hospital, pid, patients)
        _enqueue(from_hospital, pid, level, patients, day)
    return ReferralOutcome('queued', from_hospital.id)


def _partner_has_room(hospital: Hospital, hospitals: Sequence[Hospital], level: CareLevel) -> bool:
    return hospital.referral_enabled and any(hospitals[i].services[level].has_room()
                                             for i in hospital.referral_partners)


def _admission_pass(hospital: Hospital, day: int, patients: PatientTable, hospitals: Sequence[Hospital],
                    changes: List[AllocationChange]) -> int:
    """
    Sicker first: levels top down. Within a level FCFS over the queue plus today's new requests (which arrive after
    everybody already queued). Admit if there is room, else refer (which queues the patient when nobody can take it)
    """
    moved = 0
    for level in reversed(SERVICE_LEVELS):
        service = hospital.services[level]
        new = sorted(pid for pid, lvl in hospital.pending.items() if lvl == level)
        candidates = heapq.merge(list(service.queue), [(day, pid) for pid in new])
        for _, pid in candidates:
            is_new = pid in hospital.pending
            held = CareLevel(int(patients.care[pid]))
            if service.has_room():
                _unqueue(hospital, pid, patients)
                if is_new:
                    service.record_arrival()
                _occupy(hospital, pid, level, patients, day)
                kind = 'admitted' if held == CareLevel.no_followup else 'promoted'
                changes.append(AllocationChange(pid, kind, held, level, hospital.id))
                moved += 1
            elif _partner_has_room(hospital, hospitals, level):
                outcome = refer(hospital, pid, patients, hospitals, day, level)
                changes.append(AllocationChange(pid, 'transferred', held, level, outcome.hospital))
                moved += 1
            else:
                # nobody can take anyone at this level any more, the rest of today's requests just queue up
                for late in [p for p in new if p in hospital.pending]:
                    refer(hospital, late, patients, hospitals, day, level)
                    late_held = CareLevel(int(patients.care[late]))
                    changes.append(AllocationChange(late, 'queued', late_held, late_held, hospital.id))
                break
    return moved


def _fallback_pass(hospital: Hospital, day: int, patients: PatientTable, changes: List[AllocationChange]) -> int:
    """Queued patients take the highest free level below the one they wait for (and above what they hold)"""
    moved = 0
    for level in reversed(SERVICE_LEVELS):
        below = [lvl for lvl in SERVICE_LEVELS if lvl < level]
        if not any(hospital.services[lvl].has_room() for lvl in below):
            continue
        for _, pid in list(hospital.services[level].queue):
            held = CareLevel(int(patients.care[pid]))
            for lvl in reversed(below):
                if lvl <= held:
                    break
                if hospital.services[lvl].has_room():
                    hospital.services[lvl].record_arrival()
                    _occupy(hospital, pid, lvl, patients, day)
                    changes.append(AllocationChange(pid, 'fallback', held, lvl, hospital.id))
                    moved += 1
                    break
            if not any(hospital.services[lvl].has_room() for lvl in below):
                break
    return moved


def allocate(hospital: Hospital, day: int, patients: PatientTable, hospitals: Sequence[Hospital],
             updates: Iterable[int] = ()) -> List[AllocationChange]:
    """
    Daily re-evaluation of who gets which slot.

    updates: ids of patients of this hospital whose health state changed since the last allocation, plus patients
    presenting today (patients.hospital already set to this hospital). Absorbed patients release their slots first.
    Everyone else asks for request_level(state); then admission (FCFS, with referral) and fallback to lower levels
    alternate until nothing moves, so no slot stays free while a compatible patient waits.
    """
    changes = []
    for pid in sorted(set(int(i) for i in updates)):
        assert patients.hospital[pid] == hospital.index, f'patient {pid} is not at hospital {hospital.id}'
        state = HealthState(int(patients.state[pid]))
        held = CareLevel(int(patients.care[pid]))
        if state.is_absorbing:
            discharge(hospital, pid, patients, day)
            changes.append(AllocationChange(pid, 'released', held, CareLevel.no_followup, hospital.id))
            continue
        wanted = CareLevel(int(hospital.request_table[state]))
        if held > wanted:
            _release_slot(hospital, pid, patients, day)
            changes.append(AllocationChange(pid, 'released', held, CareLevel.no_followup, hospital.id))
            held = CareLevel.no_followup
        current = hospital.queued.get(pid, hospital.pending.get(pid))
        if current is not None and current != wanted:
            _unqueue(hospital, pid, patients)
            current = None
        if wanted > held and current is None:
            hospital.pending[pid] = wanted
        elif wanted == CareLevel.no_followup and held == CareLevel.no_followup:
            patients.hospital[pid] = -1

    while _admission_pass(hospital, day, patients, hospitals, changes) + _fallback_pass(hospital, day, patients,
                                                                                        changes) > 0:
        pass
    assert not hospital.pending, 'every request must end up admitted, transferred or queued'
    return changes


def occupancy_metrics(hospital: Hospital, day: Optional[int] = None) -> Dict[CareLevel, ServiceSnapshot]:
    snapshot = {}
    for level, s in hospital.services.items():
        d = s.current_day if day is None else day
        snapshot[level] = ServiceSnapshot(occupancy=s.occupancy, free=s.free, capacity=s.capacity,
                                          queue_length=len(s.queue), mean_wait=s.mean_wait(d),
                                          utilization=s.utilization, quality=s.attention_quality,
                                          admissions=s.admissions, discharges=s.discharges, deaths=s.deaths,
                                          arrivals=s.arrivals)
    return snapshot


def build_services(capacities: Dict[CareLevel, Optional[float]], mhealth_enabled: bool = False
                   ) -> Dict[CareLevel, CareService]:
    """None capacity means unbounded. mHealth is only offered when enabled"""
    services = {}
    for level in SERVICE_LEVELS:
        cap = capacities.get(level)
        cap = np.inf if cap is None else cap
        enabled = mhealth_enabled if level == CareLevel.mHealth else True
        services[level] = CareService(level, cap, enabled)
    return services
