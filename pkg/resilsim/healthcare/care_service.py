import bisect
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from resilsim.configuration import DEFAULT_QUALITY_K, DEFAULT_QUALITY_FLOOR, DEFAULT_UTILIZATION_WINDOW
from resilsim.disease_progression.health_states import CareLevel


class CareService(object):
    """
    One care level of one hospital. occupants maps patient id -> admission day (insertion ordered), queue holds
    (arrival_day, patient id) sorted ascending, which is the FCFS order.

    capacity is np.inf for unbounded services (mHealth by default). A service with capacity 0 or enabled=False is not
    offered at all; it_available is switched by the coupled IT node every day (only mHealth cares)
    """

    def __init__(self, level: CareLevel, capacity: float = np.inf, enabled: bool = True):
        assert level.is_service, 'no_followup is not a service'
        assert capacity >= 0, f'capacity must be >= 0, got {capacity}'
        self.level = level
        self.capacity = capacity
        self.enabled = enabled
        self.it_available = True
        self.attention_quality = 1.
        self.utilization = 0.
        self.occupants: Dict[int, int] = {}
        self.queue: List[Tuple[int, int]] = []

        # today's counters, reset by start_day
        self.arrivals = 0
        self.admissions = 0
        self.discharges = 0
        self.deaths = 0
        self._stay_sum = 0
        self._stay_count = 0
        # one entry per closed day, today lives in the counters above
        self.arrivals_history: List[int] = []
        self.stays_history: List[Tuple[int, int]] = []
        # over the whole run, for the mean treatment time
        self.total_stay_days = 0
        self.total_stays = 0
        self.current_day = 0
        self._day_open = False

    def __repr__(self):
        return f'CareService({self.level.name}, {len(self.occupants)}/{self.capacity}, queue={len(self.queue)})'

    @property
    def offered(self) -> bool:
        return self.enabled and self.capacity > 0

    @property
    def is_open(self) -> bool:
        """Can admit patients right now"""
        return self.offered and self.it_available

    @property
    def occupancy(self) -> int:
        return len(self.occupants)

    @property
    def free(self) -> float:
        return self.capacity - len(self.occupants)

    def has_room(self) -> bool:
        return self.is_open and self.free > 0

    def start_day(self, day: int):
        if self._day_open:
            self.arrivals_history.append(self.arrivals)
            self.stays_history.append((self._stay_sum, self._stay_count))
        self._day_open = True
        self.current_day = day
        self.arrivals = 0
        self.admissions = 0
        self.discharges = 0
        self.deaths = 0
        self._stay_sum = 0
        self._stay_count = 0

    def record_arrival(self, n: int = 1):
        self.arrivals += n

    def admit(self, pid: int, day: int):
        assert pid not in self.occupants, f'patient {pid} already occupies {self.level.name}'
        assert len(self.occupants) < self.capacity, f'{self.level.name} is full'
        self.occupants[pid] = day
        self.admissions += 1

    def release(self, pid: int, day: int, died: bool = False):
        admitted = self.occupants.pop(pid)
        # a stay that ends the day it started still took one day of care
        self.record_stay(max(day - admitted, 1))
        self.discharges += 1
        if died:
            self.deaths += 1

    def record_stay(self, days: int):
        self._stay_sum += days
        self._stay_count += 1
        self.total_stay_days += days
        self.total_stays += 1

    def enqueue(self, pid: int, arrival_day: int):
        bisect.insort(self.queue, (arrival_day, pid))

    def dequeue(self, pid: int, arrival_day: int):
        i = bisect.bisect_left(self.queue, (arrival_day, pid))
        assert i < len(self.queue) and self.queue[i] == (arrival_day, pid), f'patient {pid} is not queued here'
        del self.queue[i]

    def mean_wait(self, day: int) -> float:
        if not self.queue:
            return 0.
        return float(np.mean([day - a for a, _ in self.queue]))

    @property
    def mean_treatment_time(self) -> float:
        return self.total_stay_days / self.total_stays if self.total_stays else 0.


def service_quality(service: Optional[CareService], it_factor: float, utilization: float,
                    k: float = DEFAULT_QUALITY_K, q_floor: float = DEFAULT_QUALITY_FLOOR) -> float:
    """
    q = q_it * q_occ(rho). q_occ is 1 up to rho = 1 and then drops linearly with slope k, never below q_floor.
    service is not needed for the law itself, it is accepted so the call reads like the rest of the service API
    """
    if not 0 <= it_factor <= 1:
        raise ValueError(f'it_factor must be in [0, 1], got {it_factor}')
    if utilization < 0:
        raise ValueError(f'utilization must be >= 0, got {utilization}')
    if utilization <= 1:
        q_occ = 1.
    else:
        q_occ = max(q_floor, 1 - k * (utilization - 1))
    return float(min(max(it_factor * q_occ, 0.), 1.))


def utilization_rate(service: CareService, window: int = DEFAULT_UTILIZATION_WINDOW) -> float:
    """
    Offered load over the last `window` days (today included): arrival rate * mean service time / capacity.
    < 1 means the service copes with its demand, > 1 is overload. 0 before any arrival and for unbounded services.

    Mean service time comes from the stays completed in the window. If none completed we use how long the current
    occupants have been in so far (a lower bound, but better than nothing during the first days)
    """
    if window < 1:
        raise ValueError(f'window must be >= 1, got {window}')
    if not np.isfinite(service.capacity) or service.capacity <= 0:
        return 0.
    past = window - 1
    arrivals = (service.arrivals_history[-past:] if past else []) + [service.arrivals]
    if sum(arrivals) == 0:
        return 0.
    arrival_rate = sum(arrivals) / len(arrivals)
    stays = (service.stays_history[-past:] if past else []) + [(service._stay_sum, service._stay_count)]
    stay_sum = sum(s for s, _ in stays)
    stay_count = sum(c for _, c in stays)
    if stay_count > 0:
        mean_service_time = stay_sum / stay_count
    elif service.occupants:
        mean_service_time = float(np.mean([max(service.current_day - d, 1) for d in service.occupants.values()]))
    else:
        mean_service_time = 0.
    return arrival_rate * mean_service_time / service.capacity


@dataclass(frozen=True)
class ServiceSnapshot:
    occupancy: int
    free: float
    capacity: float
    queue_length: int
    mean_wait: float
    utilization: float
    quality: float
    admissions: int
    discharges: int
    deaths: int
    arrivals: int
