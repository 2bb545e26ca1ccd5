from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from resilsim.configuration import INCIDENCE_BASE
from resilsim.disease_progression.health_states import HealthState, ILL_STATES
from resilsim.engine.rng import RngStream, as_generator


@dataclass
class MciEvent:
    """
    Mass casualty incident. severity_distribution is a probability vector over the ill states (very_mild .. critical)
    """
    start_day: int
    casualty_count: int
    severity_distribution: np.ndarray
    disease: int = 0

    def __post_init__(self):
        self.severity_distribution = np.asarray(self.severity_distribution, dtype=float)
        assert self.severity_distribution.shape == (len(ILL_STATES),), \
            f'severity distribution needs one entry per ill state, got {self.severity_distribution.shape}'
        assert abs(self.severity_distribution.sum() - 1) < 1e-9, 'severity distribution must sum to 1'
        assert self.casualty_count >= 0


@dataclass
class EpidemicState:
    """SIR compartments of one contagious disease within one population"""
    disease: int
    susceptible: int
    infected: int
    recovered: int
    start_day: int = 0
    initial_infected: int = 0
    seeded: bool = False
    new_infections: int = 0

    @property
    def total(self) -> int:
        return self.susceptible + self.infected + self.recovered


@dataclass
class Population:
    id: str
    size: int
    baseline_incidence: float = 0.
    baseline_disease: int = -1
    # probability vector over the ill states for baseline patients
    baseline_entry: np.ndarray = field(default_factory=lambda: _one_hot(HealthState.moderate))
    # probability vector over hospitals (engine order). Empty when there is no hospital
    routing: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mci_events: List[MciEvent] = field(default_factory=list)
    epidemics: List[EpidemicState] = field(default_factory=list)
    cumulative_deaths: int = 0
    daily_deaths: int = 0
    new_patients: int = 0

    def __post_init__(self):
        self.routing = np.asarray(self.routing, dtype=float)
        if len(self.routing):
            assert np.all(self.routing >= 0) and abs(self.routing.sum() - 1) < 1e-9, \
                f'routing of population {self.id} must be a probability vector, got {self.routing}'

    @property
    def susceptible(self) -> int:
        return sum(e.susceptible for e in self.epidemics) if self.epidemics else self.size - self.cumulative_deaths

    @property
    def infected(self) -> int:
        return sum(e.infected for e in self.epidemics)

    @property
    def recovered(self) -> int:
        return sum(e.recovered for e in self.epidemics)

    @property
    def new_infections(self) -> int:
        return sum(e.new_infections for e in self.epidemics)

    def remove_deceased(self, epidemic_disease: Optional[int] = None):
        """
        Removes one dead person from the SIR compartments of every epidemic. For the epidemic that killed the person we
        take them out of R (they are past their infectious period) or else I. Everywhere else they were susceptible
        (else recovered, else infected)
        """
        self.cumulative_deaths += 1
        self.daily_deaths += 1
        for e in self.epidemics:
            if e.disease == epidemic_disease:
                order = ('recovered', 'infected', 'susceptible')
            else:
                order = ('susceptible', 'recovered', 'infected')
            for compartment in order:
                if getattr(e, compartment) > 0:
                    setattr(e, compartment, getattr(e, compartment) - 1)
                    break


def _one_hot(h: HealthState) -> np.ndarray:
    v = np.zeros(len(ILL_STATES))
    v[ILL_STATES.index(h)] = 1
    return v


def baseline_demand(pop: Population, rng: Union[RngStream, np.random.Generator]) -> int:
    """New baseline patients today, Poisson with mean size * incidence / 100000"""
    if pop.baseline_incidence < 0:
        raise ValueError(f'baseline incidence must be >= 0, got {pop.baseline_incidence}')
    if pop.baseline_incidence == 0:
        return 0
    rng = as_generator(rng)
    return int(rng.poisson(pop.size * pop.baseline_incidence / INCIDENCE_BASE))


def mci_casualties(event: MciEvent, rng: Union[RngStream, np.random.Generator]) -> List[Tuple[HealthState, int]]:
    rng = as_generator(rng)
    counts = rng.multinomial(event.casualty_count, event.severity_distribution)
    return [(h, int(c)) for h, c in zip(ILL_STATES, counts) if c > 0]


def mci_surge(pop: Population, day: int, rng: Union[RngStream, np.random.Generator]
              ) -> List[Tuple[HealthState, int]]:
    """Casualties of every incident of this population that starts today. Empty if there is none"""
    rng = as_generator(rng)
    surge = []
    for event in pop.mci_events:
        if event.start_day == day:
            surge.extend(mci_casualties(event, rng))
    return surge


def infectious_pressure(populations: List[Population], contact_matrix: np.ndarray, disease: int) -> np.ndarray:
    """
    For every population i: sum_j M[i, j] * I_j / N_j for the given disease. With the identity matrix this is the
    plain I / N of the SIR model. Populations without this disease contribute nothing
    """
    prevalence = np.zeros(len(populations))
    for j, p in enumerate(populations):
        for e in p.epidemics:
            if e.disease == disease and e.total > 0:
                prevalence[j] = e.infected / e.total
    return contact_matrix @ prevalence
