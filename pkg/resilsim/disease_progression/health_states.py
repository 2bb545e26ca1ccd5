from enum import IntEnum
from typing import Union


class HealthState(IntEnum):
    # the integer values are used as array indices all over the place. Worsening is state + 1, so critical worsens
    # into death without any special casing
    healthy = 0
    very_mild = 1
    mild = 2
    moderate = 3
    severe = 4
    critical = 5
    death = 6

    @property
    def is_ill(self) -> bool:
        return HealthState.very_mild <= self <= HealthState.critical

    @property
    def is_absorbing(self) -> bool:
        return self in (HealthState.healthy, HealthState.death)


class CareLevel(IntEnum):
    no_followup = 0
    mHealth = 1
    inPerson = 2
    generalBed = 3
    ICU = 4

    @property
    def is_service(self) -> bool:
        # no_followup is what you get at home. It is not provided by any hospital
        return self != CareLevel.no_followup


ILL_STATES = tuple(h for h in HealthState if h.is_ill)
SERVICE_LEVELS = tuple(c for c in CareLevel if c.is_service)


def required_care(h: Union[HealthState, int]) -> CareLevel:
    """
    very_mild -> no_followup, mild -> mHealth, moderate -> inPerson, severe -> generalBed, critical -> ICU
    """
    h = HealthState(h)
    if not h.is_ill:
        raise ValueError(f'required_care is only defined for ill states, got {h.name}')
    return CareLevel(int(h) - 1)


def lower_care(c: Union[CareLevel, int]) -> CareLevel:
    """One level below c. no_followup stays no_followup"""
    return CareLevel(max(int(c) - 1, 0))


def is_admissible(h: Union[HealthState, int], c: Union[CareLevel, int]) -> bool:
    # triangular structure of the sojourn/outcome tables: nobody gets more care than they need
    return HealthState(h).is_ill and int(c) <= int(required_care(h))


def parse_health_state(name: Union[str, int, HealthState]) -> HealthState:
    if isinstance(name, str):
        try:
            return HealthState[name]
        except KeyError:
            raise ValueError(f'Unknown health state {name}. Valid: {[h.name for h in HealthState]}')
    return HealthState(name)


def parse_care_level(name: Union[str, int, CareLevel]) -> CareLevel:
    if isinstance(name, str):
        try:
            return CareLevel[name]
        except KeyError:
            raise ValueError(f'Unknown care level {name}. Valid: {[c.name for c in CareLevel]}')
    return CareLevel(name)
