from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence, Union

import numpy as np

from resilsim.configuration import QUALITY_EXPONENT
from resilsim.disease_progression.health_states import HealthState, CareLevel, ILL_STATES, is_admissible, \
    lower_care, parse_health_state, parse_care_level
from resilsim.epidemics.sir import SirParams

N_STATES = len(HealthState)
N_CARE = len(CareLevel)

# order of the components everywhere (TransitionProbs, the last axis of transition tables, sampled transition codes)
STAY, WORSENING, RECOVERY, DEATH = 0, 1, 2, 3
# order of the outcome proportions Q in the tables
Q_RECOVERY, Q_WORSENING, Q_DEATH = 0, 1, 2


@dataclass(frozen=True)
class TransitionProbs:
    p_stay: float
    p_worsening: float
    p_recovery: float
    p_death: float

    def __post_init__(self):
        values = self.as_array()
        if np.any(values < -1e-12) or np.any(values > 1 + 1e-12):
            raise ValueError(f'transition probabilities must lie in [0, 1], got {self}')
        if abs(values.sum() - 1) > 1e-9:
            raise ValueError(f'transition probabilities must sum to 1, got {values.sum()} ({self})')

    def as_array(self) -> np.ndarray:
        return np.array([self.p_stay, self.p_worsening, self.p_recovery, self.p_death], dtype=float)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> TransitionProbs:
        return cls(*[float(i) for i in values])


ABSORBING_PROBS = TransitionProbs(1.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True, eq=False)
class DiseaseSpec:
    """
    One disease: SIR rates plus, for every admissible (health state, care level) pair, the mean sojourn T in days and
    the eventual outcome proportions (recovery, worsening, death) as fractions summing to 1.

    sojourn has shape (N_STATES, N_CARE), outcomes (N_STATES, N_CARE, 3). Inadmissible cells (care above what the state
    requires, absorbing states) are NaN. Use from_tables to build one from the per-100-patients config tables.
    """
    id: str
    sir: SirParams
    sojourn: np.ndarray
    outcomes: np.ndarray
    entry_state: HealthState = HealthState.very_mild

    def __post_init__(self):
        assert self.sojourn.shape == (N_STATES, N_CARE), f'bad sojourn table shape {self.sojourn.shape}'
        assert self.outcomes.shape == (N_STATES, N_CARE, 3), f'bad outcome table shape {self.outcomes.shape}'
        for h in ILL_STATES:
            for c in CareLevel:
                if not is_admissible(h, c):
                    continue
                T = self.sojourn[h, c]
                if not np.isfinite(T):
                    raise ValueError(f'{self.id}: missing sojourn for ({h.name}, {c.name})')
                if T < 1:
                    raise ValueError(f'{self.id}: sojourn T[{h.name}, {c.name}] = {T} < 1 would make p_stay negative')
                q = self.outcomes[h, c]
                if np.any(q < 0) or abs(q.sum() - 1) > 1e-9:
                    raise ValueError(f'{self.id}: outcome proportions for ({h.name}, {c.name}) must be >= 0 and sum '
                                     f'to 1, got {q}')
            if h == HealthState.critical and np.any(self.outcomes[h, :, Q_WORSENING][np.isfinite(
                    self.outcomes[h, :, Q_WORSENING])] != 0):
                raise ValueError(f'{self.id}: critical patients cannot worsen any further. Fold Q_worsening into '
                                 f'Q_death (from_tables does that for you)')

    @classmethod
    def from_tables(cls, disease_id: str, sir: SirParams,
                    sojourn: Mapping[str, Mapping[str, float]],
                    outcomes: Mapping[str, Mapping[str, Sequence[float]]],
                    per_100: bool = True,
                    entry_state: Union[str, HealthState] = HealthState.very_mild) -> DiseaseSpec:
        """
        sojourn: {state: {care: T}}. outcomes: {state: {care: [recovery, worsening, death]}}, per 100 patients if
        per_100 (the unit health records use), else as fractions. Rows are normalized to sum to 1 and worsening at
        critical is folded into death.
        """
        T = np.full((N_STATES, N_CARE), np.nan)
        Q = np.full((N_STATES, N_CARE, 3), np.nan)
        for s, row in sojourn.items():
            h = parse_health_state(s)
            for c, value in row.items():
                T[h, parse_care_level(c)] = float(value)
        for s, row in outcomes.items():
            h = parse_health_state(s)
            for c, value in row.items():
                c = parse_care_level(c)
                q = np.array(value, dtype=float)
                if q.shape != (3,):
                    raise ValueError(f'{disease_id}: outcomes for ({h.name}, {c.name}) need exactly 3 values '
                                     f'[recovery, worsening, death], got {value}')
                if per_100:
                    q = q / 100.
                if h == HealthState.critical:
                    q[Q_DEATH] += q[Q_WORSENING]
                    q[Q_WORSENING] = 0
                if q.sum() <= 0:
                    raise ValueError(f'{disease_id}: outcomes for ({h.name}, {c.name}) cannot be normalized: {value}')
                Q[h, c] = q / q.sum()
        return cls(disease_id, sir, T, Q, parse_health_state(entry_state))

    @cached_property
    def transition_table(self) -> np.ndarray:
        """
        Nominal transition probabilities (stay, worsening, recovery, death) for every (state, care) pair. Shape
        (N_STATES, N_CARE, 4). Absorbing states always stay. Inadmissible ill cells are NaN
        """
        table = np.full((N_STATES, N_CARE, 4), np.nan)
        table[HealthState.healthy] = ABSORBING_PROBS.as_array()
        table[HealthState.death] = ABSORBING_PROBS.as_array()
        for h in ILL_STATES:
            for c in CareLevel:
                if is_admissible(h, c):
                    table[h, c] = derive_transition_probs(self, h, c).as_array()
        return table

    @cached_property
    def degraded_table(self) -> np.ndarray:
        """Same as transition_table but every care level c looks up the probabilities of the level below c"""
        lower = [int(lower_care(c)) for c in CareLevel]
        return self.transition_table[:, lower, :]

    def __repr__(self):
        return f'DiseaseSpec(id={self.id!r}, sir={self.sir})'


def derive_transition_probs(spec: DiseaseSpec, h: Union[HealthState, int], c: Union[CareLevel, int]) -> TransitionProbs:
    """
    Geometric sojourn with mean T: P(stay) = 1 - 1/T, P(x) = Q_x / T for x in worsening, recovery, death
    """
    h = HealthState(h)
    c = CareLevel(c)
    if h.is_absorbing:
        return ABSORBING_PROBS
    if not is_admissible(h, c):
        raise ValueError(f'{spec.id}: care {c.name} exceeds what {h.name} requires, there are no parameters for it')
    T = float(spec.sojourn[h, c])
    if not T >= 1:
        raise ValueError(f'{spec.id}: T[{h.name}, {c.name}] = {T}. T must be >= 1')
    q_rec, q_wor, q_death = spec.outcomes[h, c]
    p_stay = 1 - 1 / T
    return TransitionProbs(p_stay, q_wor / T, q_rec / T, q_death / T)


def apply_quality(nominal: TransitionProbs, degraded: TransitionProbs, q: float) -> TransitionProbs:
    """
    p(q) = p_degraded + q^2 * (p_nominal - p_degraded), component wise, then renormalized. q = 1 gives nominal and q = 0
    gives degraded, exactly
    """
    if not 0 <= q <= 1:
        raise ValueError(f'attention quality must be in [0, 1], got {q}')
    if q == 1:
        return nominal
    if q == 0:
        return degraded
    mixed = interpolate_quality(nominal.as_array(), degraded.as_array(), np.array(q))
    return TransitionProbs.from_array(mixed)


def interpolate_quality(nominal: np.ndarray, degraded: np.ndarray, q: np.ndarray) -> np.ndarray:
    """
    Vectorized apply_quality. nominal/degraded have shape (..., 4), q broadcasts against (...). No range checks here,
    the engine clips q before it gets here
    """
    w = np.asarray(q, dtype=float)[..., None] ** QUALITY_EXPONENT
    mixed = degraded + w * (nominal - degraded)
    mixed = np.clip(mixed, 0, None)
    mixed /= mixed.sum(axis=-1, keepdims=True)
    # keep the endpoints exact so q=1 is bit identical to the nominal table
    mixed = np.where(w == 1, nominal, mixed)
    mixed = np.where(w == 0, degraded, mixed)
    return mixed
