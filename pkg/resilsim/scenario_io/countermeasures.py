import math
from dataclasses import replace
from typing import Dict, List, Optional, Tuple

from resilsim.scenario_io.scenario import ScenarioConfig, Countermeasures, HospitalConfig

BASELINE = 'baseline'

# label -> changes to the countermeasures block. Bed multipliers multiply, recovery_days keeps the shorter one
COUNTERMEASURES: Dict[str, dict] = {
    BASELINE: {},
    'lowBeds': {'bed_multiplier': 1.5},
    'highBeds': {'bed_multiplier': 2.0},
    'lowSecurity': {'recovery_days': 15},
    'highSecurity': {'recovery_days': 1},
    'mHealth': {'mhealth_enabled': True},
    'referral': {'referral_enabled': True},
}
# these are the levels whose capacity a bed countermeasure scales
BED_LEVELS = ('generalBed', 'ICU')


class UnknownCountermeasureError(ValueError):
    pass


def parse_measure_label(measure: str) -> List[str]:
    """'lowBeds+referral' -> ['lowBeds', 'referral']. Raises UnknownCountermeasureError on unknown labels"""
    parts = [m.strip() for m in measure.split('+')]
    for m in parts:
        if m not in COUNTERMEASURES:
            raise UnknownCountermeasureError(f'Unknown countermeasure {m!r}. Known: {", ".join(COUNTERMEASURES)} '
                                             f'(combine with +)')
    return parts


def apply_countermeasure(base: ScenarioConfig, measure: str) -> ScenarioConfig:
    """
    Returns a copy of base whose countermeasures block has the measure switched on. Nothing else in the scenario is
    touched: build_world reads the block (see effective_hospitals, effective_outage_caps). Combined labels
    ('a+b') apply left to right
    """
    cm = base.countermeasures
    for m in parse_measure_label(measure):
        if m == BASELINE:
            continue
        changes = COUNTERMEASURES[m]
        cm = replace(cm,
                     bed_multiplier=cm.bed_multiplier * changes.get('bed_multiplier', 1.),
                     recovery_days=_shorter(cm.recovery_days, changes.get('recovery_days')),
                     mhealth_enabled=changes.get('mhealth_enabled', cm.mhealth_enabled),
                     referral_enabled=changes.get('referral_enabled', cm.referral_enabled),
                     applied=cm.applied + (m,))
    if cm == base.countermeasures:
        return base
    return replace(base, countermeasures=cm)


def _shorter(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _targets(config: ScenarioConfig) -> Tuple[str, ...]:
    cm: Countermeasures = config.countermeasures
    return cm.targets if cm.targets else tuple(h.id for h in config.hospitals)


def effective_hospitals(config: ScenarioConfig) -> Tuple[HospitalConfig, ...]:
    """Hospitals as the simulation sees them, countermeasures applied. Scaled bed capacities are rounded up"""
    cm = config.countermeasures
    targets = set(_targets(config))
    out = []
    for h in config.hospitals:
        if h.id in targets:
            capacities = dict(h.capacities)
            if cm.bed_multiplier != 1:
                for level in BED_LEVELS:
                    if capacities.get(level) is not None:
                        # 1e-9 so that 278 * 1.5 = 417.00000000000006 does not become 418
                        capacities[level] = int(math.ceil(capacities[level] * cm.bed_multiplier - 1e-9))
            h = replace(h, capacities=capacities,
                        mhealth_enabled=h.mhealth_enabled if cm.mhealth_enabled is None else cm.mhealth_enabled,
                        referral_enabled=h.referral_enabled if cm.referral_enabled is None else cm.referral_enabled)
        out.append(h)
    return tuple(out)


def effective_outage_caps(config: ScenarioConfig) -> Dict[str, int]:
    """IT node id -> longest ransomware outage allowed by the cyber-defense countermeasures"""
    recovery_days = config.countermeasures.recovery_days
    if recovery_days is None:
        return {}
    targets = set(_targets(config))
    return {h.it_node: recovery_days for h in config.hospitals if h.id in targets and h.it_node is not None}
