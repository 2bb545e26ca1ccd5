from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

import networkx as nx
from batchgenerators.utilities.file_and_folder_operations import load_json, save_json, isfile

from resilsim.configuration import DEFAULT_QUALITY_K, DEFAULT_QUALITY_FLOOR, DEFAULT_UTILIZATION_WINDOW, \
    DEFAULT_VULNERABILITY_CLASSES, DEFAULT_P_SPREAD, DEFAULT_DDOS_ABSORB_FACTOR, DEFAULT_DEGRADED_QUALITY, \
    SCHEMA_VERSION
from resilsim.cyber.attacks import AttackEvent, AttackKind, BROADCAST
from resilsim.disease_progression.disease import DiseaseSpec
from resilsim.disease_progression.health_states import HealthState, CareLevel, ILL_STATES, SERVICE_LEVELS, \
    required_care
from resilsim.epidemics.sir import SirParams
from resilsim.scenario_io.errors import Problem, ScenarioValidationError
from resilsim.utilities.json_export import recursive_fix_for_json_export

ID_PATTERN = re.compile(r'^[A-Za-z0-9_\-]+$')
# outcome rows are given per 100 patients and may be off by rounding
OUTCOME_TOLERANCE = 0.5

_REQUIRED = object()


@dataclass(frozen=True)
class QualityLaw:
    k: float = DEFAULT_QUALITY_K
    q_floor: float = DEFAULT_QUALITY_FLOOR
    utilization_window: int = DEFAULT_UTILIZATION_WINDOW
    vulnerability_classes: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_VULNERABILITY_CLASSES))
    p_spread: float = DEFAULT_P_SPREAD
    ddos_absorb_factor: float = DEFAULT_DDOS_ABSORB_FACTOR


@dataclass(frozen=True)
class MonteCarlo:
    n_runs: int = 1
    master_seed: int = 0


@dataclass(frozen=True)
class DiseaseConfig:
    """Tables exactly as configured (outcomes per 100 patients). to_spec normalizes them"""
    id: str
    beta: float
    gamma: float
    sojourn: Dict[str, Dict[str, float]]
    outcomes: Dict[str, Dict[str, Tuple[float, float, float]]]
    entry_state: str = HealthState.very_mild.name

    def to_spec(self) -> DiseaseSpec:
        return DiseaseSpec.from_tables(self.id, SirParams(self.beta, self.gamma), self.sojourn,
                                       {s: {c: list(v) for c, v in row.items()} for s, row in self.outcomes.items()},
                                       per_100=True, entry_state=self.entry_state)


@dataclass(frozen=True)
class EpidemicConfig:
    disease: str
    initial_infected: int
    start_day: int = 0


@dataclass(frozen=True)
class MciConfig:
    start_day: int
    casualty_count: int
    severity_distribution: Dict[str, float]
    disease: str


@dataclass(frozen=True)
class PopulationConfig:
    id: str
    size: int
    baseline_incidence: float = 0.
    baseline_disease: Optional[str] = None
    baseline_entry: Dict[str, float] = field(default_factory=lambda: {HealthState.moderate.name: 1.})
    routing: Dict[str, float] = field(default_factory=dict)
    epidemics: Tuple[EpidemicConfig, ...] = ()
    mci_events: Tuple[MciConfig, ...] = ()


@dataclass(frozen=True)
class HospitalConfig:
    id: str
    # level name -> capacity, None = unbounded
    capacities: Dict[str, Optional[int]]
    mhealth_enabled: bool = False
    it_node: Optional[str] = None
    referral_partners: Tuple[str, ...] = ()
    referral_enabled: bool = False


@dataclass(frozen=True)
class ItNodeConfig:
    id: str
    service_capacity: float
    vulnerability: float
    recovery_capacity: float = 1.
    depends_on: Tuple[str, ...] = ()
    recovery_ramp_days: int = 0
    degraded_quality: float = DEFAULT_DEGRADED_QUALITY
    # set when the vulnerability was given as a class name, so serialization can write the name back
    vulnerability_class: Optional[str] = None


@dataclass(frozen=True)
class AttackerConfig:
    id: str
    threat_level: float = 1.
    target: str = BROADCAST
    campaign: Tuple[AttackEvent, ...] = ()


@dataclass(frozen=True)
class Countermeasures:
    """
    What the active countermeasures change. targets are hospital ids (empty = every hospital). None means 'leave the
    scenario's own value alone'
    """
    targets: Tuple[str, ...] = ()
    bed_multiplier: float = 1.
    recovery_days: Optional[int] = None
    mhealth_enabled: Optional[bool] = None
    referral_enabled: Optional[bool] = None
    applied: Tuple[str, ...] = ()


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    horizon: int
    monte_carlo: MonteCarlo = field(default_factory=MonteCarlo)
    quality_law: QualityLaw = field(default_factory=QualityLaw)
    diseases: Tuple[DiseaseConfig, ...] = ()
    populations: Tuple[PopulationConfig, ...] = ()
    hospitals: Tuple[HospitalConfig, ...] = ()
    it_nodes: Tuple[ItNodeConfig, ...] = ()
    attackers: Tuple[AttackerConfig, ...] = ()
    countermeasures: Countermeasures = field(default_factory=Countermeasures)
    # population id -> {population id: weight}, rows normalized. None = no mixing between populations
    contact_matrix: Optional[Dict[str, Dict[str, float]]] = None
    schema_version: int = SCHEMA_VERSION

    def disease(self, disease_id: str) -> DiseaseConfig:
        for d in self.diseases:
            if d.id == disease_id:
                return d
        raise KeyError(disease_id)

    def hospital(self, hospital_id: str) -> HospitalConfig:
        for h in self.hospitals:
            if h.id == hospital_id:
                return h
        raise KeyError(hospital_id)

    def population(self, population_id: str) -> PopulationConfig:
        for p in self.populations:
            if p.id == population_id:
                return p
        raise KeyError(population_id)


class _Reader(object):
    """Reads fields out of the raw document and remembers every problem instead of stopping at the first one"""

    def __init__(self):
        self.problems: List[Problem] = []

    def problem(self, path: str, kind: str, message: str):
        self.problems.append(Problem(path, kind, message))

    def mapping(self, d: Any, path: str) -> Optional[dict]:
        if not isinstance(d, dict):
            self.problem(path, 'schema', f'expected an object, got {type(d).__name__}')
            return None
        return d

    def listing(self, d: dict, key: str, path: str) -> list:
        value = d.get(key, [])
        if value is None:
            return []
        if not isinstance(value, list):
            self.problem(f'{path}.{key}', 'schema', f'expected a list, got {type(value).__name__}')
            return []
        return value

    def unknown_keys(self, d: dict, allowed: Tuple[str, ...], path: str):
        for k in d.keys():
            if k not in allowed:
                self.problem(f'{path}.{k}', 'schema', f'unknown key. Allowed here: {", ".join(allowed)}')

    def number(self, d: dict, key: str, path: str, default: Any = _REQUIRED, minimum: float = None,
               maximum: float = None, integer: bool = False, exclusive_minimum: bool = False,
               kind: str = 'schema') -> Any:
        p = f'{path}.{key}'
        if key not in d or (d[key] is None and default is not _REQUIRED):
            if default is _REQUIRED:
                self.problem(p, 'schema', 'missing required value')
            return None if default is _REQUIRED else default
        value = d[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.problem(p, 'schema', f'expected a number, got {value!r}')
            return None
        if integer and value != int(value):
            self.problem(p, 'schema', f'expected an integer, got {value!r}')
            return None
        if minimum is not None and (value < minimum or (exclusive_minimum and value == minimum)):
            self.problem(p, kind, f'must be {">" if exclusive_minimum else ">="} {minimum}, got {value}')
            return None
        if maximum is not None and value > maximum:
            self.problem(p, kind, f'must be <= {maximum}, got {value}')
            return None
        return int(value) if integer else value

    def boolean(self, d: dict, key: str, path: str, default: Optional[bool] = False, nullable: bool = False):
        value = d.get(key, default)
        if value is None and nullable:
            return None
        if not isinstance(value, bool):
            self.problem(f'{path}.{key}', 'schema', f'expected true or false, got {value!r}')
            return default
        return value

    def identifier(self, value: Any, path: str) -> Optional[str]:
        if not isinstance(value, str) or not ID_PATTERN.match(value):
            self.problem(path, 'schema', f'ids must match {ID_PATTERN.pattern}, got {value!r}')
            return None
        return value

    def reference(self, value: Any, path: str, known: Dict[str, Any], what: str) -> Optional[str]:
        if value not in known:
            self.problem(path, 'unknown_id', f'unknown {what} {value!r}. Known: {", ".join(sorted(known)) or "none"}')
            return None
        return value

    def distribution(self, d: Any, path: str, valid: Dict[str, Any], what: str) -> Optional[Dict[str, float]]:
        """{key: weight} with keys from valid. Weights must be >= 0 with a positive sum, they are normalized"""
        if self.mapping(d, path) is None:
            return None
        out = {}
        ok = True
        for k, v in d.items():
            if k not in valid:
                self.problem(f'{path}.{k}', 'unknown_id', f'unknown {what} {k!r}')
                ok = False
                continue
            if isinstance(v, bool) or not isinstance(v, (int, float)) or v < 0:
                self.problem(f'{path}.{k}', 'non_normalizable', f'weights must be numbers >= 0, got {v!r}')
                ok = False
                continue
            out[k] = float(v)
        if not ok:
            return None
        total = sum(out.values())
        if total <= 0:
            self.problem(path, 'non_normalizable', 'weights sum to 0, cannot normalize')
            return None
        if abs(total - 1) > 1e-12:
            out = {k: v / total for k, v in out.items()}
        return out


def _item_path(section: str, item: Any, index: int) -> str:
    if isinstance(item, dict) and isinstance(item.get('id'), str):
        return f'{section}[{item["id"]}]'
    return f'{section}[{index}]'


def _collect_ids(r: _Reader, items: list, section: str) -> Dict[str, dict]:
    found = {}
    for i, item in enumerate(items):
        path = _item_path(section, item, i)
        if r.mapping(item, path) is None:
            continue
        item_id = r.identifier(item.get('id'), f'{path}.id')
        if item_id is None:
            continue
        if item_id in found:
            r.problem(path, 'schema', f'duplicate id {item_id!r}')
            continue
        found[item_id] = item
    return found


def _parse_state_name(r: _Reader, value: Any, path: str, ill_only: bool = True) -> Optional[str]:
    names = [h.name for h in (ILL_STATES if ill_only else HealthState)]
    if value not in names:
        r.problem(path, 'schema', f'unknown health state {value!r}. Use one of {", ".join(names)}')
        return None
    return value


def _parse_disease(r: _Reader, d: dict, path: str) -> Optional[DiseaseConfig]:
    r.unknown_keys(d, ('id', 'sir', 'entry_state', 'sojourn', 'outcomes'), path)
    sir = r.mapping(d.get('sir'), f'{path}.sir')
    beta = gamma = None
    if sir is not None:
        beta = r.number(sir, 'beta', f'{path}.sir', minimum=0)
        gamma = r.number(sir, 'gamma', f'{path}.sir', minimum=0)
    entry_state = _parse_state_name(r, d.get('entry_state', HealthState.very_mild.name), f'{path}.entry_state')

    sojourn = {}
    outcomes = {}
    tables_ok = True
    for table_name, target in (('sojourn', sojourn), ('outcomes', outcomes)):
        table = r.mapping(d.get(table_name), f'{path}.{table_name}')
        if table is None:
            tables_ok = False
            continue
        for state_name, row in table.items():
            row_path = f'{path}.{table_name}.{state_name}'
            if _parse_state_name(r, state_name, row_path) is None or r.mapping(row, row_path) is None:
                tables_ok = False
                continue
            h = HealthState[state_name]
            target[state_name] = {}
            for care_name, value in row.items():
                cell = f'{row_path}.{care_name}'
                if care_name not in CareLevel.__members__:
                    r.problem(cell, 'schema', f'unknown care level {care_name!r}')
                    tables_ok = False
                    continue
                c = CareLevel[care_name]
                if c > required_care(h):
                    r.problem(cell, 'schema', f'{h.name} only requires {required_care(h).name}, there is no '
                                              f'{c.name} parameter for it')
                    tables_ok = False
                    continue
                if table_name == 'sojourn':
                    T = r.number(row, care_name, row_path, kind='sojourn_below_one', minimum=1)
                    if T is None:
                        tables_ok = False
                        continue
                    target[state_name][care_name] = float(T)
                else:
                    if not isinstance(value, list) or len(value) != 3 or \
                            any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value):
                        r.problem(cell, 'schema', f'expected [recovery, worsening, death] per 100 patients, got '
                                                  f'{value!r}')
                        tables_ok = False
                        continue
                    if any(v < 0 for v in value):
                        r.problem(cell, 'non_normalizable', f'outcome proportions must be >= 0, got {value}')
                        tables_ok = False
                        continue
                    if abs(sum(value) - 100) > OUTCOME_TOLERANCE:
                        r.problem(cell, 'outcomes_not_100', f'recovery + worsening + death must be 100 '
                                                            f'(+-{OUTCOME_TOLERANCE}), got {sum(value)}')
                        tables_ok = False
                        continue
                    target[state_name][care_name] = tuple(float(v) for v in value)
    if tables_ok:
        for h in ILL_STATES:
            for c in CareLevel:
                if c > required_care(h):
                    continue
                for table_name, table in (('sojourn', sojourn), ('outcomes', outcomes)):
                    if c.name not in table.get(h.name, {}):
                        r.problem(f'{path}.{table_name}.{h.name}.{c.name}', 'schema', 'missing value')
                        tables_ok = False
    if not tables_ok or beta is None or gamma is None or entry_state is None:
        return None
    return DiseaseConfig(d['id'], float(beta), float(gamma), sojourn, outcomes, entry_state)


def _parse_population(r: _Reader, d: dict, path: str, horizon: Optional[int], diseases: Dict[str, dict],
                      hospitals: Dict[str, dict]) -> Optional[PopulationConfig]:
    r.unknown_keys(d, ('id', 'size', 'baseline_incidence', 'baseline_disease', 'baseline_entry', 'routing',
                       'epidemics', 'mci_events'), path)
    n_problems = len(r.problems)
    size = r.number(d, 'size', path, minimum=0, integer=True)
    incidence = r.number(d, 'baseline_incidence', path, default=0., minimum=0)
    baseline_disease = d.get('baseline_disease')
    if baseline_disease is not None:
        r.reference(baseline_disease, f'{path}.baseline_disease', diseases, 'disease')
    elif incidence:
        r.problem(f'{path}.baseline_disease', 'schema', 'baseline_incidence > 0 needs a baseline_disease')
    ill = {h.name: h for h in ILL_STATES}
    entry = r.distribution(d.get('baseline_entry', {HealthState.moderate.name: 1.}), f'{path}.baseline_entry', ill,
                           'health state')
    routing = {}
    if d.get('routing'):
        routing = r.distribution(d['routing'], f'{path}.routing', hospitals, 'hospital')

    epidemics = []
    seen = set()
    for i, e in enumerate(r.listing(d, 'epidemics', path)):
        ep = f'{path}.epidemics[{i}]'
        if r.mapping(e, ep) is None:
            continue
        r.unknown_keys(e, ('disease', 'initial_infected', 'start_day'), ep)
        disease = r.reference(e.get('disease'), f'{ep}.disease', diseases, 'disease')
        if disease in seen:
            r.problem(f'{ep}.disease', 'schema', f'disease {disease} already has an epidemic in this population')
        seen.add(disease)
        initial = r.number(e, 'initial_infected', ep, minimum=0, maximum=size, integer=True)
        start = r.number(e, 'start_day', ep, default=0, minimum=0, maximum=horizon, integer=True)
        if disease is not None and initial is not None and start is not None:
            epidemics.append(EpidemicConfig(disease, initial, start))

    mci_events = []
    for i, e in enumerate(r.listing(d, 'mci_events', path)):
        ep = f'{path}.mci_events[{i}]'
        if r.mapping(e, ep) is None:
            continue
        r.unknown_keys(e, ('start_day', 'casualty_count', 'severity_distribution', 'disease'), ep)
        start = r.number(e, 'start_day', ep, minimum=1, maximum=horizon, integer=True)
        count = r.number(e, 'casualty_count', ep, minimum=0, integer=True)
        dist = r.distribution(e.get('severity_distribution'), f'{ep}.severity_distribution', ill, 'health state')
        disease = r.reference(e.get('disease'), f'{ep}.disease', diseases, 'disease')
        if None not in (start, count, dist, disease):
            mci_events.append(MciConfig(start, count, dist, disease))
    if len(r.problems) > n_problems:
        return None
    return PopulationConfig(d['id'], size, float(incidence), baseline_disease, entry, routing, tuple(epidemics),
                            tuple(mci_events))


def _parse_hospital(r: _Reader, d: dict, path: str, hospitals: Dict[str, dict], nodes: Dict[str, dict]
                    ) -> Optional[HospitalConfig]:
    r.unknown_keys(d, ('id', 'capacities', 'mhealth_enabled', 'it_node', 'referral_partners', 'referral_enabled'),
                   path)
    n_problems = len(r.problems)
    capacities = {level.name: None for level in SERVICE_LEVELS}
    raw = r.mapping(d.get('capacities', {}), f'{path}.capacities') or {}
    for k, v in raw.items():
        if k not in [level.name for level in SERVICE_LEVELS]:
            r.problem(f'{path}.capacities.{k}', 'schema', f'unknown care service {k!r}')
        elif v is not None:
            capacities[k] = r.number(raw, k, f'{path}.capacities', minimum=0, integer=True)
    it_node = d.get('it_node')
    if it_node is not None:
        r.reference(it_node, f'{path}.it_node', nodes, 'IT node')
    elif len(nodes):
        r.problem(f'{path}.it_node', 'schema', 'every hospital must be coupled to an IT node when the scenario has any')
    partners = []
    for i, p in enumerate(r.listing(d, 'referral_partners', path)):
        pp = f'{path}.referral_partners[{i}]'
        if p == d.get('id'):
            r.problem(pp, 'schema', 'a hospital cannot refer to itself')
        elif r.reference(p, pp, hospitals, 'hospital') is not None:
            partners.append(p)
    mhealth = r.boolean(d, 'mhealth_enabled', path)
    referral = r.boolean(d, 'referral_enabled', path)
    if len(r.problems) > n_problems:
        return None
    return HospitalConfig(d['id'], capacities, mhealth, it_node, tuple(partners), referral)


def _parse_it_node(r: _Reader, d: dict, path: str, nodes: Dict[str, dict], classes: Dict[str, float]
                   ) -> Optional[ItNodeConfig]:
    r.unknown_keys(d, ('id', 'service_capacity', 'vulnerability', 'recovery_capacity', 'depends_on',
                       'recovery_ramp_days', 'degraded_quality'), path)
    n_problems = len(r.problems)
    capacity = r.number(d, 'service_capacity', path, minimum=0)
    vulnerability_class = None
    vulnerability = d.get('vulnerability', 'medium')
    if isinstance(vulnerability, str):
        if vulnerability not in classes:
            r.problem(f'{path}.vulnerability', 'schema', f'unknown vulnerability class {vulnerability!r}. Known: '
                                                         f'{", ".join(sorted(classes))}')
        else:
            vulnerability_class = vulnerability
            vulnerability = classes[vulnerability]
    else:
        vulnerability = r.number(d, 'vulnerability', path, minimum=0, maximum=1)
    recovery = r.number(d, 'recovery_capacity', path, default=1., minimum=0, exclusive_minimum=True)
    ramp = r.number(d, 'recovery_ramp_days', path, default=0, minimum=0, integer=True)
    degraded = r.number(d, 'degraded_quality', path, default=DEFAULT_DEGRADED_QUALITY, minimum=0, maximum=1,
                        exclusive_minimum=True)
    if degraded == 1:
        r.problem(f'{path}.degraded_quality', 'schema', 'must be < 1')
    depends_on = []
    for i, p in enumerate(r.listing(d, 'depends_on', path)):
        if r.reference(p, f'{path}.depends_on[{i}]', nodes, 'IT node') is not None:
            depends_on.append(p)
    if len(r.problems) > n_problems:
        return None
    return ItNodeConfig(d['id'], float(capacity), float(vulnerability), float(recovery), tuple(depends_on), ramp,
                        float(degraded), vulnerability_class)


_EVENT_KEYS = ('kind', 'start_day', 'duration', 'request_load', 'base_outage', 'detection_delay',
               'launch_probability', 'payload', 'payload_delay', 'payload_target')


def _parse_event(r: _Reader, e: Any, path: str, horizon: Optional[int], nodes: Dict[str, dict],
                 is_payload: bool = False) -> Optional[AttackEvent]:
    if r.mapping(e, path) is None:
        return None
    r.unknown_keys(e, _EVENT_KEYS, path)
    n_problems = len(r.problems)
    kinds = [k.value for k in AttackKind]
    kind = e.get('kind')
    if kind not in kinds:
        r.problem(f'{path}.kind', 'schema', f'unknown attack kind {kind!r}. Use one of {", ".join(kinds)}')
        return None
    start = 0 if is_payload else r.number(e, 'start_day', path, minimum=1, maximum=horizon, integer=True)
    values = dict(
        duration=r.number(e, 'duration', path, default=1, minimum=1, integer=True),
        request_load=r.number(e, 'request_load', path, default=0., minimum=0),
        base_outage=r.number(e, 'base_outage', path, default=0., minimum=0),
        detection_delay=r.number(e, 'detection_delay', path, default=0., minimum=0),
        launch_probability=r.number(e, 'launch_probability', path, default=1., minimum=0, maximum=1),
        payload_delay=r.number(e, 'payload_delay', path, default=0, minimum=0, integer=True),
    )
    if kind == AttackKind.ransomware.value and not values['base_outage']:
        r.problem(f'{path}.base_outage', 'schema', 'ransomware needs base_outage > 0')
    if kind == AttackKind.ddos.value and not values['request_load']:
        r.problem(f'{path}.request_load', 'schema', 'ddos needs request_load > 0')
    payload = None
    if e.get('payload') is not None:
        if kind != AttackKind.botnet.value:
            r.problem(f'{path}.payload', 'schema', 'only botnets carry payloads')
        else:
            payload = _parse_event(r, e['payload'], f'{path}.payload', horizon, nodes, is_payload=True)
            if payload is not None and payload.kind == AttackKind.botnet:
                r.problem(f'{path}.payload.kind', 'schema', 'a botnet payload must be ransomware or ddos')
    payload_target = e.get('payload_target')
    if payload_target is not None and payload_target != BROADCAST:
        r.reference(payload_target, f'{path}.payload_target', nodes, 'IT node')
    if len(r.problems) > n_problems:
        return None
    return AttackEvent(AttackKind(kind), start, payload=payload, payload_target=payload_target, **values)


def _parse_attacker(r: _Reader, d: dict, path: str, horizon: Optional[int], nodes: Dict[str, dict]
                    ) -> Optional[AttackerConfig]:
    r.unknown_keys(d, ('id', 'threat_level', 'target', 'campaign'), path)
    n_problems = len(r.problems)
    threat = r.number(d, 'threat_level', path, default=1., minimum=0)
    target = d.get('target', BROADCAST)
    if target != BROADCAST:
        r.reference(target, f'{path}.target', nodes, 'IT node')
    campaign = []
    for i, e in enumerate(r.listing(d, 'campaign', path)):
        event = _parse_event(r, e, f'{path}.campaign[{i}]', horizon, nodes)
        if event is not None:
            campaign.append(event)
    if len(r.problems) > n_problems:
        return None
    return AttackerConfig(d['id'], float(threat), target, tuple(campaign))


def _parse_countermeasures(r: _Reader, d: Any, hospitals: Dict[str, dict]) -> Countermeasures:
    path = 'countermeasures'
    if d is None:
        return Countermeasures()
    if r.mapping(d, path) is None:
        return Countermeasures()
    r.unknown_keys(d, ('targets', 'bed_multiplier', 'recovery_days', 'mhealth_enabled', 'referral_enabled',
                       'applied'), path)
    targets = []
    for i, t in enumerate(r.listing(d, 'targets', path)):
        if r.reference(t, f'{path}.targets[{i}]', hospitals, 'hospital') is not None:
            targets.append(t)
    applied = r.listing(d, 'applied', path)
    if not all(isinstance(a, str) for a in applied):
        r.problem(f'{path}.applied', 'schema', 'expected a list of countermeasure labels')
        applied = []
    return Countermeasures(
        targets=tuple(targets),
        bed_multiplier=float(r.number(d, 'bed_multiplier', path, default=1., minimum=0, exclusive_minimum=True) or 1),
        recovery_days=r.number(d, 'recovery_days', path, default=None, minimum=1, integer=True),
        mhealth_enabled=r.boolean(d, 'mhealth_enabled', path, default=None, nullable=True),
        referral_enabled=r.boolean(d, 'referral_enabled', path, default=None, nullable=True),
        applied=tuple(applied))


def _parse_quality_law(r: _Reader, d: Any) -> QualityLaw:
    path = 'quality_law'
    if d is None or r.mapping(d, path) is None:
        return QualityLaw()
    r.unknown_keys(d, ('k', 'q_floor', 'utilization_window', 'vulnerability_classes', 'p_spread',
                       'ddos_absorb_factor'), path)
    classes = dict(DEFAULT_VULNERABILITY_CLASSES)
    raw_classes = d.get('vulnerability_classes')
    if raw_classes is not None and r.mapping(raw_classes, f'{path}.vulnerability_classes') is not None:
        classes = {}
        for k in raw_classes:
            v = r.number(raw_classes, k, f'{path}.vulnerability_classes', minimum=0, maximum=1)
            if v is not None:
                classes[k] = float(v)
    defaults = QualityLaw()
    return QualityLaw(
        k=float(r.number(d, 'k', path, default=defaults.k, minimum=0) or 0),
        q_floor=float(_default(r.number(d, 'q_floor', path, default=defaults.q_floor, minimum=0, maximum=1),
                               defaults.q_floor)),
        utilization_window=_default(r.number(d, 'utilization_window', path, default=defaults.utilization_window,
                                             minimum=1, integer=True), defaults.utilization_window),
        vulnerability_classes=classes,
        p_spread=float(_default(r.number(d, 'p_spread', path, default=defaults.p_spread, minimum=0, maximum=1),
                                defaults.p_spread)),
        ddos_absorb_factor=float(_default(r.number(d, 'ddos_absorb_factor', path,
                                                   default=defaults.ddos_absorb_factor, minimum=1),
                                          defaults.ddos_absorb_factor)))


def _default(value, default):
    return default if value is None else value


def _check_it_graph(r: _Reader, nodes: Tuple[ItNodeConfig, ...]):
    graph = nx.DiGraph()
    graph.add_nodes_from(n.id for n in nodes)
    for n in nodes:
        graph.add_edges_from((p, n.id) for p in n.depends_on)
    if not nx.is_directed_acyclic_graph(graph):
        cycle = nx.find_cycle(graph)
        r.problem(f'it_nodes[{cycle[0][1]}].depends_on', 'cyclic_it_graph',
                  'dependency cycle ' + ' -> '.join(u for u, _ in cycle) + f' -> {cycle[0][0]}')


def _parse_contact_matrix(r: _Reader, d: Any, populations: Dict[str, dict]) -> Optional[Dict[str, Dict[str, float]]]:
    if d is None:
        return None
    if r.mapping(d, 'contact_matrix') is None:
        return None
    out = {}
    for k, row in d.items():
        p = f'contact_matrix.{k}'
        if r.reference(k, p, populations, 'population') is None:
            continue
        normalized = r.distribution(row, p, populations, 'population')
        if normalized is not None:
            out[k] = normalized
    return out


def parse_scenario(document: Union[str, bytes, dict]) -> ScenarioConfig:
    """
    Validates a scenario document (JSON text or the already decoded tree) and returns the ScenarioConfig with every
    default filled in and every probability vector normalized. Raises ScenarioValidationError listing all problems
    """
    r = _Reader()
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise ScenarioValidationError([Problem('$', 'schema', f'not valid JSON: {e}')])
    if r.mapping(document, '$') is None:
        raise ScenarioValidationError(r.problems)
    d = document
    r.unknown_keys(d, ('schema_version', 'name', 'horizon', 'monte_carlo', 'quality_law', 'diseases', 'populations',
                       'contact_matrix', 'hospitals', 'it_nodes', 'attackers', 'countermeasures'), '$')

    version = d.get('schema_version', SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        r.problem('schema_version', 'schema', f'this version of resilsim reads schema_version {SCHEMA_VERSION}, '
                                              f'got {version!r}')
    name = d.get('name', 'scenario')
    if not isinstance(name, str):
        r.problem('name', 'schema', f'expected a string, got {name!r}')
        name = 'scenario'
    horizon = d.get('horizon')
    if isinstance(horizon, bool) or not isinstance(horizon, int) or horizon <= 0:
        r.problem('horizon', 'bad_horizon', f'horizon must be an integer number of days > 0, got {horizon!r}')
        horizon = None

    mc = MonteCarlo()
    if d.get('monte_carlo') is not None and r.mapping(d['monte_carlo'], 'monte_carlo') is not None:
        r.unknown_keys(d['monte_carlo'], ('n_runs', 'master_seed'), 'monte_carlo')
        mc = MonteCarlo(_default(r.number(d['monte_carlo'], 'n_runs', 'monte_carlo', default=1, minimum=1,
                                          integer=True), 1),
                        _default(r.number(d['monte_carlo'], 'master_seed', 'monte_carlo', default=0, minimum=0,
                                          integer=True), 0))
    law = _parse_quality_law(r, d.get('quality_law'))

    raw_diseases = _collect_ids(r, r.listing(d, 'diseases', '$'), 'diseases')
    raw_populations = _collect_ids(r, r.listing(d, 'populations', '$'), 'populations')
    raw_hospitals = _collect_ids(r, r.listing(d, 'hospitals', '$'), 'hospitals')
    raw_nodes = _collect_ids(r, r.listing(d, 'it_nodes', '$'), 'it_nodes')
    raw_attackers = _collect_ids(r, r.listing(d, 'attackers', '$'), 'attackers')
    # populations, hospitals and IT nodes share the column namespace of the timeseries
    owner = {}
    for section, raw in (('populations', raw_populations), ('hospitals', raw_hospitals), ('it_nodes', raw_nodes)):
        for k in raw:
            if k in owner:
                r.problem(f'{section}[{k}].id', 'schema', f'id {k!r} is already used in {owner[k]}')
            else:
                owner[k] = section

    diseases = [_parse_disease(r, v, f'diseases[{k}]') for k, v in raw_diseases.items()]
    populations = [_parse_population(r, v, f'populations[{k}]', horizon, raw_diseases, raw_hospitals)
                   for k, v in raw_populations.items()]
    hospitals = [_parse_hospital(r, v, f'hospitals[{k}]', raw_hospitals, raw_nodes) for k, v in raw_hospitals.items()]
    nodes = [_parse_it_node(r, v, f'it_nodes[{k}]', raw_nodes, law.vulnerability_classes)
             for k, v in raw_nodes.items()]
    attackers = [_parse_attacker(r, v, f'attackers[{k}]', horizon, raw_nodes) for k, v in raw_attackers.items()]
    countermeasures = _parse_countermeasures(r, d.get('countermeasures'), raw_hospitals)
    contact = _parse_contact_matrix(r, d.get('contact_matrix'), raw_populations)
    if all(n is not None for n in nodes):
        _check_it_graph(r, tuple(nodes))

    if r.problems:
        raise ScenarioValidationError(r.problems)
    return ScenarioConfig(name=name, horizon=horizon, monte_carlo=mc, quality_law=law, diseases=tuple(diseases),
                          populations=tuple(populations), hospitals=tuple(hospitals), it_nodes=tuple(nodes),
                          attackers=tuple(attackers), countermeasures=countermeasures, contact_matrix=contact,
                          schema_version=version)


def load_scenario(path: str) -> ScenarioConfig:
    if not isfile(path):
        raise FileNotFoundError(f'scenario file {path} does not exist')
    return parse_scenario(load_json(path))


def _serialize_event(e: AttackEvent, is_payload: bool = False) -> dict:
    out = {'kind': e.kind.value}
    if not is_payload:
        out['start_day'] = e.start_day
    out.update(duration=e.duration, request_load=e.request_load, base_outage=e.base_outage,
               detection_delay=e.detection_delay, launch_probability=e.launch_probability,
               payload_delay=e.payload_delay)
    if e.payload is not None:
        out['payload'] = _serialize_event(e.payload, is_payload=True)
    if e.payload_target is not None:
        out['payload_target'] = e.payload_target
    return out


def serialize_scenario(config: ScenarioConfig) -> dict:
    """The JSON tree of a ScenarioConfig. parse_scenario(serialize_scenario(c)) == c"""
    doc = {
        'schema_version': config.schema_version,
        'name': config.name,
        'horizon': config.horizon,
        'monte_carlo': {'n_runs': config.monte_carlo.n_runs, 'master_seed': config.monte_carlo.master_seed},
        'quality_law': {
            'k': config.quality_law.k,
            'q_floor': config.quality_law.q_floor,
            'utilization_window': config.quality_law.utilization_window,
            'vulnerability_classes': dict(config.quality_law.vulnerability_classes),
            'p_spread': config.quality_law.p_spread,
            'ddos_absorb_factor': config.quality_law.ddos_absorb_factor,
        },
        'diseases': [{
            'id': d.id,
            'sir': {'beta': d.beta, 'gamma': d.gamma},
            'entry_state': d.entry_state,
            'sojourn': {s: dict(row) for s, row in d.sojourn.items()},
            'outcomes': {s: {c: list(v) for c, v in row.items()} for s, row in d.outcomes.items()},
        } for d in config.diseases],
        'populations': [{
            'id': p.id,
            'size': p.size,
            'baseline_incidence': p.baseline_incidence,
            'baseline_disease': p.baseline_disease,
            'baseline_entry': dict(p.baseline_entry),
            'routing': dict(p.routing),
            'epidemics': [{'disease': e.disease, 'initial_infected': e.initial_infected, 'start_day': e.start_day}
                          for e in p.epidemics],
            'mci_events': [{'start_day': m.start_day, 'casualty_count': m.casualty_count,
                            'severity_distribution': dict(m.severity_distribution), 'disease': m.disease}
                           for m in p.mci_events],
        } for p in config.populations],
        'hospitals': [{
            'id': h.id,
            'capacities': dict(h.capacities),
            'mhealth_enabled': h.mhealth_enabled,
            'it_node': h.it_node,
            'referral_partners': list(h.referral_partners),
            'referral_enabled': h.referral_enabled,
        } for h in config.hospitals],
        'it_nodes': [{
            'id': n.id,
            'service_capacity': n.service_capacity,
            'vulnerability': n.vulnerability_class if n.vulnerability_class is not None else n.vulnerability,
            'recovery_capacity': n.recovery_capacity,
            'depends_on': list(n.depends_on),
            'recovery_ramp_days': n.recovery_ramp_days,
            'degraded_quality': n.degraded_quality,
        } for n in config.it_nodes],
        'attackers': [{
            'id': a.id,
            'threat_level': a.threat_level,
            'target': a.target,
            'campaign': [_serialize_event(e) for e in a.campaign],
        } for a in config.attackers],
        'countermeasures': {
            'targets': list(config.countermeasures.targets),
            'bed_multiplier': config.countermeasures.bed_multiplier,
            'recovery_days': config.countermeasures.recovery_days,
            'mhealth_enabled': config.countermeasures.mhealth_enabled,
            'referral_enabled': config.countermeasures.referral_enabled,
            'applied': list(config.countermeasures.applied),
        },
    }
    if config.contact_matrix is not None:
        doc['contact_matrix'] = {k: dict(v) for k, v in config.contact_matrix.items()}
    recursive_fix_for_json_export(doc)
    return doc


def save_scenario(config: ScenarioConfig, path: str):
    save_json(serialize_scenario(config), path, sort_keys=False)
