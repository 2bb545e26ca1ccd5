import copy
import itertools
import re
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

from batchgenerators.utilities.file_and_folder_operations import load_json, isfile

from resilsim.scenario_io.errors import Problem, ScenarioValidationError

_TOKEN = re.compile(r'^(?P<key>[A-Za-z0-9_\-]+)(\[(?P<selector>[A-Za-z0-9_\-]+)\])?$')


@dataclass(frozen=True)
class OverlayLevel:
    """One level of a risk dimension, e.g. highContagious: {'diseases[flu].sir.beta': 0.5}"""
    name: str
    changes: Dict[str, Any]


@dataclass(frozen=True)
class RiskDimension:
    name: str
    levels: Tuple[OverlayLevel, ...]


def _step(node: Any, token: str, path: str) -> Tuple[Any, Any]:
    """Resolves one token. Returns (container, key) so the caller can read or write container[key]"""
    m = _TOKEN.match(token)
    if m is None:
        raise KeyError(f'{path}: cannot read {token!r}, expected name or name[id]')
    key, selector = m.group('key'), m.group('selector')
    if not isinstance(node, dict):
        raise KeyError(f'{path}: {key!r} is not inside an object')
    if selector is None:
        return node, key
    if key not in node or not isinstance(node[key], list):
        raise KeyError(f'{path}: {key!r} is not a list')
    items = node[key]
    for i, item in enumerate(items):
        if isinstance(item, dict) and item.get('id') == selector:
            return items, i
    if selector.isdigit() and int(selector) < len(items):
        return items, int(selector)
    raise KeyError(f'{path}: no item {selector!r} in {key}')


def set_path(document: dict, path: str, value: Any):
    """
    document[path] = value for selector paths like 'diseases[flu].sir.beta' or 'attackers[crew].campaign[0].base_outage'.
    List items are picked by id, or by position when no item has that id. Only the last key may be missing
    """
    tokens = path.split('.')
    node = document
    for i, token in enumerate(tokens):
        container, key = _step(node, token, path)
        if i == len(tokens) - 1:
            container[key] = copy.deepcopy(value)
            return
        if isinstance(container, dict) and key not in container:
            raise KeyError(f'{path}: {token!r} does not exist')
        node = container[key]


def apply_overlay(document: dict, changes: Dict[str, Any]) -> dict:
    """Copy of the scenario document with every change applied (in order). The input is not modified"""
    out = copy.deepcopy(document)
    problems = []
    for path, value in changes.items():
        try:
            set_path(out, path, value)
        except KeyError as e:
            problems.append(Problem(path, 'unknown_id', e.args[0]))
    if problems:
        raise ScenarioValidationError(problems)
    return out


def parse_risk_grid(document: Any) -> List[RiskDimension]:
    """
    {"dimensions": [{"name": "contagion", "levels": {"lowContagious": {...}, "highContagious": {...}}}, ...]}
    Level order is the order in the file
    """
    problems = []
    if not isinstance(document, dict) or not isinstance(document.get('dimensions'), list):
        raise ScenarioValidationError([Problem('$', 'schema', 'a risk grid is an object with a "dimensions" list')])
    dimensions = []
    seen = set()
    for i, d in enumerate(document['dimensions']):
        path = f'dimensions[{i}]'
        if not isinstance(d, dict) or not isinstance(d.get('levels'), dict) or not d['levels']:
            problems.append(Problem(path, 'schema', 'expected {"name": ..., "levels": {label: {path: value}}}'))
            continue
        levels = []
        for label, changes in d['levels'].items():
            if not _TOKEN.match(label) or '_' in label:
                problems.append(Problem(f'{path}.levels.{label}', 'schema',
                                        'level labels are ids without "_" (it joins labels of different dimensions)'))
                continue
            if label in seen:
                problems.append(Problem(f'{path}.levels.{label}', 'schema', f'duplicate level label {label!r}'))
                continue
            if not isinstance(changes, dict):
                problems.append(Problem(f'{path}.levels.{label}', 'schema', 'expected {selector path: value}'))
                continue
            seen.add(label)
            levels.append(OverlayLevel(label, dict(changes)))
        dimensions.append(RiskDimension(str(d.get('name', f'dimension{i}')), tuple(levels)))
    if problems:
        raise ScenarioValidationError(problems)
    return dimensions


def load_risk_grid(path: str) -> List[RiskDimension]:
    if not isfile(path):
        raise FileNotFoundError(f'risk grid file {path} does not exist')
    return parse_risk_grid(load_json(path))


def risk_scenarios(document: dict, dimensions: List[RiskDimension]) -> Dict[str, dict]:
    """
    Every combination of one level per dimension, labelled by joining the level names with '_'
    (lowAttack_highContagious_lowSeverity). Returns label -> scenario document, in cartesian product order.
    Without dimensions the grid is the scenario itself, labelled with its name
    """
    if not dimensions:
        return {document.get('name', 'scenario'): copy.deepcopy(document)}
    out = {}
    for combination in itertools.product(*[d.levels for d in dimensions]):
        changes = {}
        for level in combination:
            changes.update(level.changes)
        doc = apply_overlay(document, changes)
        label = '_'.join(level.name for level in combination)
        doc['name'] = label
        out[label] = doc
    return out
