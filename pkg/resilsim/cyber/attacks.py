from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from resilsim.configuration import DEFAULT_DDOS_ABSORB_FACTOR, DEFAULT_P_SPREAD
from resilsim.cyber.it_node import ItNode
from resilsim.engine.rng import RngStream, as_generator

BROADCAST = '*'


class AttackKind(str, Enum):
    botnet = 'botnet'
    ransomware = 'ransomware'
    ddos = 'ddos'


@dataclass(frozen=True)
class AttackEvent:
    """
    One scheduled attack. ransomware needs base_outage, ddos needs request_load and duration. A botnet infects its
    target; if it carries a payload, that payload is launched once, payload_delay days after start_day, against
    payload_target, by every infected node together (ddos loads add up over the bots)
    """
    kind: AttackKind
    start_day: int
    duration: int = 1
    request_load: float = 0.
    base_outage: float = 0.
    detection_delay: float = 0.
    launch_probability: float = 1.
    payload: Optional[AttackEvent] = None
    payload_delay: int = 0
    payload_target: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, 'kind', AttackKind(self.kind))
        for name in ('start_day', 'duration', 'request_load', 'base_outage', 'detection_delay', 'payload_delay'):
            if getattr(self, name) < 0:
                raise ValueError(f'{self.kind.value} attack: {name} must be >= 0, got {getattr(self, name)}')
        if not 0 <= self.launch_probability <= 1:
            raise ValueError(f'launch_probability must be in [0, 1], got {self.launch_probability}')
        if self.kind == AttackKind.ransomware and self.base_outage <= 0:
            raise ValueError('a ransomware attack needs base_outage > 0')
        if self.kind == AttackKind.ddos and (self.request_load <= 0 or self.duration < 1):
            raise ValueError('a ddos attack needs request_load > 0 and duration >= 1')
        if self.payload is not None:
            if self.kind != AttackKind.botnet:
                raise ValueError('only botnets carry payloads')
            if self.payload.kind == AttackKind.botnet:
                raise ValueError('a botnet payload must be ransomware or ddos')


@dataclass
class Attacker:
    id: str
    threat_level: float = 1.
    target: str = BROADCAST
    campaign: List[AttackEvent] = field(default_factory=list)

    def __post_init__(self):
        if self.threat_level < 0:
            raise ValueError(f'attacker {self.id}: threat_level must be >= 0, got {self.threat_level}')


def launch_attacks(attacker: Attacker, day: int, rng: Union[RngStream, np.random.Generator],
                   node_ids: Sequence[str] = (), bots: Sequence[str] = ()) -> List[Tuple[AttackEvent, str]]:
    """
    Events of this attacker that start today, resolved to (event, target id) pairs. Broadcast targets fan out to
    every node in node_ids (sorted). Events with launch_probability < 1 are kept with that probability.

    bots: ids of the nodes this attacker's botnets have infected. Payloads due today are launched from them
    """
    rng = as_generator(rng)
    launched = []
    for event in attacker.campaign:
        if event.start_day == day:
            if event.launch_probability < 1 and rng.random() >= event.launch_probability:
                continue
            targets = sorted(node_ids) if attacker.target == BROADCAST else [attacker.target]
            launched.extend((event, t) for t in targets)
        if event.payload is not None and event.start_day + event.payload_delay == day and len(bots) > 0:
            payload = event.payload
            if payload.kind == AttackKind.ddos:
                payload = AttackEvent(AttackKind.ddos, day, duration=payload.duration,
                                      request_load=payload.request_load * len(bots),
                                      detection_delay=payload.detection_delay)
            target = event.payload_target or attacker.target
            targets = sorted(node_ids) if target == BROADCAST else [target]
            launched.extend((payload, t) for t in targets)
    return launched


def success_probability(node: ItNode, threat: float) -> float:
    return float(min(1., max(0., node.vulnerability * threat)))


def ransomware_outage(node: ItNode, event: AttackEvent) -> int:
    """ceil(detection_delay + base_outage / recovery_capacity), at least one day, capped by outage_cap_days"""
    days = max(int(math.ceil(event.detection_delay + event.base_outage / node.recovery_capacity - 1e-9)), 1)
    if node.outage_cap_days is not None:
        days = min(days, max(node.outage_cap_days, 1))
    return days


def resolve_attack(node: ItNode, event: AttackEvent, threat: float, rng: Union[RngStream, np.random.Generator],
                   absorb_factor: float = DEFAULT_DDOS_ABSORB_FACTOR, attacker_id: Optional[str] = None) -> ItNode:
    """
    Bernoulli(min(1, vulnerability * threat)) decides whether the attack succeeds. One uniform is drawn for every
    attack so the stream does not depend on the outcome. The node's attack counter goes up either way.

    ransomware: unavailable for ransomware_outage days.
    ddos: load <= capacity does nothing. Up to capacity * absorb_factor the node runs degraded at capacity / load for
    the duration, beyond that it is unavailable for the duration.
    botnet: the node is infected (see botnet_spread, launch_attacks for payloads).
    """
    rng = as_generator(rng)
    node.attacks_received += 1
    u = rng.random()
    if u >= success_probability(node, threat):
        return node

    if event.kind == AttackKind.ransomware:
        node.make_unavailable(ransomware_outage(node, event))
    elif event.kind == AttackKind.ddos:
        if event.request_load <= node.service_capacity:
            return node
        if event.request_load <= node.service_capacity * absorb_factor:
            node.make_degraded(node.service_capacity / event.request_load, event.duration)
        else:
            node.make_unavailable(event.duration)
    elif event.kind == AttackKind.botnet:
        node.infected = True
        if node.infected_by is None:
            node.infected_by = attacker_id
    else:
        raise RuntimeError(f'Unknown attack kind {event.kind}')
    return node


def botnet_spread(nodes: Sequence[ItNode], graph: nx.DiGraph, rng: Union[RngStream, np.random.Generator],
                  p_spread: float = DEFAULT_P_SPREAD) -> List[str]:
    """
    Every node infected before today tries to infect each of its graph neighbours (either edge direction) with
    probability p_spread. Returns the ids infected today. Nodes and neighbours are visited in id order
    """
    if not 0 <= p_spread <= 1:
        raise ValueError(f'p_spread must be in [0, 1], got {p_spread}')
    rng = as_generator(rng)
    by_id = {n.id: n for n in nodes}
    sources = sorted(n.id for n in nodes if n.infected)
    undirected = graph.to_undirected(as_view=True)
    newly = []
    for s in sources:
        for neighbour in sorted(undirected.neighbors(s)):
            target = by_id[neighbour]
            if target.infected:
                continue
            if rng.random() < p_spread:
                target.infected = True
                target.infected_by = by_id[s].infected_by
                newly.append(neighbour)
    return newly