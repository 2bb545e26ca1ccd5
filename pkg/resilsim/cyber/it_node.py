from dataclasses import dataclass, field
from enum import IntEnum
from typing import List, Optional

from resilsim.configuration import DEFAULT_DEGRADED_QUALITY


class NodeStatus(IntEnum):
    nominal = 0
    degraded = 1
    unavailable = 2


@dataclass
class ItNode:
    """
    Computation/telecom agent. outage_remaining counts the days left unavailable, degraded_remaining the days left in
    degraded mode (DDoS within the absorb factor or the recovery ramp). outage_cap_days caps ransomware outages, this
    is where the cyber-defense countermeasures act
    """
    id: str
    service_capacity: float
    vulnerability: float
    recovery_capacity: float = 1.
    depends_on: List[str] = field(default_factory=list)
    recovery_ramp_days: int = 0
    degraded_quality: float = DEFAULT_DEGRADED_QUALITY
    outage_cap_days: Optional[int] = None

    status: NodeStatus = NodeStatus.nominal
    q_degraded: float = 1.
    outage_remaining: int = 0
    degraded_remaining: int = 0
    ramping: bool = False
    attacks_received: int = 0
    infected: bool = False
    infected_by: Optional[str] = None

    def __post_init__(self):
        if not 0 <= self.vulnerability <= 1:
            raise ValueError(f'IT node {self.id}: vulnerability must be in [0, 1], got {self.vulnerability}')
        if self.recovery_capacity <= 0:
            raise ValueError(f'IT node {self.id}: recovery_capacity must be > 0, got {self.recovery_capacity}')
        if self.service_capacity < 0:
            raise ValueError(f'IT node {self.id}: service_capacity must be >= 0, got {self.service_capacity}')
        if self.recovery_ramp_days < 0:
            raise ValueError(f'IT node {self.id}: recovery_ramp_days must be >= 0')
        if not 0 < self.degraded_quality < 1:
            raise ValueError(f'IT node {self.id}: degraded_quality must be in (0, 1), got {self.degraded_quality}')

    @property
    def q_own(self) -> float:
        if self.status == NodeStatus.unavailable:
            return 0.
        if self.status == NodeStatus.degraded:
            return self.q_degraded
        return 1.

    def make_unavailable(self, days: int):
        assert days > 0
        self.status = NodeStatus.unavailable
        self.outage_remaining = max(self.outage_remaining, days)
        self.degraded_remaining = 0
        self.ramping = False

    def make_degraded(self, q: float, days: int):
        """Never upgrades an unavailable node. Overlapping degradations keep the worse quality and the longer tail"""
        assert 0 < q < 1 and days > 0
        if self.status == NodeStatus.unavailable:
            return
        if self.status == NodeStatus.degraded and not self.ramping:
            q = min(q, self.q_degraded)
            days = max(days, self.degraded_remaining)
        self.status = NodeStatus.degraded
        self.q_degraded = q
        self.degraded_remaining = days
        self.ramping = False

    def check_invariants(self):
        assert (self.outage_remaining > 0) == (self.status == NodeStatus.unavailable), \
            f'IT node {self.id}: outage_remaining={self.outage_remaining} but status {self.status.name}'


def _ramp_quality(node: ItNode) -> float:
    # day i of a ramp of R days sits at degraded_quality + (1 - degraded_quality) * (i - 1) / R
    done = node.recovery_ramp_days - node.degraded_remaining
    return node.degraded_quality + (1 - node.degraded_quality) * done / node.recovery_ramp_days


def recovery_step(node: ItNode) -> ItNode:
    """
    One day of recovery. Unavailable nodes count their outage down and come back nominal when it reaches 0 (or enter
    the linear recovery ramp if the node has one). Degraded nodes count down the same way
    """
    if node.status == NodeStatus.unavailable:
        node.outage_remaining -= 1
        if node.outage_remaining <= 0:
            node.outage_remaining = 0
            if node.recovery_ramp_days > 0:
                node.status = NodeStatus.degraded
                node.ramping = True
                node.degraded_remaining = node.recovery_ramp_days
                node.q_degraded = _ramp_quality(node)
            else:
                node.status = NodeStatus.nominal
    elif node.status == NodeStatus.degraded:
        node.degraded_remaining -= 1
        if node.degraded_remaining <= 0:
            node.degraded_remaining = 0
            node.status = NodeStatus.nominal
            node.q_degraded = 1.
            node.ramping = False
        elif node.ramping:
            node.q_degraded = _ramp_quality(node)
    return node
