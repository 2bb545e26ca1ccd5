import numpy as np
import pytest

from resilsim.cyber.attacks import AttackEvent, AttackKind, Attacker, BROADCAST, launch_attacks, resolve_attack, \
    ransomware_outage, success_probability, botnet_spread
from resilsim.cyber.it_node import ItNode, NodeStatus, recovery_step
from resilsim.cyber.topology import build_it_graph, propagate_dependencies, couple_to_hospital, CyclicDependencyError
from resilsim.disease_progression.health_states import CareLevel


def _node(node_id='n', vulnerability=1., **kwargs):
    return ItNode(node_id, kwargs.pop('service_capacity', 100.), vulnerability, **kwargs)


def _status_per_day(node, attack_day, event, days):
    """Daily loop as the engine runs it: recovery first, then today's attacks"""
    history = []
    for day in range(days):
        recovery_step(node)
        if day == attack_day:
            resolve_attack(node, event, 1., np.random.default_rng(day))
        node.check_invariants()
        history.append(node.status)
    return history


def test_ransomware_outage_length():
    event = AttackEvent(AttackKind.ransomware, 5, base_outage=10, detection_delay=1)
    assert ransomware_outage(_node(), event) == 11
    assert ransomware_outage(_node(recovery_capacity=2.), event) == 6
    assert ransomware_outage(_node(outage_cap_days=1), event) == 1
    tiny = AttackEvent(AttackKind.ransomware, 5, base_outage=0.1)
    assert ransomware_outage(_node(), tiny) == 1


def test_ransomware_is_unavailable_for_exactly_its_outage():
    event = AttackEvent(AttackKind.ransomware, 3, base_outage=4)
    history = _status_per_day(_node(), 3, event, 12)
    unavailable = [d for d, s in enumerate(history) if s == NodeStatus.unavailable]
    assert unavailable == [3, 4, 5, 6]
    assert history[7] == NodeStatus.nominal


def test_recovery_ramp():
    node = _node(recovery_ramp_days=4, degraded_quality=0.2)
    node.make_unavailable(2)
    qualities = []
    for _ in range(8):
        recovery_step(node)
        qualities.append(node.q_own)
    # one more day unavailable, then four ramp days, then nominal
    np.testing.assert_allclose(qualities, [0., 0.2, 0.4, 0.6, 0.8, 1., 1., 1.])
    assert node.status == NodeStatus.nominal and not node.ramping


def test_attack_during_ramp_restarts_outage():
    node = _node(recovery_ramp_days=3)
    node.make_unavailable(1)
    recovery_step(node)
    assert node.ramping
    node.make_unavailable(2)
    assert node.status == NodeStatus.unavailable and not node.ramping and node.q_own == 0


def test_success_probability_and_failed_attack():
    assert success_probability(_node(vulnerability=0.9), 1.2) == 1.
    assert success_probability(_node(vulnerability=0.5), 0.5) == pytest.approx(0.25)
    node = _node(vulnerability=0.)
    resolve_attack(node, AttackEvent(AttackKind.ransomware, 1, base_outage=5), 1., np.random.default_rng(0))
    assert node.status == NodeStatus.nominal and node.attacks_received == 1


def test_success_rate_matches_probability():
    event = AttackEvent(AttackKind.ransomware, 1, base_outage=5)
    rng = np.random.default_rng(11)
    hits = 0
    n = 20000
    for _ in range(n):
        node = _node(vulnerability=0.5)
        resolve_attack(node, event, 0.6, rng)
        hits += node.status == NodeStatus.unavailable
    assert abs(hits / n - 0.3) < 4 * np.sqrt(0.3 * 0.7 / n)


@pytest.mark.parametrize('load, status, quality', [
    (80., NodeStatus.nominal, 1.),
    (125., NodeStatus.degraded, 0.8),
    (200., NodeStatus.unavailable, 0.),
])
def test_ddos_regimes(load, status, quality):
    node = _node(service_capacity=100.)
    resolve_attack(node, AttackEvent(AttackKind.ddos, 1, duration=3, request_load=load), 1., np.random.default_rng(0))
    assert node.status == status
    assert node.q_own == pytest.approx(quality)
    for _ in range(3):
        recovery_step(node)
    assert node.status == NodeStatus.nominal


def test_overlapping_degradations_keep_the_worse():
    node = _node()
    node.make_degraded(0.8, 2)
    node.make_degraded(0.9, 5)
    assert node.q_degraded == 0.8 and node.degraded_remaining == 5
    node.make_unavailable(1)
    node.make_degraded(0.5, 10)
    assert node.status == NodeStatus.unavailable


def test_node_validation():
    with pytest.raises(ValueError):
        _node(vulnerability=1.5)
    with pytest.raises(ValueError):
        _node(recovery_capacity=0)
    with pytest.raises(ValueError):
        AttackEvent(AttackKind.ransomware, 1)
    with pytest.raises(ValueError):
        AttackEvent(AttackKind.ddos, 1, request_load=10, duration=0)
    with pytest.raises(ValueError):
        AttackEvent(AttackKind.ransomware, 1, base_outage=1, payload=AttackEvent(AttackKind.ddos, 1, request_load=1))


def test_launch_attacks_targets():
    event = AttackEvent(AttackKind.ransomware, 4, base_outage=3)
    single = Attacker('a', target='x', campaign=[event])
    assert launch_attacks(single, 3, np.random.default_rng(0)) == []
    assert launch_attacks(single, 4, np.random.default_rng(0)) == [(event, 'x')]
    broadcast = Attacker('b', target=BROADCAST, campaign=[event])
    assert [t for _, t in launch_attacks(broadcast, 4, np.random.default_rng(0), node_ids=['z', 'y'])] == ['y', 'z']
    never = Attacker('c', target='x', campaign=[AttackEvent(AttackKind.ransomware, 4, base_outage=3,
                                                            launch_probability=0.)])
    assert launch_attacks(never, 4, np.random.default_rng(0)) == []


def test_botnet_payload_adds_up_over_bots():
    payload = AttackEvent(AttackKind.ddos, 0, duration=2, request_load=30)
    botnet = AttackEvent(AttackKind.botnet, 2, payload=payload, payload_delay=5, payload_target='server')
    attacker = Attacker('herder', target='pc1', campaign=[botnet])
    launched = launch_attacks(attacker, 7, np.random.default_rng(0), bots=['pc1', 'pc2', 'pc3'])
    assert len(launched) == 1
    event, target = launched[0]
    assert target == 'server' and event.request_load == 90 and event.start_day == 7
    assert launch_attacks(attacker, 7, np.random.default_rng(0), bots=[]) == []


def test_botnet_infection_and_spread():
    nodes = [_node('a'), _node('b', depends_on=['a']), _node('c', depends_on=['b'])]
    graph = build_it_graph(nodes)
    resolve_attack(nodes[1], AttackEvent(AttackKind.botnet, 1), 1., np.random.default_rng(0), attacker_id='herder')
    assert nodes[1].infected and nodes[1].infected_by == 'herder'
    # infection is not an outage
    assert nodes[1].status == NodeStatus.nominal
    newly = botnet_spread(nodes, graph, np.random.default_rng(0), p_spread=1.)
    assert newly == ['a', 'c']
    assert all(n.infected_by == 'herder' for n in nodes)
    with pytest.raises(ValueError):
        botnet_spread(nodes, graph, np.random.default_rng(0), p_spread=2)


def test_dependency_propagation():
    nodes = [_node('national'), _node('regional', depends_on=['national']),
             _node('hospital_it', depends_on=['regional']), _node('other', depends_on=['national'])]
    nodes[1].make_degraded(0.5, 3)
    q = propagate_dependencies(nodes)
    assert q == {'national': 1., 'regional': 0.5, 'hospital_it': 0.5, 'other': 1.}
    nodes[0].make_unavailable(2)
    q = propagate_dependencies(nodes)
    assert all(v == 0 for v in q.values())
    # declaration order does not matter
    assert propagate_dependencies(list(reversed(nodes))) == q


def test_cycle_and_unknown_dependency():
    with pytest.raises(CyclicDependencyError) as e:
        build_it_graph([_node('a', depends_on=['b']), _node('b', depends_on=['a'])])
    assert 'a' in str(e.value) and 'b' in str(e.value)
    with pytest.raises(ValueError):
        build_it_graph([_node('a', depends_on=['ghost'])])


def test_couple_to_hospital():
    q_it, mhealth = couple_to_hospital(0.)
    assert not mhealth
    assert q_it[CareLevel.mHealth] == 0
    assert q_it[CareLevel.ICU] == pytest.approx(0.25)
    q_it, mhealth = couple_to_hospital(0.6)
    assert mhealth and all(v == pytest.approx(0.6) for v in q_it.values())
    with pytest.raises(ValueError):
        couple_to_hospital(1.2)
