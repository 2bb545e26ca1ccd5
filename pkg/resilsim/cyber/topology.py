from typing import Dict, Sequence, Tuple

import networkx as nx

from resilsim.configuration import DEFAULT_QUALITY_FLOOR
from resilsim.cyber.it_node import ItNode
from resilsim.disease_progression.health_states import CareLevel, SERVICE_LEVELS


class CyclicDependencyError(ValueError):
    def __init__(self, cycle):
        self.cycle = cycle
        super().__init__('IT dependency graph has a cycle: ' + ' -> '.join(str(u) for u, _ in cycle) +
                         f' -> {cycle[0][0]}')


def build_it_graph(nodes: Sequence[ItNode]) -> nx.DiGraph:
    """Edges point from the node depended upon to the node depending on it"""
    graph = nx.DiGraph()
    graph.add_nodes_from(sorted(n.id for n in nodes))
    known = set(graph.nodes)
    for n in nodes:
        for parent in n.depends_on:
            if parent not in known:
                raise ValueError(f'IT node {n.id} depends on unknown node {parent}')
            graph.add_edge(parent, n.id)
    if not nx.is_directed_acyclic_graph(graph):
        raise CyclicDependencyError(nx.find_cycle(graph))
    return graph


def propagate_dependencies(nodes: Sequence[ItNode], graph: nx.DiGraph = None) -> Dict[str, float]:
    """
    Effective quality per node: q_eff(n) = q_own(n) * min(q_eff(parent)), parents visited first (lexicographic
    topological order, so the result does not depend on declaration order)
    """
    if graph is None:
        graph = build_it_graph(nodes)
    by_id = {n.id: n for n in nodes}
    q_eff = {}
    for node_id in nx.lexicographical_topological_sort(graph):
        parents = [q_eff[p] for p in graph.predecessors(node_id)]
        upstream = min(parents) if parents else 1.
        q_eff[node_id] = by_id[node_id].q_own * upstream
    return q_eff


def couple_to_hospital(q_eff: float, q_floor: float = DEFAULT_QUALITY_FLOOR) -> Tuple[Dict[CareLevel, float], bool]:
    """
    IT factor per care service of a hospital coupled to a node with effective quality q_eff. mHealth lives on the IT
    system: it gets q_eff as is and closes at 0. In-house services keep working without IT, never below q_floor
    """
    if not 0 <= q_eff <= 1:
        raise ValueError(f'q_eff must be in [0, 1], got {q_eff}')
    q_it = {}
    for level in SERVICE_LEVELS:
        q_it[level] = q_eff if level == CareLevel.mHealth else max(q_eff, q_floor)
    return q_it, q_eff > 0
