"""
Communication graph of the distributed variant.

Nodes are labelled 0..K-1. Consensus constraints are indexed by ordered
neighbor pairs (i, j) in lexicographic order, which is also the row order
of the stacked centralized instance.
"""

from typing import List, Tuple

import networkx as nx

from pdfw.common import ContractViolation


class GraphTopology:
    """
    Undirected connected graph without self-loops.

    Args:
        graph (networkx.Graph): nodes must be the integers 0..K-1

    Raises:
        ContractViolation: for self-loops, wrong labels or a disconnected graph
    """

    def __init__(self, graph: nx.Graph):
        if graph.number_of_nodes() == 0:
            raise ContractViolation("A graph needs at least one node")
        if sorted(graph.nodes) != list(range(graph.number_of_nodes())):
            raise ContractViolation(f"Graph nodes must be 0..K-1, got {sorted(graph.nodes)}")
        if nx.number_of_selfloops(graph) > 0:
            raise ContractViolation("Self-loops are not allowed")
        if not nx.is_connected(graph):
            raise ContractViolation("The communication graph must be connected")
        self.graph = graph
        self._neighbors = {i: sorted(graph.neighbors(i)) for i in graph.nodes}

    @classmethod
    def from_edges(cls, edges, K: int = None) -> "GraphTopology":
        graph = nx.Graph()
        if K is not None:
            graph.add_nodes_from(range(K))
        graph.add_edges_from((int(i), int(j)) for i, j in edges)
        return cls(graph)

    @property
    def K(self) -> int:
        return self.graph.number_of_nodes()

    @property
    def edges(self) -> List[Tuple[int, int]]:
        return sorted((min(i, j), max(i, j)) for i, j in self.graph.edges)

    def neighbors(self, i: int) -> List[int]:
        return self._neighbors[i]

    @property
    def ordered_pairs(self) -> List[Tuple[int, int]]:
        """(i, j) for every node i and neighbor j, lexicographically"""
        return [(i, j) for i in range(self.K) for j in self._neighbors[i]]

    def incident_pairs(self, i: int) -> List[Tuple[int, int]]:
        """Ordered pairs involving node i, in lexicographic order"""
        before = [(j, i) for j in self._neighbors[i] if j < i]
        own = [(i, j) for j in self._neighbors[i]]
        after = [(j, i) for j in self._neighbors[i] if j > i]
        return before + own + after


def make_cycle_graph(K: int) -> GraphTopology:
    if K < 3:
        return make_path_graph(K)
    return GraphTopology(nx.cycle_graph(K))


def make_path_graph(K: int) -> GraphTopology:
    return GraphTopology(nx.path_graph(K))


def make_graph(kind: str, K: int) -> GraphTopology:
    if kind == "cycle":
        return make_cycle_graph(K)
    elif kind == "path":
        return make_path_graph(K)
    raise NotImplementedError(f"Graph kind `{kind}` not implemented")
