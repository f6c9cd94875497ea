"""Strongest-transition networks extracted from reduced Google matrices."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .regomax import ReducedMatrix

APPEARING = "appearing"
DISAPPEARING = "disappearing"
STABLE_UP = "stable_up"
STABLE_DOWN = "stable_down"
EDGE_CLASSES = (APPEARING, DISAPPEARING, STABLE_UP, STABLE_DOWN)


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    weight: float


@dataclass(frozen=True)
class ReducedNetwork:
    """Top-k outgoing transitions of every node of a reduced matrix.

    An edge ``source -> target`` stands for the matrix entry
    ``G_R[target, source]``.
    """

    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    k: int
    matrix: np.ndarray

    def weight(self, source: str, target: str) -> float:
        i, j = self.nodes.index(target), self.nodes.index(source)
        return float(self.matrix[i, j])

    def edge_set(self) -> set[tuple[str, str]]:
        return {(e.source, e.target) for e in self.edges}


def top_k_network(gr: ReducedMatrix, k: int = 4) -> ReducedNetwork:
    """Keep the ``k`` largest off-diagonal entries of every column.

    Ties are broken by ascending node id, i.e. by registry order.
    """
    n = gr.size
    if k < 1 or k >= n:
        raise ValueError(f"k must satisfy 1 <= k < {n}, got {k}")
    labels = gr.labels or tuple(str(i) for i in gr.nodes)
    node_ids = np.asarray(gr.nodes)
    edges = []
    for j in range(n):
        col = gr.matrix[:, j]
        rows = [i for i in range(n) if i != j]
        rows.sort(key=lambda i: (-col[i], node_ids[i]))
        for i in rows[:k]:
            edges.append(Edge(labels[j], labels[i], float(col[i])))
    return ReducedNetwork(tuple(labels), tuple(edges), k, gr.matrix)


@dataclass(frozen=True)
class DiffEdge:
    source: str
    target: str
    cls: str
    weight_a: float
    weight_b: float


@dataclass(frozen=True)
class NetworkDiff:
    edges: tuple[DiffEdge, ...]

    def counts(self) -> Counter:
        return Counter(e.cls for e in self.edges)

    def of_class(self, cls: str) -> list[DiffEdge]:
        return [e for e in self.edges if e.cls == cls]


def diff_networks(a: ReducedNetwork, b: ReducedNetwork) -> NetworkDiff:
    """Classify the union of two networks' edges, ``a`` being the earlier year.

    Edges in both networks are ``stable_up`` when the weight did not
    decrease and ``stable_down`` otherwise.  Both years' matrix entries are
    reported for every edge, including edges present in only one network.
    """
    if set(a.nodes) != set(b.nodes):
        raise ValueError("networks are defined on different node sets")
    if a.k != b.k:
        raise ValueError(f"networks use different k ({a.k}, {b.k})")
    in_a, in_b = a.edge_set(), b.edge_set()
    ordered = [(e.source, e.target) for e in a.edges]
    ordered += [(e.source, e.target) for e in b.edges if (e.source, e.target) not in in_a]
    out = []
    for src, tgt in ordered:
        wa, wb = a.weight(src, tgt), b.weight(src, tgt)
        if (src, tgt) in in_a and (src, tgt) in in_b:
            cls = STABLE_UP if wb >= wa else STABLE_DOWN
        elif (src, tgt) in in_b:
            cls = APPEARING
        else:
            cls = DISAPPEARING
        out.append(DiffEdge(src, tgt, cls, wa, wb))
    return NetworkDiff(tuple(out))
