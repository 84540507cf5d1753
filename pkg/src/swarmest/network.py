"""Proximity graphs and their connectivity / spectral diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class ProximityGraph:
    """Undirected simple graph on nodes ``0..n-1`` with a sorted edge list."""

    n: int
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.n < 0:
            raise DomainError("node count must be non-negative")
        clean = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise DomainError(f"self-loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise DomainError(f"edge ({i}, {j}) out of range")
            clean.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", tuple(sorted(clean)))

    @classmethod
    def from_adjacency(cls, adj) -> "ProximityGraph":
        adj = np.asarray(adj, dtype=bool)
        iu, ju = np.nonzero(np.triu(adj, k=1))
        return cls(adj.shape[0], tuple(zip(iu.tolist(), ju.tolist())))

    @classmethod
    def complete(cls, n: int) -> "ProximityGraph":
        return cls(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=float)
        if self.edges:
            e = np.array(self.edges)
            a[e[:, 0], e[:, 1]] = 1.0
            a[e[:, 1], e[:, 0]] = 1.0
        return a

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def neighbors(self) -> list[list[int]]:
        nb: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            nb[i].append(j)
            nb[j].append(i)
        return [sorted(x) for x in nb]

    def to_edge_list(self) -> str:
        return "".join(f"{i} {j}\n" for i, j in self.edges)

    def write_edge_list(self, path) -> None:
        Path(path).write_text(self.to_edge_list())

    @classmethod
    def read_edge_list(cls, path, n: int) -> "ProximityGraph":
        edges = []
        for line in Path(path).read_text().splitlines():
            if line.strip():
                i, j = line.split()
                edges.append((int(i), int(j)))
        return cls(n, tuple(edges))


def build_proximity_graph(positions, r_comm: float) -> ProximityGraph:
    """Link every pair whose Euclidean distance is ``<= r_comm``."""
    if not r_comm > 0:
        raise DomainError("r_comm must be positive")
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    n = len(pos)
    if n < 2:
        return ProximityGraph(n)
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    return ProximityGraph.from_adjacency(dist <= r_comm)


def mean_degree(graph: ProximityGraph) -> float:
    if graph.n < 1:
        raise DomainError("graph has no nodes")
    return 2.0 * len(graph.edges) / graph.n


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def connected_components(graph: ProximityGraph) -> list[list[int]]:
    uf = UnionFind(graph.n)
    for i, j in graph.edges:
        uf.union(i, j)
    groups: dict[int, list[int]] = {}
    for v in range(graph.n):
        groups.setdefault(uf.find(v), []).append(v)
    return sorted(groups.values(), key=lambda c: (-len(c), c[0]))


def giant_component_size(graph: ProximityGraph) -> int:
    if graph.n < 1:
        raise DomainError("graph has no nodes")
    return len(connected_components(graph)[0])


def averaging_matrix(graph: ProximityGraph, alpha: float) -> np.ndarray:
    """Row-stochastic matrix of the update with the measurement folded into self."""
    adj = graph.adjacency()
    share = (1.0 - alpha) / (1.0 + adj.sum(axis=1))
    w = adj * share[:, None]
    w[np.diag_indices(graph.n)] = alpha + share
    return w


def averaging_spectrum(graph: ProximityGraph, alpha: float) -> np.ndarray:
    """Eigenvalues of :func:`averaging_matrix`, descending.

    ``W = alpha I + (1 - alpha) (I + D)^-1 (I + A)`` is similar to the symmetric
    ``alpha I + (1 - alpha) (I + D)^-1/2 (I + A) (I + D)^-1/2``, so a symmetric
    eigensolver gives the spectrum to machine precision.
    """
    adj = graph.adjacency()
    m = adj + np.eye(graph.n)
    inv_sqrt = 1.0 / np.sqrt(m.sum(axis=1))
    sym = alpha * np.eye(graph.n) + (1.0 - alpha) * (inv_sqrt[:, None] * m * inv_sqrt[None, :])
    return np.linalg.eigvalsh(sym)[::-1]


def second_largest_eigenvalue(graph: ProximityGraph, alpha: float) -> float:
    """Second-largest eigenvalue modulus of the averaging matrix."""
    if graph.n < 2:
        raise DomainError("need at least two nodes")
    mods = np.sort(np.abs(averaging_spectrum(graph, alpha)))[::-1]
    return float(mods[1])


def random_geometric_graph(n: int, range_ratio: float, rng: np.random.Generator):
    """``n`` uniform points in the unit square linked within ``range_ratio``."""
    if n < 1:
        raise DomainError("n must be at least 1")
    if not (0 < range_ratio <= np.sqrt(2) + 1e-12):
        raise DomainError("range_ratio must lie in (0, sqrt(2)]")
    pos = rng.random((n, 2))
    return pos, build_proximity_graph(pos, range_ratio)
