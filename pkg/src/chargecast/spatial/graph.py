"""k-nearest-neighbour adjacency graphs with deterministic bridging.

Edges are stored as a sorted (m, 2) integer array with i < j per row, which
keeps every downstream construction reproducible. Distance ties are broken by
the lower node index.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import UserInputError


@dataclass(frozen=True)
class AdjacencyGraph:
    """Undirected graph over planar nodes (coordinates in meters)."""

    n_nodes: int
    edges: np.ndarray  # (m, 2) int, each row sorted, rows lexicographically sorted
    coords: np.ndarray  # (n, 2) float
    bridge_edges: tuple[tuple[int, int], ...] = field(default=())

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in self.edges}

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_nodes, dtype=int)
        np.add.at(deg, self.edges[:, 0], 1)
        np.add.at(deg, self.edges[:, 1], 1)
        return deg


def _pack_edges(pairs: set[tuple[int, int]]) -> np.ndarray:
    if not pairs:
        return np.empty((0, 2), dtype=int)
    arr = np.array(sorted(pairs), dtype=int)
    return arr


def knn_graph(coords, k: int = 4) -> AdjacencyGraph:
    """Symmetrized k-nearest-neighbour graph.

    An edge {i, j} is present iff j is among i's k nearest nodes or vice
    versa (union symmetrization), so every degree is at least k.
    """
    xy = np.asarray(coords, dtype=float)
    if xy.ndim != 2 or xy.shape[1] != 2:
        raise UserInputError("coords must have shape (n, 2)")
    if not np.all(np.isfinite(xy)):
        raise UserInputError("coords must be finite")
    n = xy.shape[0]
    if n <= k:
        raise UserInputError(f"knn_graph requires n > k (n={n}, k={k})")
    dist = cdist(xy, xy)
    pairs: set[tuple[int, int]] = set()
    idx = np.arange(n)
    for i in range(n):
        # sort others by (distance, index); lower index wins distance ties
        order = sorted((dist[i, j], j) for j in idx if j != i)
        for _, j in order[:k]:
            pairs.add((min(i, j), max(i, j)))
    return AdjacencyGraph(n_nodes=n, edges=_pack_edges(pairs), coords=xy)


def connected_components(graph: AdjacencyGraph) -> list[list[int]]:
    """Connected components as sorted node lists, ordered by smallest member."""
    adj: list[list[int]] = [[] for _ in range(graph.n_nodes)]
    for i, j in graph.edges:
        adj[int(i)].append(int(j))
        adj[int(j)].append(int(i))
    seen = np.zeros(graph.n_nodes, dtype=bool)
    components = []
    for start in range(graph.n_nodes):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        members = []
        while stack:
            node = stack.pop()
            members.append(node)
            for nxt in adj[node]:
                if not seen[nxt]:
                    seen[nxt] = True
                    stack.append(nxt)
        components.append(sorted(members))
    return components


def bridge_components(graph: AdjacencyGraph) -> AdjacencyGraph:
    """Connect a fragmented graph by repeatedly adding the shortest cross edge.

    While more than one component remains, the globally shortest edge between
    two different components is added (ties broken by node index pair), so a
    graph with m components gains exactly m - 1 edges.
    """
    components = connected_components(graph)
    if len(components) <= 1:
        return graph
    pairs = set(map(tuple, graph.edges.tolist()))
    added: list[tuple[int, int]] = []
    labels = np.empty(graph.n_nodes, dtype=int)
    for ci, members in enumerate(components):
        labels[members] = ci
    dist = cdist(graph.coords, graph.coords)
    while len(np.unique(labels)) > 1:
        best = None
        for i in range(graph.n_nodes):
            for j in range(i + 1, graph.n_nodes):
                if labels[i] == labels[j]:
                    continue
                cand = (dist[i, j], i, j)
                if best is None or cand < best:
                    best = cand
        _, i, j = best
        pairs.add((i, j))
        added.append((i, j))
        labels[labels == labels[j]] = labels[i]
    return AdjacencyGraph(
        n_nodes=graph.n_nodes,
        edges=_pack_edges(pairs),
        coords=graph.coords,
        bridge_edges=graph.bridge_edges + tuple(added),
    )


def write_edge_list_csv(graph: AdjacencyGraph, path: Path | str) -> None:
    """Edge list as ``i, j, distance_m`` rows for plotting."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["i", "j", "distance_m"])
        for i, j in graph.edges:
            d = float(np.hypot(*(graph.coords[int(i)] - graph.coords[int(j)])))
            writer.writerow([int(i), int(j), repr(d)])


def write_adjacency_text(graph: AdjacencyGraph, path: Path | str) -> None:
    """Plain-text adjacency (``node: neighbour neighbour ...``), one node per line."""
    neighbours: list[list[int]] = [[] for _ in range(graph.n_nodes)]
    for i, j in graph.edges:
        neighbours[int(i)].append(int(j))
        neighbours[int(j)].append(int(i))
    lines = [
        f"{node}: {' '.join(str(m) for m in sorted(adj))}"
        for node, adj in enumerate(neighbours)
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
