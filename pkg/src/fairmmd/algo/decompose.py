"""Padded decomposition of a pruned point set.

Threshold graph G on U with edges d(u, v) < gamma * alpha, a CKR random
partition of G by hop-distance balls of a random radius R, then removal of the
guard vertices sitting at hop distance exactly R from their cluster center.
"""
import collections
import enum
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike
from scipy import sparse
from scipy.sparse import csgraph

from fairmmd.core import Dataset, FloatArray, Indices

_log = logging.getLogger(__name__)


class Alpha(NamedTuple):
    alpha: float
    delta1: int
    delta2: int


class Strategy(enum.Enum):
    MATRIX = "matrix"
    BFS = "bfs"


@dataclass(frozen=True, eq=False)
class ThresholdGraph:
    vertices: Indices  # dataset indices; graph nodes are positions in this array
    adjacency: sparse.csr_matrix
    theta: float

    @property
    def edges(self) -> list[tuple[int, int]]:
        """Edges as pairs of dataset indices, u < v."""
        coo = sparse.triu(self.adjacency, k=1).tocoo()
        pairs = zip(self.vertices[coo.row], self.vertices[coo.col], strict=True)
        return sorted((min(int(u), int(v)), max(int(u), int(v))) for u, v in pairs)

    def neighbors(self, node: int) -> Indices:
        start, stop = self.adjacency.indptr[node], self.adjacency.indptr[node + 1]
        return self.adjacency.indices[start:stop]


@dataclass(frozen=True, eq=False)
class Decomposition:
    clusters: tuple[Indices, ...]  # D_1..D_n in permutation order, maybe empty
    guards: Indices
    radius: int
    permutation: Indices  # dataset indices in the order they act as centers

    def nonempty(self) -> list[Indices]:
        return [c for c in self.clusters if len(c)]

    def label_of(self) -> dict[int, int]:
        return {int(u): i for i, c in enumerate(self.clusters) for u in c}


def compute_alpha(m: int) -> Alpha:
    """alpha = sqrt(ln m) / m with radii delta1 <= delta2."""
    if m < 2:  # noqa: PLR2004
        msg = f"decomposition needs at least 2 colors: {m=}"
        raise ValueError(msg)
    alpha = math.sqrt(math.log(m)) / m
    delta1 = max(math.floor(1 / (4 * alpha)), 1)
    delta2 = math.floor(1 / (2 * alpha))
    assert 1 <= delta1 <= delta2, (m, delta1, delta2)
    return Alpha(alpha, delta1, delta2)


def build_threshold_graph(
    dataset: Dataset, vertices: ArrayLike, theta: float, dist: FloatArray | None = None
) -> ThresholdGraph:
    """Edges for pairs strictly closer than theta.

    dist is the precomputed pairwise matrix of vertices, if at hand.
    """
    assert theta > 0, theta
    vertices = np.asarray(vertices, dtype=np.intp)
    if dist is None:
        dist = dataset.pairwise(vertices)
    adj = dist < theta
    np.fill_diagonal(adj, val=False)
    return ThresholdGraph(vertices, sparse.csr_matrix(adj, dtype=np.int8), theta)


def hop_distances(graph: ThresholdGraph, limit: int) -> FloatArray:
    """All-pairs hop counts in graph; +inf beyond limit."""
    if graph.adjacency.nnz == 0:
        hops = np.full((len(graph.vertices),) * 2, np.inf)
        np.fill_diagonal(hops, 0)
        return hops
    return csgraph.dijkstra(
        graph.adjacency, directed=False, unweighted=True, limit=limit
    )


def ckr_decompose(  # noqa: PLR0913
    dataset: Dataset,
    vertices: ArrayLike,
    gamma: float,
    rng: np.random.Generator,
    *,
    alpha: Alpha | None = None,
    graph: ThresholdGraph | None = None,
    hops: FloatArray | None = None,
    strategy: Strategy = Strategy.MATRIX,
) -> Decomposition:
    """Draw a permutation and a radius from rng, then partition.

    graph and hops may be passed in to reuse them across repetitions.
    """
    assert gamma > 0, gamma
    alpha = alpha or compute_alpha(dataset.m)
    if graph is None:
        graph = build_threshold_graph(dataset, vertices, gamma * alpha.alpha)
    order = rng.permutation(len(graph.vertices))
    radius = int(rng.integers(alpha.delta1, alpha.delta2, endpoint=True))
    if strategy is Strategy.BFS:
        return ckr_partition_bfs(graph, order, radius)
    return ckr_partition(graph, order, radius, hops)


def ckr_partition(
    graph: ThresholdGraph,
    order: ArrayLike,
    radius: int,
    hops: FloatArray | None = None,
) -> Decomposition:
    """Deterministic partition for an explicit center order (graph positions).

    C_j takes the still unassigned nodes within hop distance R of center j;
    D_j keeps those strictly closer than R.
    """
    order = np.asarray(order, dtype=np.intp)
    if hops is None:
        hops = hop_distances(graph, radius)
    assigned = np.zeros(len(graph.vertices), dtype=bool)
    clusters: list[Indices] = []
    guards: list[Indices] = []
    for center in order:
        row = hops[center]
        ball = (row <= radius) & ~assigned
        assigned |= ball
        inner = ball & (row < radius)
        clusters.append(graph.vertices[inner])
        guards.append(graph.vertices[ball & ~inner])
    return _decomposition(graph, clusters, guards, radius, order)


def ckr_partition_bfs(
    graph: ThresholdGraph, order: ArrayLike, radius: int
) -> Decomposition:
    """Same partition as ckr_partition by breadth-first balls per center.

    A node already reached from an earlier center at no greater hop distance
    is not expanded again: everything behind it is within R of that center.
    """
    order = np.asarray(order, dtype=np.intp)
    size = len(graph.vertices)
    assigned = np.zeros(size, dtype=bool)
    best = np.full(size, radius + 1, dtype=np.intp)
    clusters: list[Indices] = []
    guards: list[Indices] = []
    for center in order:
        depth = {int(center): 0}
        queue = collections.deque([int(center)])
        while queue:
            node = queue.popleft()
            d = depth[node]
            if best[node] <= d and node != center:
                continue
            best[node] = min(best[node], d)
            if d == radius:
                continue
            for nb in graph.neighbors(node):
                if (nb := int(nb)) not in depth:
                    depth[nb] = d + 1
                    queue.append(nb)
        inner: list[int] = []
        outer: list[int] = []
        for node, d in depth.items():
            if assigned[node] or d > radius:
                continue
            assigned[node] = True
            (inner if d < radius else outer).append(node)
        clusters.append(graph.vertices[np.sort(np.asarray(inner, dtype=np.intp))])
        guards.append(graph.vertices[np.sort(np.asarray(outer, dtype=np.intp))])
    return _decomposition(graph, clusters, guards, radius, order)


def _decomposition(
    graph: ThresholdGraph,
    clusters: list[Indices],
    guards: list[Indices],
    radius: int,
    order: Indices,
) -> Decomposition:
    guard = np.sort(np.concatenate(guards)) if guards else np.empty(0, np.intp)
    dec = Decomposition(tuple(clusters), guard, radius, graph.vertices[order])
    _log.debug(
        f"R={radius} clusters={len(dec.nonempty())} guards={len(dec.guards)}"
        f" of {len(graph.vertices)}"
    )
    return dec


def cluster_separation_check(
    dataset: Dataset, decomposition: Decomposition | list[Indices], bound: float
) -> bool:
    """True iff points in different clusters are at least bound apart."""
    if isinstance(decomposition, Decomposition):
        clusters = decomposition.nonempty()
    else:
        clusters = [np.asarray(c, dtype=np.intp) for c in decomposition if len(c)]
    if len(clusters) < 2:  # noqa: PLR2004
        return True
    members = np.concatenate(clusters)
    labels = np.repeat(np.arange(len(clusters)), [len(c) for c in clusters])
    dist = dataset.pairwise(members)
    cross = labels[:, None] != labels[None, :]
    return bool((dist[cross] >= bound).all())
