"""Assign clusters to colors by integral maximum flow.

Network: s -> D_i (1), D_i -> c_j (1) iff D_i holds a point of color j,
c_j -> t (lower_j), c_j -> z (upper_j - lower_j), z -> t (k - sum(lower)).
A flow of value k selects one point per flowing cluster and meets every bound.
"""
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import sparse
from scipy.sparse import csgraph

from fairmmd.core import (
    Dataset,
    FairnessSpec,
    Indices,
    Infeasible,
    Provenance,
    Solution,
)

_log = logging.getLogger(__name__)

SOURCE = 0
SLACK = 1
SINK = 2
_FIXED = 3  # s, z, t come first


class Arc(NamedTuple):
    tail: int
    head: int
    capacity: int


@dataclass(frozen=True, eq=False)
class FlowNetwork:
    """Nodes: s=0, z=1, t=2, then one per nonempty cluster, then one per color."""

    clusters: tuple[Indices, ...]  # nonempty clusters, in input order
    m: int
    arcs: tuple[Arc, ...]

    @property
    def num_nodes(self) -> int:
        return _FIXED + len(self.clusters) + self.m

    def cluster_node(self, i: int) -> int:
        return _FIXED + i

    def color_node(self, j: int) -> int:
        return _FIXED + len(self.clusters) + j

    def capacity(self, tail: int, head: int) -> int | None:
        for arc in self.arcs:
            if (arc.tail, arc.head) == (tail, head):
                return arc.capacity
        return None

    def to_csgraph(self) -> sparse.csr_matrix:
        """Capacity matrix without zero-capacity arcs."""
        arcs = [a for a in self.arcs if a.capacity > 0]
        size = self.num_nodes
        if not arcs:
            return sparse.csr_matrix((size, size), dtype=np.int32)
        tails, heads, caps = zip(*arcs, strict=True)
        return sparse.csr_matrix(
            (np.asarray(caps, dtype=np.int32), (tails, heads)), shape=(size, size)
        )


class Flow(NamedTuple):
    value: int
    arcs: sparse.csr_matrix  # flow on each arc; negative entries are reverse flow

    def on(self, tail: int, head: int) -> int:
        return int(self.arcs[tail, head])


@dataclass(frozen=True)
class Assignment:
    """Chosen color and representative per flowing cluster."""

    colors: dict[int, int]  # cluster position -> color
    points: dict[int, int]  # cluster position -> dataset index


class Palettes(NamedTuple):
    """Nonempty clusters and their distinct (cluster, color) pairs."""

    clusters: tuple[Indices, ...]
    pairs: NDArray[np.intp]  # shape (p, 2), sorted by cluster then color


def palettes(
    clusters: Sequence[ArrayLike], colors: NDArray[np.intp], m: int
) -> Palettes:
    kept = tuple(
        c
        for c in (np.asarray(x, dtype=np.intp) for x in clusters)
        if len(c)  # skip empty
    )
    if not kept:
        return Palettes(kept, np.empty((0, 2), dtype=np.intp))
    owner = np.repeat(np.arange(len(kept)), [len(c) for c in kept])
    codes = np.unique(owner * m + colors[np.concatenate(kept)])
    return Palettes(kept, np.column_stack(np.divmod(codes, m)))


def build_flow_network(
    clusters: Sequence[ArrayLike] | Palettes,
    colors: NDArray[np.intp],
    spec: FairnessSpec,
) -> FlowNetwork:
    """colors maps dataset index to color id; empty clusters are dropped."""
    if not isinstance(clusters, Palettes):
        clusters = palettes(clusters, colors, spec.m)
    net = FlowNetwork(clusters.clusters, spec.m, ())
    arcs = [Arc(SOURCE, net.cluster_node(i), 1) for i in range(len(net.clusters))]
    arcs.extend(
        Arc(net.cluster_node(int(i)), net.color_node(int(j)), 1)
        for i, j in clusters.pairs
    )
    for j, (lo, up) in enumerate(zip(spec.lower, spec.upper, strict=True)):
        arcs.append(Arc(net.color_node(j), SINK, lo))
        arcs.append(Arc(net.color_node(j), SLACK, up - lo))
    arcs.append(Arc(SLACK, SINK, spec.slack))
    return FlowNetwork(net.clusters, spec.m, tuple(arcs))


def max_flow_integral(network: FlowNetwork) -> Flow:
    """Dinic's algorithm on integer capacities; deterministic."""
    graph = network.to_csgraph()
    if graph.nnz == 0:
        return Flow(0, graph)
    res = csgraph.maximum_flow(graph, SOURCE, SINK, method="dinic")
    arcs = res.flow.tocsr()
    arcs.sum_duplicates()
    return Flow(int(res.flow_value), arcs)


def extract_assignment(network: FlowNetwork, flow: Flow, colors: NDArray[np.intp]):
    """Read the one saturated color arc leaving each cluster node."""
    chosen: dict[int, int] = {}
    points: dict[int, int] = {}
    first = network.color_node(0)
    (indptr, heads, values) = (flow.arcs.indptr, flow.arcs.indices, flow.arcs.data)
    for i, members in enumerate(network.clusters):
        node = network.cluster_node(i)
        row = slice(indptr[node], indptr[node + 1])
        used = heads[row][(values[row] > 0) & (heads[row] >= first)]
        if not used.size:
            continue
        j = int(used.min()) - first
        chosen[i] = j
        points[i] = int(members[colors[members] == j].min())
    return Assignment(chosen, points)


def extract_solution(
    dataset: Dataset,
    network: FlowNetwork,
    flow: Flow,
    spec: FairnessSpec,
    provenance: Provenance = Provenance(),  # noqa: B008
) -> Solution | Infeasible:
    if flow.value < spec.k:
        return Infeasible(f"max flow {flow.value} < k={spec.k}")
    assignment = extract_assignment(network, flow, dataset.colors)
    solution = Solution.build(dataset, assignment.points.values(), spec, provenance)
    assert solution.feasible, solution
    return solution


def assign(
    dataset: Dataset,
    clusters: Sequence[ArrayLike],
    spec: FairnessSpec,
    provenance: Provenance = Provenance(),  # noqa: B008
) -> Solution | Infeasible:
    """Build, solve, and extract in one step."""
    pal = palettes(clusters, dataset.colors, spec.m)
    if reason := _quick_reject(pal, spec):
        return Infeasible(reason)
    network = build_flow_network(pal, dataset.colors, spec)
    flow = max_flow_integral(network)
    _log.debug(f"flow {flow.value} / {spec.k} over {len(network.clusters)} clusters")
    return extract_solution(dataset, network, flow, spec, provenance)


def _quick_reject(pal: Palettes, spec: FairnessSpec) -> str:
    """Necessary conditions that avoid solving hopeless networks."""
    if len(pal.clusters) < spec.k:
        return f"{len(pal.clusters)} nonempty clusters < k={spec.k}"
    offered = np.bincount(pal.pairs[:, 1], minlength=spec.m)
    short = np.flatnonzero(offered < np.asarray(spec.lower))
    if short.size:
        return f"too few clusters offer colors {short.tolist()}"
    return ""
