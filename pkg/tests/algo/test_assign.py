import time

import numpy as np
import pytest
from fairmmd.algo import assign
from fairmmd.baseline import oracle
from fairmmd.core import Dataset, FairnessSpec, Solution
from hypothesis import assume, given, settings
from hypothesis import strategies as st


@pytest.fixture()
def pair():
    """a (color 0) and b (color 1), far apart."""
    return Dataset(np.array([0.0, 10.0]), np.array([0, 1]), 2)


def test_network_structure(pair: Dataset):
    spec = FairnessSpec(2, (1, 1), (1, 1))
    net = assign.build_flow_network([[0], [1]], pair.colors, spec)
    assert len(net.clusters) == 2  # noqa: PLR2004
    assert net.num_nodes == 3 + 2 + 2
    assert net.capacity(assign.SOURCE, net.cluster_node(0)) == 1
    assert net.capacity(net.cluster_node(0), net.color_node(0)) == 1
    assert net.capacity(net.cluster_node(0), net.color_node(1)) is None
    assert net.capacity(net.color_node(0), assign.SINK) == 1
    assert net.capacity(net.color_node(0), assign.SLACK) == 0
    assert net.capacity(assign.SLACK, assign.SINK) == 0
    flow = assign.max_flow_integral(net)
    assert flow.value == 2  # noqa: PLR2004
    sol = assign.extract_solution(pair, net, flow, spec)
    assert isinstance(sol, Solution)
    assert sol.indices == (0, 1)
    assert sol.feasible


def test_duplicate_color_single_arc():
    data = Dataset(np.arange(3.0), np.array([0, 0, 1]), 2)
    spec = FairnessSpec(1, (0, 0), (1, 1))
    net = assign.build_flow_network([[0, 1], [], [2]], data.colors, spec)
    assert len(net.clusters) == 2  # noqa: PLR2004
    to_color0 = [
        a for a in net.arcs if a.tail == net.cluster_node(0) and a.head > assign.SINK
    ]
    assert to_color0 == [assign.Arc(net.cluster_node(0), net.color_node(0), 1)]


def test_palettes():
    colors = np.array([0, 1, 1, 2, 0])
    pal = assign.palettes([[4, 1, 2], [], [3], [0]], colors, 3)
    assert [c.tolist() for c in pal.clusters] == [[4, 1, 2], [3], [0]]
    assert pal.pairs.tolist() == [[0, 0], [0, 1], [1, 2], [2, 0]]
    empty = assign.palettes([[], []], colors, 3)
    assert empty.clusters == ()
    assert empty.pairs.shape == (0, 2)


def test_extract_reads_used_arcs():
    data = Dataset(np.arange(6.0), np.array([1, 0, 1, 0, 1, 0]), 2)
    spec = FairnessSpec(2, (1, 1), (1, 1))
    net = assign.build_flow_network([[0, 1, 2], [3, 4, 5]], data.colors, spec)
    flow = assign.max_flow_integral(net)
    assert flow.value == 2  # noqa: PLR2004
    picked = assign.extract_assignment(net, flow, data.colors)
    assert sorted(picked.colors.values()) == [0, 1]
    for i, j in picked.colors.items():
        assert flow.on(net.cluster_node(i), net.color_node(j)) == 1
        assert data.colors[picked.points[i]] == j
        assert picked.points[i] == min(
            v for v in net.clusters[i].tolist() if data.colors[v] == j
        )


def test_many_clusters():
    rng = np.random.default_rng(3)
    (n, m, size) = (6000, 4, 5)
    data = Dataset(rng.uniform(0, 100, size=(n, 2)), rng.integers(m, size=n), m)
    clusters = np.arange(n).reshape(-1, size)
    spec = FairnessSpec(40, (10,) * m, (10,) * m)
    start = time.perf_counter()
    sol = assign.assign(data, list(clusters), spec)
    assert time.perf_counter() - start < 5.0  # noqa: PLR2004
    assert isinstance(sol, Solution)
    assert sol.feasible
    assert len({int(v) // size for v in sol.indices}) == spec.k


def test_no_clusters():
    data = Dataset(np.arange(2.0), np.array([0, 1]), 2)
    spec = FairnessSpec(1, (0, 0), (1, 1))
    net = assign.build_flow_network([], data.colors, spec)
    assert net.clusters == ()
    assert assign.max_flow_integral(net).value == 0
    assert not assign.assign(data, [], spec).feasible


def test_short_of_a_color():
    data = Dataset(np.arange(2.0), np.array([0, 0]), 2)
    spec = FairnessSpec(2, (1, 1), (1, 1))
    net = assign.build_flow_network([[0], [1]], data.colors, spec)
    flow = assign.max_flow_integral(net)
    assert flow.value == 1
    result = assign.extract_solution(data, net, flow, spec)
    assert not result.feasible
    assert "max flow 1" in result.reason


def test_choice_between_clusters():
    data = Dataset(np.array([0.0, 1.0, 5.0]), np.array([0, 0, 1]), 2)
    spec = FairnessSpec(2, (0, 1), (1, 1))
    sol = assign.assign(data, [[0], [1], [2]], spec)
    assert isinstance(sol, Solution)
    assert 2 in sol.indices  # noqa: PLR2004
    assert len(set(sol.indices) & {0, 1}) == 1


def test_representative_is_lowest_index():
    data = Dataset(np.arange(5.0), np.array([1, 0, 1, 0, 1]), 2)
    spec = FairnessSpec(2, (1, 1), (1, 1))
    sol = assign.assign(data, [[4, 2, 1], [3]], spec)
    assert isinstance(sol, Solution)
    assert sol.indices == (2, 3)


def test_provenance_passes_through(pair: Dataset):
    prov = assign.Provenance(3, 1, 0, 9)
    sol = assign.assign(pair, [[0], [1]], FairnessSpec(2, (1, 1), (1, 1)), prov)
    assert sol.provenance == prov


@st.composite
def configurations(draw: st.DrawFn):
    m = draw(st.integers(1, 4))
    sizes = draw(st.lists(st.integers(0, 3), min_size=1, max_size=7))
    colors = draw(
        st.lists(st.integers(0, m - 1), min_size=sum(sizes), max_size=sum(sizes))
    )
    assume(colors)
    lower = draw(st.lists(st.integers(0, 2), min_size=m, max_size=m))
    extra = draw(st.lists(st.integers(0, 3), min_size=m, max_size=m))
    upper = [lo + x for lo, x in zip(lower, extra, strict=True)]
    least = max(1, sum(lower))
    assume(least <= sum(upper))
    k = draw(st.integers(least, sum(upper)))
    spec = FairnessSpec(k, tuple(lower), tuple(upper))
    bounds = np.cumsum([0, *sizes])
    clusters = [np.arange(bounds[i], bounds[i + 1]) for i in range(len(sizes))]
    data = Dataset(np.arange(float(len(colors))), np.asarray(colors), m)
    return (data, clusters, spec)


Configuration = tuple[Dataset, list[np.ndarray], FairnessSpec]


@settings(max_examples=200, deadline=None)
@given(configurations())
def test_flow_matches_enumeration(config: Configuration):
    (data, clusters, spec) = config
    net = assign.build_flow_network(clusters, data.colors, spec)
    flow = assign.max_flow_integral(net)
    expected = oracle.exact_assignment_feasible(clusters, data.colors, spec)
    assert (flow.value == spec.k) == expected
    result = assign.assign(data, clusters, spec)
    assert result.feasible == expected
    if isinstance(result, Solution):
        label = {int(u): i for i, c in enumerate(clusters) for u in c}
        assert len({label[u] for u in result.indices}) == spec.k
