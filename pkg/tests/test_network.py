import json
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from npdiffusion.errors import ConfigInvalid, TopologyUnconnectable, TruncationExhausted
from npdiffusion.network import (Graph, InputModel, Message, NoiseModel, Phenomenon, TopologySpec,
                                 generate_topology, sort_messages)
from npdiffusion.tuples import EstimateTuple


def to_nx(g):
    G = nx.Graph()
    G.add_nodes_from(range(g.node_count))
    G.add_edges_from(g.edges())
    return G


def test_two_nodes_large_radius():
    g = generate_topology(TopologySpec("geometric", radius=2.0), 2, np.random.default_rng(0))
    assert g.edges() == [(0, 1)]


def test_geometric_deterministic():
    a = generate_topology(TopologySpec(), 50, np.random.default_rng(2023))
    b = generate_topology(TopologySpec(), 50, np.random.default_rng(2023))
    assert a.adjacency == b.adjacency
    assert np.array_equal(a.positions, b.positions)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2**32 - 1), st.sampled_from(["geometric", "erdos_renyi"]))
def test_generated_graphs_are_connected(n, seed, kind):
    spec = TopologySpec(kind, radius=0.45, p=0.3)
    g = generate_topology(spec, n, np.random.default_rng(seed))
    G = to_nx(g)
    assert nx.is_connected(G)
    for i in range(n):
        assert list(g.neighbors(i)) == sorted(G.neighbors(i))
        assert i not in g.neighbors(i)


def test_geometric_edges_follow_radius():
    g = generate_topology(TopologySpec(radius=0.3), 30, np.random.default_rng(1))
    pos = g.positions
    for i in range(30):
        for j in range(i + 1, 30):
            assert g.has_edge(i, j) == (math.dist(pos[i], pos[j]) <= 0.3)


def test_unconnectable():
    with pytest.raises(TopologyUnconnectable):
        generate_topology(TopologySpec(radius=0.01, max_attempts=5), 30, np.random.default_rng(0))
    with pytest.raises(TopologyUnconnectable):
        generate_topology(TopologySpec("edges", edges=((0, 1),)), 3, np.random.default_rng(0))


def test_fixed_shapes():
    star = generate_topology(TopologySpec("star"), 5, None)
    assert star.degree(0) == 4 and all(star.degree(k) == 1 for k in range(1, 5))
    path = generate_topology(TopologySpec("path"), 4, None)
    assert path.edge_list_text() == "0 1\n1 2\n2 3\n"


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph(2, ((1,), ()))
    with pytest.raises(ValueError):
        Graph(1, ((0,),))
    with pytest.raises(ValueError):
        Graph.from_edges(2, [(1, 1)])


def test_phenomenon_values_and_slope():
    m = Phenomenon()
    assert m(0.0) == 3.0
    assert m(1.0) == pytest.approx(math.sin(1.0) * math.exp(-0.2) + 3.0, rel=1e-15)
    # the derivative at 0 is exactly one, the largest slope on [0, 10]
    assert m.max_slope((0.0, 10.0)) <= 1.0
    m.check_lipschitz((0.0, 10.0), 1.0)
    with pytest.raises(ConfigInvalid):
        m.check_lipschitz((0.0, 10.0), 0.9)


def test_tabulated_phenomenon():
    m = Phenomenon("tabulated", points=((0.0, 0.0), (1.0, 0.5), (2.0, 0.0)))
    assert m(0.5) == 0.25
    assert m.max_slope((0, 2)) == 0.5
    with pytest.raises(ConfigInvalid):
        Phenomenon("tabulated", points=((1.0, 0.0), (0.0, 0.0))).check_lipschitz((0, 1), 1.0)


def test_degenerate_input():
    assert InputModel(3.0, 0.0).draw(np.random.default_rng(0), (0, 10)) == 3.0
    with pytest.raises(TruncationExhausted):
        InputModel(30.0, 0.0).draw(np.random.default_rng(0), (0, 10))


def test_truncation_exhausted():
    with pytest.raises(TruncationExhausted):
        InputModel(1000.0, 1.0).draw(np.random.default_rng(0), (0, 10))


def test_truncated_inputs_inside_domain():
    rng = np.random.default_rng(4)
    model = InputModel(9.5, 2.0)
    assert all(0 <= model.draw(rng, (0, 10)) <= 10 for _ in range(2000))


def test_gaussian_noise_mean():
    rng = np.random.default_rng(8)
    sigma = 0.7
    model = NoiseModel("gaussian", sigma)
    draws = np.fromiter((model.draw(rng) for _ in range(1_000_000)), dtype=float)
    assert abs(draws.mean()) <= 5 * sigma / 1e3


def test_uniform_noise_bounds_and_proxy():
    n = NoiseModel("uniform_bounded", 2.0)
    rng = np.random.default_rng(1)
    draws = [n.draw(rng) for _ in range(10_000)]
    assert all(-1.0 <= d <= 1.0 for d in draws)
    assert n.variance_proxy ** 2 == 1.0  # (b - a)^2 / 4
    assert NoiseModel("gaussian", 0.3).variance_proxy == 0.3
    with pytest.raises(ValueError):
        NoiseModel("gaussian", 0.0)


def test_message_shape_and_order():
    t = EstimateTuple(1.0, 2.0, 0.5, 3, 7)
    share = Message("share", 2, 1, 7, tuple=t)
    req = Message("request", 2, 1, 7, xi_req=4.0)
    early = Message("request", 5, 0, 6, xi_req=1.0)
    assert share.delivery_round == 8
    assert sort_messages([share, req, early]) == [early, req, share]
    rec = share.to_record()
    assert set(rec) == {"kind", "from", "to", "send_round", "payload"}
    assert set(rec["payload"]) == {"xi", "mu_hat", "beta", "origin", "created_at"}
    json.dumps(rec)
    with pytest.raises(ValueError):
        Message("request", 0, 1, 0)
    with pytest.raises(ValueError):
        Message("share", 0, 1, 0, xi_req=1.0)
    with pytest.raises(ValueError):
        Message("gossip", 0, 1, 0)
