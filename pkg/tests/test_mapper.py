import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photonlc.circuit import Circuit, CnotEE, Emission, MeasureZ, Unitary1Q, cost_report
from photonlc.graphs import Graph, erdos_renyi, is_connected, make_rgs
from photonlc.mapper import MapperError, height_profile, map_to_circuit, min_emitters, verify_circuit
from oracles import graph_state, schmidt_rank_log2
from strategies import graphs

K2 = Graph.complete(2)


def star(n, center=0):
    return Graph.from_edges(n, [(center, v) for v in range(n) if v != center])


def all_connected(n):
    pairs = list(itertools.combinations(range(n), 2))
    for code in range(1 << len(pairs)):
        g = Graph.from_edges(n, [p for k, p in enumerate(pairs) if code >> k & 1])
        if is_connected(g):
            yield g


def test_height_examples():
    assert height_profile(star(6)) == [0, 1, 1, 1, 1, 1, 0]
    path = Graph.from_edges(7, [(i, i + 1) for i in range(6)])
    assert max(height_profile(path)) == 1
    for m in range(3, 12):
        assert max(height_profile(make_rgs(m))) == 2


@settings(max_examples=300)
@given(graphs(max_n=12))
def test_height_profile_shape(g):
    h = height_profile(g)
    assert len(h) == g.n + 1 and h[0] == h[-1] == 0
    assert all(abs(a - b) <= 1 for a, b in zip(h, h[1:]))


def test_height_matches_schmidt_rank():
    rng = np.random.default_rng(4)
    for _ in range(40):
        g = erdos_renyi(int(rng.integers(2, 9)), float(rng.random()), rng)
        psi = graph_state(g)
        assert height_profile(g) == [schmidt_rank_log2(psi, g.n, x) for x in range(g.n + 1)]


def test_single_node():
    c = map_to_circuit(Graph.empty(1))
    assert c.n_emitters == 1 and cost_report(c).ee_cnots == 0
    assert verify_circuit(c, Graph.empty(1))


def test_k2():
    c = map_to_circuit(K2)
    assert c.n_emitters == 1 and verify_circuit(c, K2)


def test_rgs_eight_photons():
    c = map_to_circuit(make_rgs(4))
    assert c.n_emitters == 2
    assert cost_report(c).ee_cnots == 5


def test_verify_rejects_wrong_graph():
    c = map_to_circuit(K2)
    assert not verify_circuit(c, Graph.empty(2))
    with pytest.raises(ValueError):
        verify_circuit(c, Graph.from_edges(3, [(0, 1), (1, 2)]))


def test_hand_built_k2_circuit():
    # GHZ on (emitter, p0, p1), measure the emitter in X, then H on p1
    c = Circuit(
        2, 1,
        (
            Unitary1Q(2, "H"),
            Emission(0, 0),
            Emission(0, 1),
            Unitary1Q(2, "H"),
            MeasureZ(0, ((0, "Z"),)),
            Unitary1Q(1, "H"),
        ),
    )
    assert verify_circuit(c, K2)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_mapper_oracle_small_connected(n):
    for g in all_connected(n):
        c = map_to_circuit(g)
        assert c.n_emitters == max(height_profile(g))


def test_emitter_minimality_n_le_4():
    """No circuit with fewer emitters exists: every emitted-prefix cut carries
    log2(Schmidt rank) ebits, and all of it must sit in the emitters at that time.
    The Schmidt ranks come from dense state vectors, not from the GF(2) code."""
    for n in range(2, 5):
        for g in all_connected(n):
            for order in itertools.permutations(range(n)):
                h = g.relabel(order)
                psi = graph_state(h)
                lower = max(schmidt_rank_log2(psi, n, x) for x in range(n + 1))
                c = map_to_circuit(h)
                assert c.n_emitters == lower
                if lower > 1:
                    with pytest.raises(MapperError):
                        map_to_circuit(h, n_emitters=lower - 1)


@settings(max_examples=150)
@given(graphs(max_n=8), st.randoms(use_true_random=False))
def test_mapper_random_orders(g, rnd):
    order = list(range(g.n))
    rnd.shuffle(order)
    h = g.relabel(order)
    c = map_to_circuit(h, verify=False)
    assert verify_circuit(c, h)
    if is_connected(h):
        assert c.n_emitters == min_emitters(h)
    for op in c.ops:
        assert not isinstance(op, CnotEE) or op.control != op.target


def test_disconnected_graph():
    g = Graph.from_edges(6, [(0, 3), (1, 4), (2, 5)])
    c = map_to_circuit(g)
    assert verify_circuit(c, g)


def test_order_sensitivity():
    g = make_rgs(3)
    counts = {cost_report(map_to_circuit(g.relabel(o), verify=False)).ee_cnots for o in itertools.permutations(range(6))}
    assert len(counts) > 1


def test_determinism():
    g = erdos_renyi(10, 0.6, 8)
    assert map_to_circuit(g).dumps() == map_to_circuit(g).dumps()


def test_dense_graphs_from_deep_orbits():
    from photonlc.orbit import orbit_sample

    rng = np.random.default_rng(1)
    for s in range(3):
        g = erdos_renyi(25, 0.95, s)
        for rec in orbit_sample(g, 10, 25, rng):
            assert verify_circuit(map_to_circuit(rec.graph, verify=False), rec.graph)
