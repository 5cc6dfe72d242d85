import json

import pytest
from hypothesis import given, settings

from photonlc.graph_io import (
    GraphFormatError,
    dumps_edge_document,
    from_edge_document,
    from_graph6,
    loads_graph,
    to_edge_document,
    to_graph6,
)
from photonlc.graphs import Graph, erdos_renyi
from strategies import graphs


def test_round_trip_random_graphs():
    for s in range(100):
        g = erdos_renyi(1 + s % 40, (s % 10) / 10, s)
        assert from_graph6(to_graph6(g)) == g
        assert loads_graph(dumps_edge_document(g)) == g


@settings(max_examples=200)
@given(graphs(max_n=20))
def test_round_trip_property(g):
    assert from_graph6(to_graph6(g)) == g
    assert from_edge_document(json.loads(json.dumps(to_edge_document(g)))) == g


def test_single_node():
    g = Graph.empty(1)
    assert from_graph6(to_graph6(g)) == g
    assert loads_graph(to_graph6(g)).edge_count() == 0


def test_header_accepted():
    g = Graph.complete(4)
    assert from_graph6(to_graph6(g, header=True)) == g


@pytest.mark.parametrize(
    "doc",
    [
        {"n": 3, "edges": [[1, 1]]},
        {"n": 3, "edges": [[0, 3]]},
        {"n": 0, "edges": []},
        {"edges": []},
        {"n": 2, "edges": [[0]]},
        {"n": "2", "edges": []},
    ],
)
def test_bad_edge_documents(doc):
    with pytest.raises(GraphFormatError):
        from_edge_document(doc)


@pytest.mark.parametrize("text", ["", "E?", "~~~", "{not json"])
def test_bad_strings(text):
    with pytest.raises(GraphFormatError):
        loads_graph(text)
