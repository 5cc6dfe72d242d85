"""graph6 strings and JSON edge-list documents."""

from __future__ import annotations

import json
from typing import Any

import networkx as nx

from .graphs import Graph, GraphError


class GraphFormatError(GraphError):
    """Malformed serialized graph."""


def to_graph6(g: Graph, header: bool = False) -> str:
    nxg = nx.Graph()
    nxg.add_nodes_from(range(g.n))
    nxg.add_edges_from(g.edges())
    return nx.to_graph6_bytes(nxg, nodes=list(range(g.n)), header=header).decode("ascii").strip()


def from_graph6(text: str) -> Graph:
    data = text.strip().encode("ascii")
    try:
        nxg = nx.from_graph6_bytes(data)
    except (nx.NetworkXError, ValueError, IndexError) as exc:
        raise GraphFormatError(f"malformed graph6 string {text!r}: {exc}") from exc
    if nxg.number_of_nodes() == 0:
        raise GraphFormatError("graph6 string encodes an empty node set")
    return Graph.from_edges(nxg.number_of_nodes(), nxg.edges())


def to_edge_document(g: Graph) -> dict[str, Any]:
    return {"n": g.n, "edges": [list(e) for e in g.edges()]}


def from_edge_document(doc: dict[str, Any]) -> Graph:
    try:
        n = doc["n"]
        edges = doc["edges"]
    except (KeyError, TypeError) as exc:
        raise GraphFormatError("edge-list document needs 'n' and 'edges'") from exc
    if not isinstance(n, int) or isinstance(n, bool) or n <= 0:
        raise GraphFormatError(f"'n' must be a positive integer, got {n!r}")
    pairs = []
    for e in edges:
        if not isinstance(e, (list, tuple)) or len(e) != 2 or not all(isinstance(x, int) for x in e):
            raise GraphFormatError(f"edge entry {e!r} is not a pair of integers")
        u, v = e
        if u == v:
            raise GraphFormatError(f"self-loop at node {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"edge {e!r} references a node outside 0..{n - 1}")
        pairs.append((u, v))
    return Graph.from_edges(n, pairs)


def dumps_edge_document(g: Graph) -> str:
    return json.dumps(to_edge_document(g))


def loads_graph(text: str) -> Graph:
    """Parse either a JSON edge-list document or a graph6 string."""
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise GraphFormatError(f"invalid JSON edge-list document: {exc}") from exc
        return from_edge_document(doc)
    return from_graph6(stripped)
