"""Labeled simple graphs stored as GF(2) adjacency rows.

Node ``i`` is the ``i``-th emitted photon, so a relabeling of the nodes is a
change of emission order. Every row of the adjacency matrix is kept as a
Python ``int`` bitmask; bit ``j`` of ``rows[i]`` is the edge ``i-j``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

MAX_NODES = 1024
CANONICAL_MAX_NODES = 8


class GraphError(ValueError):
    """Invalid graph construction or node index."""


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the indices of set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class Graph:
    """Immutable labeled simple graph on nodes ``0..n-1``."""

    n: int
    rows: tuple[int, ...]

    def __post_init__(self) -> None:
        if not 0 < self.n <= MAX_NODES:
            raise GraphError(f"node count must be in 1..{MAX_NODES}, got {self.n}")
        if len(self.rows) != self.n:
            raise GraphError("row count does not match node count")
        full = (1 << self.n) - 1
        for i, r in enumerate(self.rows):
            if r & ~full:
                raise GraphError(f"row {i} references nodes >= n")
            if (r >> i) & 1:
                raise GraphError(f"self-loop at node {i}")
            for j in iter_bits(r):
                if not (self.rows[j] >> i) & 1:
                    raise GraphError(f"adjacency not symmetric at ({i}, {j})")

    @classmethod
    def _trusted(cls, n: int, rows: tuple[int, ...]) -> "Graph":
        # skips validation; callers guarantee symmetry and a zero diagonal
        g = object.__new__(cls)
        object.__setattr__(g, "n", n)
        object.__setattr__(g, "rows", rows)
        return g

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        rows = [0] * n
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return cls(n, tuple(rows))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, (0,) * n)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        full = (1 << n) - 1
        return cls(n, tuple(full ^ (1 << i) for i in range(n)))

    @classmethod
    def from_adjacency(cls, matrix) -> "Graph":
        a = np.asarray(matrix, dtype=bool)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise GraphError("adjacency matrix must be square")
        if not np.array_equal(a, a.T):
            raise GraphError("adjacency matrix must be symmetric")
        if a.diagonal().any():
            raise GraphError("adjacency matrix has self-loops")
        rows = tuple(sum(1 << int(j) for j in np.flatnonzero(a[i])) for i in range(a.shape[0]))
        return cls(a.shape[0], rows)

    def to_adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.uint8)
        for i, r in enumerate(self.rows):
            for j in iter_bits(r):
                a[i, j] = 1
        return a

    def neighbors(self, v: int) -> list[int]:
        self._check_node(v)
        return list(iter_bits(self.rows[v]))

    def degree(self, v: int) -> int:
        self._check_node(v)
        return self.rows[v].bit_count()

    def has_edge(self, u: int, v: int) -> bool:
        self._check_node(u)
        self._check_node(v)
        return bool((self.rows[u] >> v) & 1)

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, r in enumerate(self.rows) for j in iter_bits(r >> (i + 1) << (i + 1))]

    def edge_count(self) -> int:
        return sum(r.bit_count() for r in self.rows) // 2

    def relabel(self, order: Sequence[int]) -> "Graph":
        """Return the graph whose node ``k`` is node ``order[k]`` of ``self``.

        ``order`` lists the old node labels in their new emission order.
        """
        if sorted(order) != list(range(self.n)):
            raise GraphError("order must be a permutation of the node labels")
        new_of_old = [0] * self.n
        for new, old in enumerate(order):
            new_of_old[old] = new
        rows = []
        for old in order:
            r = 0
            for j in iter_bits(self.rows[old]):
                r |= 1 << new_of_old[j]
            rows.append(r)
        return Graph(self.n, tuple(rows))

    def _check_node(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise GraphError(f"node {v} out of range for n={self.n}")

    def __str__(self) -> str:
        return f"Graph(n={self.n}, edges={self.edges()})"


def local_complement(g: Graph, v: int) -> Graph:
    """Complement the subgraph induced on the neighbourhood of ``v``."""
    g._check_node(v)
    nb = g.rows[v]
    rows = list(g.rows)
    for u in iter_bits(nb):
        rows[u] ^= nb ^ (1 << u)
    return Graph._trusted(g.n, tuple(rows))


def apply_lc_sequence(g: Graph, nodes: Iterable[int]) -> Graph:
    for v in nodes:
        g = local_complement(g, v)
    return g


def make_rgs(arms: int) -> Graph:
    """Repeater graph state with ``arms`` core nodes on the odd labels.

    Leaf ``2k`` hangs off core ``2k + 1``; the cores form a clique.
    """
    if arms < 2:
        raise GraphError("a repeater graph needs at least 2 arms")
    n = 2 * arms
    edges = [(2 * k, 2 * k + 1) for k in range(arms)]
    cores = range(1, n, 2)
    edges += list(itertools.combinations(cores, 2))
    return Graph.from_edges(n, edges)


def erdos_renyi(n: int, p: float, seed: int | np.random.Generator | None) -> Graph:
    """G(n, p) with pairs visited in lexicographic order; seeded."""
    if not 0.0 <= p <= 1.0:
        raise GraphError(f"edge probability must lie in [0, 1], got {p}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    draws = rng.random(iu.size)
    keep = draws < p
    return Graph.from_edges(n, zip(iu[keep].tolist(), ju[keep].tolist()))


def clustering_coefficient(g: Graph, v: int) -> Fraction:
    g._check_node(v)
    nb = g.rows[v]
    deg = nb.bit_count()
    if deg <= 1:
        return Fraction(0)
    inside = sum((g.rows[u] & nb).bit_count() for u in iter_bits(nb)) // 2
    return Fraction(inside, deg * (deg - 1) // 2)


def is_connected(g: Graph) -> bool:
    seen = 1
    frontier = 1
    while frontier:
        nxt = 0
        for u in iter_bits(frontier):
            nxt |= g.rows[u]
        frontier = nxt & ~seen
        seen |= frontier
    return seen == (1 << g.n) - 1


def connected_components(g: Graph) -> list[list[int]]:
    remaining = (1 << g.n) - 1
    comps = []
    while remaining:
        start = remaining & -remaining
        seen = frontier = start
        while frontier:
            nxt = 0
            for u in iter_bits(frontier):
                nxt |= g.rows[u]
            frontier = nxt & ~seen
            seen |= frontier
        comps.append(list(iter_bits(seen)))
        remaining &= ~seen
    return comps


@lru_cache(maxsize=None)
def _perm_table(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.int8).reshape(-1, n)


def canonical_label(g: Graph) -> bytes:
    """Isomorphism-invariant key by exhaustive relabeling.

    The key is the node count followed by the lexicographically smallest
    upper-triangle bit string (row-major, ``i < j``) over all ``n!``
    relabelings.
    """
    n = g.n
    if n > CANONICAL_MAX_NODES:
        raise GraphError(f"canonical_label is brute force and capped at n={CANONICAL_MAX_NODES}")
    iu, ju = np.triu_indices(n, k=1)
    width = iu.size
    if width == 0:
        return bytes([n])
    adj = g.to_adjacency().astype(np.uint64)
    perms = _perm_table(n)
    bits = adj[perms[:, iu], perms[:, ju]]
    weights = np.left_shift(np.uint64(1), np.arange(width - 1, -1, -1, dtype=np.uint64))
    codes = bits @ weights
    best = int(codes.min())
    return bytes([n]) + best.to_bytes((width + 7) // 8, "big")


def graph_from_canonical(key: bytes) -> Graph:
    """Rebuild the canonical representative encoded by ``canonical_label``."""
    n = key[0]
    iu, ju = np.triu_indices(n, k=1)
    width = iu.size
    code = int.from_bytes(key[1:], "big") if width else 0
    edges = [
        (int(i), int(j))
        for k, (i, j) in enumerate(zip(iu, ju))
        if (code >> (width - 1 - k)) & 1
    ]
    return Graph.from_edges(n, edges)
