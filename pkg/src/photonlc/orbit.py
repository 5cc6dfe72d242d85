"""Local-complementation orbits: brute force, sampling, the RGS enumerator, classes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .circuit import CostReport
from .graph_io import from_graph6, to_graph6
from .graphs import (
    Graph,
    GraphError,
    apply_lc_sequence,
    canonical_label,
    graph_from_canonical,
    iter_bits,
    local_complement,
    make_rgs,
)

LcSequence = tuple[int, ...]

DEFAULT_ORBIT_CAP = 1_000_000
CLASS_MAX_NODES = 7


class OrbitCapExceeded(RuntimeError):
    def __init__(self, cap: int) -> None:
        super().__init__(f"orbit exceeds the cap of {cap} graphs")
        self.cap = cap


@dataclass(frozen=True)
class OrbitRecord:
    graph: Graph
    lc_sequence: LcSequence
    costs: dict[str, CostReport] = field(default_factory=dict, compare=False)

    def replay(self, seed: Graph) -> Graph:
        return apply_lc_sequence(seed, self.lc_sequence)


def _pack(rows: tuple[int, ...], n: int) -> int:
    key = 0
    for i, r in enumerate(rows):
        key |= r << (i * n)
    return key


def _unpack(key: int, n: int) -> tuple[int, ...]:
    mask = (1 << n) - 1
    return tuple((key >> (i * n)) & mask for i in range(n))


def _lc_rows(rows: tuple[int, ...], v: int) -> tuple[int, ...]:
    nb = rows[v]
    out = list(rows)
    for u in iter_bits(nb):
        out[u] ^= nb ^ (1 << u)
    return tuple(out)


class OrbitTable:
    """Breadth-first LC closure stored as packed adjacency keys with parent links.

    Witness sequences are rebuilt on demand from the parent chain, so large
    orbits cost one int per member plus two small ints of bookkeeping.
    """

    def __init__(self, seed: Graph, cap: int = DEFAULT_ORBIT_CAP) -> None:
        if cap <= 0:
            raise ValueError("cap must be positive")
        n = seed.n
        self.seed = seed
        self.keys: list[int] = [_pack(seed.rows, n)]
        self.parent: list[int] = [-1]
        self.node: list[int] = [-1]
        index = {self.keys[0]: 0}
        head = 0
        while head < len(self.keys):
            rows = _unpack(self.keys[head], n)
            for v in range(n):
                nb = rows[v]
                if nb & (nb - 1) == 0:
                    continue  # degree <= 1: LC is the identity
                key = _pack(_lc_rows(rows, v), n)
                if key not in index:
                    if len(self.keys) >= cap:
                        raise OrbitCapExceeded(cap)
                    index[key] = len(self.keys)
                    self.keys.append(key)
                    self.parent.append(head)
                    self.node.append(v)
            head += 1

    def __len__(self) -> int:
        return len(self.keys)

    def graph(self, i: int) -> Graph:
        return Graph._trusted(self.seed.n, _unpack(self.keys[i], self.seed.n))

    def edge_count(self, i: int) -> int:
        return self.keys[i].bit_count() // 2

    def witness(self, i: int) -> LcSequence:
        seq = []
        while self.parent[i] >= 0:
            seq.append(self.node[i])
            i = self.parent[i]
        return tuple(reversed(seq))

    def record(self, i: int) -> OrbitRecord:
        return OrbitRecord(self.graph(i), self.witness(i))

    def records(self) -> Iterator[OrbitRecord]:
        for i in range(len(self)):
            yield self.record(i)


def orbit_bfs(seed: Graph, cap: int = DEFAULT_ORBIT_CAP) -> list[OrbitRecord]:
    """All labeled graphs LC-reachable from ``seed``, seed first, BFS order."""
    return list(OrbitTable(seed, cap).records())


def orbit_sample(
    seed: Graph, k: int, walk_len: int, rng: np.random.Generator
) -> list[OrbitRecord]:
    """``k`` independent uniform random LC walks; distinct end points in first-seen order."""
    if k <= 0 or walk_len < 0:
        raise ValueError("k must be positive and walk_len nonnegative")
    steps = rng.integers(0, seed.n, size=(k, walk_len))
    seen: dict[tuple[int, ...], OrbitRecord] = {}
    for walk in steps:
        rows = seed.rows
        for v in walk:
            rows = _lc_rows(rows, int(v))
        if rows not in seen:
            seen[rows] = OrbitRecord(Graph._trusted(seed.n, rows), tuple(int(v) for v in walk))
    return list(seen.values())


# ---------------------------------------------------------------------------
# repeater graph states


def rgs_orbit_enumerate(m: int) -> list[OrbitRecord]:
    """Walk the cores in order, LC-ing each and branching off one closing LC per pair of cores.

    Returns records in insertion order (duplicates removed, first kept). The
    result covers every isomorphism class of the RGS orbit, not every
    labeled member.
    """
    if m < 2:
        raise GraphError("a repeater graph needs at least 2 arms")
    g0 = make_rgs(m)
    out: list[OrbitRecord] = []
    seen: set[tuple[int, ...]] = set()

    def add(seq: LcSequence) -> Graph:
        g = apply_lc_sequence(g0, seq)
        if g.rows not in seen:
            seen.add(g.rows)
            out.append(OrbitRecord(g, seq))
        return g

    add(())
    cores = list(range(1, 2 * m, 2))
    i = cores.pop(0)
    g_seq: LcSequence = (i,)
    add(g_seq)
    while cores:
        j = cores.pop(0)
        g1_seq = g_seq + (j,)
        add(g1_seq)
        add(g1_seq + (i,))
        if cores:
            k = cores.pop(0)
            g3_seq = g1_seq + (k,)
            add(g3_seq)
            g_seq = g3_seq
    return out


def rgs_correlated_sequence(m: int, j: int) -> LcSequence:
    """LC sequence of the ``j``-th graph on the linear-cost branch of the RGS orbit."""
    if m < 2:
        raise GraphError("a repeater graph needs at least 2 arms")
    if not 0 <= j <= (m - 1) // 2:
        raise ValueError(f"step j={j} out of range 0..{(m - 1) // 2} for m={m}")
    if j == 0:
        return ()
    return tuple(range(1, 4 * j, 2)) + (1,)


def rgs_best_sequence(m: int) -> LcSequence:
    """LC sequence reaching the fewest-CNOT RGS shape (odd vs even arm count)."""
    if m < 2:
        raise GraphError("a repeater graph needs at least 2 arms")
    n = 2 * m
    if m % 2:
        return tuple(range(1, n, 2))
    return tuple(range(1, n - 2, 2)) + (n - 2,)


# ---------------------------------------------------------------------------
# entanglement classes


@dataclass(frozen=True)
class EntanglementClass:
    class_id: int
    n: int
    representative: Graph
    labeled_count: int


@dataclass(frozen=True)
class ClassPartition:
    classes: list[EntanglementClass]
    # per node count: codes of labeled connected graphs and their class ids
    codes: dict[int, np.ndarray]
    labels: dict[int, np.ndarray]

    @property
    def labeled_total(self) -> int:
        return sum(c.labeled_count for c in self.classes)

    def members(self, class_id: int) -> Iterator[Graph]:
        cls = self.classes[class_id]
        n = cls.n
        for code in self.codes[n][self.labels[n] == class_id]:
            yield graph_from_code(int(code), n)


def _pairs(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


def graph_from_code(code: int, n: int) -> Graph:
    """Labeled graph whose upper-triangle pair ``k`` (lexicographic) is bit ``k`` of ``code``."""
    edges = [p for k, p in enumerate(_pairs(n)) if (code >> k) & 1]
    return Graph.from_edges(n, edges)


def code_of_graph(g: Graph) -> int:
    return sum(1 << k for k, (i, j) in enumerate(_pairs(g.n)) if (g.rows[i] >> j) & 1)


def _pair_index(n: int) -> dict[tuple[int, int], int]:
    return {p: k for k, p in enumerate(_pairs(n))}


def _bit(codes: np.ndarray, k: int) -> np.ndarray:
    return (codes >> np.uint32(k)) & np.uint32(1)


def _connected_mask(codes: np.ndarray, n: int) -> np.ndarray:
    idx = _pair_index(n)
    adj = []
    for a in range(n):
        row = np.zeros_like(codes)
        for b in range(n):
            if a != b:
                row |= _bit(codes, idx[min(a, b), max(a, b)]) << np.uint32(b)
        adj.append(row)
    reach = np.ones_like(codes)
    for _ in range(n):
        nxt = reach.copy()
        for a in range(n):
            has = (reach >> np.uint32(a)) & np.uint32(1)
            nxt |= adj[a] * has
        reach = nxt
    return reach == np.uint32((1 << n) - 1)


def _permute_codes(codes: np.ndarray, n: int, perm: tuple[int, ...]) -> np.ndarray:
    idx = _pair_index(n)
    out = np.zeros_like(codes)
    for (i, j), k in idx.items():
        a, b = perm[i], perm[j]
        out |= _bit(codes, k) << np.uint32(idx[min(a, b), max(a, b)])
    return out


def _lc_codes(codes: np.ndarray, n: int, v: int) -> np.ndarray:
    idx = _pair_index(n)
    nb = {u: _bit(codes, idx[min(u, v), max(u, v)]) for u in range(n) if u != v}
    out = codes.copy()
    for a, b in itertools.combinations(sorted(nb), 2):
        out ^= (nb[a] & nb[b]) << np.uint32(idx[a, b])
    return out


def _classes_for_n(n: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Labeled connected graphs on ``n`` nodes and their class labels (0-based)."""
    width = n * (n - 1) // 2
    all_codes = np.arange(1 << width, dtype=np.uint32)
    codes = all_codes[_connected_mask(all_codes, n)]
    if n == 1:
        codes = np.zeros(1, dtype=np.uint32)
    position = np.full(1 << width, -1, dtype=np.int64)
    position[codes] = np.arange(codes.size)
    rows, cols = [], []
    moves = [tuple(range(k)) + (k + 1, k) + tuple(range(k + 2, n)) for k in range(n - 1)]
    for perm in moves:
        rows.append(np.arange(codes.size))
        cols.append(position[_permute_codes(codes, n, perm)])
    for v in range(n):
        rows.append(np.arange(codes.size))
        cols.append(position[_lc_codes(codes, n, v)])
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    assert (c >= 0).all(), "LC or relabeling left the connected set"
    adj = coo_matrix((np.ones(r.size, dtype=np.int8), (r, c)), shape=(codes.size, codes.size))
    k, labels = connected_components(adj, directed=False)
    return codes, labels, k


def entanglement_classes(n_max: int, n_min: int = 2) -> ClassPartition:
    """Partition all labeled connected graphs on ``n_min..n_max`` nodes into classes.

    Two graphs share a class iff one maps to the other by local
    complementations and a relabeling. Adjacent transpositions generate all
    relabelings, so the classes are the connected components of the move
    graph whose edges are single LCs and single adjacent swaps.
    """
    if n_max > CLASS_MAX_NODES:
        raise ValueError(f"class enumeration is exhaustive and capped at n={CLASS_MAX_NODES}")
    if n_min < 1 or n_min > n_max:
        raise ValueError("need 1 <= n_min <= n_max")
    classes: list[EntanglementClass] = []
    codes_by_n: dict[int, np.ndarray] = {}
    labels_by_n: dict[int, np.ndarray] = {}
    for n in range(n_min, n_max + 1):
        codes, labels, k = _classes_for_n(n)
        # deterministic class order: by canonical label of each class's smallest code
        firsts = np.full(k, np.iinfo(np.int64).max, dtype=np.int64)
        np.minimum.at(firsts, labels, codes.astype(np.int64))
        counts = np.bincount(labels, minlength=k)
        keyed = []
        for c in range(k):
            rep = graph_from_canonical(canonical_label(graph_from_code(int(firsts[c]), n)))
            keyed.append((canonical_label(rep), c, rep))
        keyed.sort(key=lambda t: t[0])
        remap = np.empty(k, dtype=np.int64)
        for new_local, (_, c, rep) in enumerate(keyed):
            remap[c] = len(classes)
            classes.append(EntanglementClass(len(classes), n, rep, int(counts[c])))
        codes_by_n[n] = codes
        labels_by_n[n] = remap[labels]
    return ClassPartition(classes, codes_by_n, labels_by_n)


# ---------------------------------------------------------------------------
# orbit dump: one graph6 string and its witness per line


def format_orbit_dump(records: Iterable[OrbitRecord]) -> str:
    lines = []
    for rec in records:
        witness = ",".join(str(v) for v in rec.lc_sequence) or "-"
        lines.append(f"{to_graph6(rec.graph)} {witness}")
    return "\n".join(lines) + "\n"


def parse_orbit_dump(text: str) -> list[OrbitRecord]:
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected '<graph6> <witness>'")
        seq = () if parts[1] == "-" else tuple(int(v) for v in parts[1].split(","))
        out.append(OrbitRecord(from_graph6(parts[0]), seq))
    return out
