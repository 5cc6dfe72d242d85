"""Cost-driven search over LC orbits and emission orders."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

from .circuit import METRICS, Circuit, CostReport, Unitary1Q, cost_report
from .graph_io import to_edge_document
from .graphs import Graph, apply_lc_sequence, iter_bits, local_complement, make_rgs
from .mapper import map_to_circuit
from .orbit import DEFAULT_ORBIT_CAP, OrbitRecord, OrbitTable, orbit_sample, rgs_best_sequence
from .stabilizer import (
    CliffordGate,
    Clifford1Q,
    clifford_word,
    lc_unitary_gates,
)

ORDER_ENUMERATION_MAX_N = 7
DEFAULT_ORDER_SAMPLES = 200

Mapper = Callable[[Graph], Circuit]


@dataclass(frozen=True)
class CostFunction:
    """Lexicographic objective list, or a weighted sum when ``weights`` is given."""

    objectives: tuple[str, ...] = ("n_emitters", "ee_cnots", "emitter_depth", "unitary_count")
    weights: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not self.objectives:
            raise ValueError("a cost function needs at least one objective")
        for name in self.objectives:
            if name not in METRICS:
                raise ValueError(f"unknown metric {name!r}; choose from {', '.join(METRICS)}")
        if self.weights is not None:
            if len(self.weights) != len(self.objectives):
                raise ValueError("one weight per objective")
            if any(w < 0 for w in self.weights):
                raise ValueError("weights must be nonnegative")

    def key(self, report: CostReport) -> tuple[float, ...]:
        values = [getattr(report, name) for name in self.objectives]
        if self.weights is None:
            return tuple(values)
        return (sum(w * v for w, v in zip(self.weights, values)),)

    @classmethod
    def parse(cls, text: str) -> "CostFunction":
        """``"ee_cnots"``, ``"ee_cnots,unitary_count"`` (lexicographic) or ``"ee_cnots=1,unitary_count=0.5"``."""
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if not parts:
            raise ValueError("empty cost specification")
        if any("=" in p for p in parts):
            names, weights = [], []
            for p in parts:
                name, _, w = p.partition("=")
                try:
                    weights.append(float(w))
                except ValueError:
                    raise ValueError(f"bad weight in {p!r}") from None
                names.append(name.strip())
            return cls(tuple(names), tuple(weights))
        return cls(tuple(parts))

    def describe(self) -> str:
        if self.weights is None:
            return ",".join(self.objectives)
        return ",".join(f"{n}={w:g}" for n, w in zip(self.objectives, self.weights))


DEFAULT_COST = CostFunction()


@dataclass(frozen=True)
class OptimizationResult:
    record: OrbitRecord
    order: tuple[int, ...]
    circuit: Circuit
    report: CostReport
    baseline: CostReport
    evaluated: int = 0
    notes: tuple[str, ...] = ()

    @property
    def graph(self) -> Graph:
        """The orbit member relabeled into the chosen emission order."""
        return self.record.graph.relabel(self.order)

    def to_document(self, seed_graph: Graph, cost: CostFunction, seed: int | None = None) -> dict[str, Any]:
        return {
            "seed": seed,
            "cost": cost.describe(),
            "input": to_edge_document(seed_graph),
            "witness": list(self.record.lc_sequence),
            "order": list(self.order),
            "before": self.baseline.as_dict(),
            "after": self.report.as_dict(),
            "evaluated": self.evaluated,
            "notes": list(self.notes),
            "circuit": self.circuit.to_document(),
        }


def _tie_key(cost: CostFunction, report: CostReport, witness: Sequence[int], order: Sequence[int]) -> tuple:
    return (cost.key(report), report.ee_cnots, report.emitter_depth, tuple(witness), tuple(order))


def _orders(n: int, max_n: int, samples: int, rng: np.random.Generator | None) -> list[tuple[int, ...]]:
    identity = tuple(range(n))
    if n <= max_n:
        return list(itertools.permutations(range(n)))
    if rng is None:
        raise ValueError(f"n={n} exceeds the full-ordering cap {max_n}; pass rng to sample orders")
    out = [identity]
    seen = {identity}
    for _ in range(samples - 1):
        p = tuple(int(v) for v in rng.permutation(n))
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def optimize_exhaustive(
    g: Graph,
    cost: CostFunction = DEFAULT_COST,
    orbit_cap: int = DEFAULT_ORBIT_CAP,
    max_order_n: int = ORDER_ENUMERATION_MAX_N,
    order_samples: int = DEFAULT_ORDER_SAMPLES,
    rng: np.random.Generator | None = None,
    mapper: Mapper = map_to_circuit,
) -> OptimizationResult:
    """Best circuit over every orbit member and every (or sampled) emission order."""
    table = OrbitTable(g, orbit_cap)
    orders = _orders(g.n, max_order_n, order_samples, rng)
    baseline = cost_report(mapper(g))
    best = None
    best_key = None
    count = 0
    for i in range(len(table)):
        member = table.graph(i)
        witness = table.witness(i)
        for order in orders:
            c = mapper(member.relabel(order))
            rep = cost_report(c)
            count += 1
            k = _tie_key(cost, rep, witness, order)
            if best_key is None or k < best_key:
                best_key = k
                best = (OrbitRecord(member, witness), order, c, rep)
    notes = () if g.n <= max_order_n else (f"orders sampled: {len(orders)} of {math.factorial(g.n)}",)
    record, order, circuit, report = best
    return OptimizationResult(record, order, circuit, report, baseline, count, notes)


def min_edge_member(g: Graph, orbit_cap: int = DEFAULT_ORBIT_CAP) -> OrbitRecord:
    """Orbit member with the fewest edges; ties go to the earliest BFS member."""
    table = OrbitTable(g, orbit_cap)
    best = min(range(len(table)), key=lambda i: (table.edge_count(i), i))
    return table.record(best)


def optimize_min_edges(
    g: Graph, orbit_cap: int = DEFAULT_ORBIT_CAP, mapper: Mapper = map_to_circuit
) -> OptimizationResult:
    """Map the sparsest orbit member in label order (falls back to ``edge_reduce`` past the cap)."""
    from .orbit import OrbitCapExceeded

    notes: tuple[str, ...] = ()
    try:
        record = min_edge_member(g, orbit_cap)
    except OrbitCapExceeded:
        record = edge_reduce(g)
        notes = (f"orbit exceeded {orbit_cap}; used edge_reduce instead",)
    c = mapper(record.graph)
    return OptimizationResult(
        record, tuple(range(g.n)), c, cost_report(c), cost_report(mapper(g)), 1, notes
    )


def node_scores(g: Graph) -> list[Fraction]:
    """Degree times clustering coefficient for every node."""
    out = []
    for v in range(g.n):
        nb = g.rows[v]
        d = nb.bit_count()
        if d <= 1:
            out.append(Fraction(0))
            continue
        inside = sum((g.rows[u] & nb).bit_count() for u in iter_bits(nb)) // 2
        out.append(Fraction(2 * inside, d - 1))
    return out


def edge_reduce(g: Graph) -> OrbitRecord:
    """Greedy LC at the highest degree x clustering node while the edge count drops."""
    seq: list[int] = []
    edges = g.edge_count()
    while True:
        scores = node_scores(g)
        top = max(scores)
        if top == 0:
            break
        v = scores.index(top)
        h = local_complement(g, v)
        e = h.edge_count()
        if e >= edges:
            break
        g, edges = h, e
        seq.append(v)
    return OrbitRecord(g, tuple(seq))


def optimize_edge_reduce(g: Graph, mapper: Mapper = map_to_circuit) -> OptimizationResult:
    """Map the ``edge_reduce`` result in label order."""
    record = edge_reduce(g)
    c = mapper(record.graph)
    return OptimizationResult(record, tuple(range(g.n)), c, cost_report(c), cost_report(mapper(g)), 1)


def random_search(
    g: Graph,
    sample_size: int,
    walk_len: int,
    cost: CostFunction,
    rng: np.random.Generator,
    mapper: Mapper = map_to_circuit,
) -> OptimizationResult:
    """Best of the seed plus ``sample_size`` random-walk orbit samples, label order."""
    if sample_size <= 0:
        raise ValueError("sample_size must be positive")
    candidates = [OrbitRecord(g, ())] + orbit_sample(g, sample_size, walk_len, rng)
    baseline = None
    best = None
    best_key = None
    seen = set()
    for rec in candidates:
        if rec.graph.rows in seen:
            continue
        seen.add(rec.graph.rows)
        c = mapper(rec.graph)
        rep = cost_report(c)
        if baseline is None:
            baseline = rep
        k = (cost.key(rep), rep.ee_cnots, rep.emitter_depth)
        if best_key is None or k < best_key:
            best_key, best = k, (rec, c, rep)
    rec, c, rep = best
    return OptimizationResult(rec, tuple(range(g.n)), c, rep, baseline, len(seen))


# ---------------------------------------------------------------------------
# repeater graph states


def inverse_lc_layer(seed: Graph, sequence: Sequence[int]) -> list[CliffordGate]:
    """One-qubit gates undoing the LC unitaries of ``sequence`` applied to ``seed``.

    Applying the returned gates to ``|apply_lc_sequence(seed, sequence)>``
    gives ``|seed>`` exactly; each qubit's gates are merged into the
    shortest equivalent word.
    """
    gates: list[CliffordGate] = []
    g = seed
    per_step = []
    for v in sequence:
        per_step.append(lc_unitary_gates(g, v))
        g = local_complement(g, v)
    for step in reversed(per_step):
        for gate in reversed(step):
            (q,) = gate.targets
            if gate.kind == "SQRT_X_DAG":
                gates += [CliffordGate("SQRT_X_DAG", (q,)), CliffordGate("X", (q,))]
            elif gate.kind == "SQRT_Z":
                gates.append(CliffordGate("P", (q,)))
            else:
                raise AssertionError(f"unexpected LC gate {gate.kind}")
    merged: dict[int, Clifford1Q] = {}
    for gate in gates:
        (q,) = gate.targets
        merged[q] = merged.get(q, Clifford1Q.identity()).then(gate.kind)
    return [CliffordGate(k, (q,)) for q in sorted(merged) for k in clifford_word(merged[q])]


def append_local_layer(c: Circuit, layer: Sequence[CliffordGate]) -> Circuit:
    ops = list(c.ops) + [Unitary1Q(g.targets[0], g.kind) for g in layer]
    return Circuit(c.n_photons, c.n_emitters, tuple(ops))


@dataclass(frozen=True)
class RgsOptimization:
    m: int
    original: Circuit
    original_report: CostReport
    sequence: tuple[int, ...]
    graph: Graph
    circuit: Circuit
    report: CostReport
    local_layer: tuple[CliffordGate, ...] = field(default=())

    @property
    def full_circuit(self) -> Circuit:
        """Optimized circuit followed by the layer that restores the original RGS state."""
        return append_local_layer(self.circuit, self.local_layer)


def rgs_optimize(m: int, mapper: Mapper = map_to_circuit) -> RgsOptimization:
    g0 = make_rgs(m)
    seq = rgs_best_sequence(m)
    best = apply_lc_sequence(g0, seq)
    original = mapper(g0)
    circuit = mapper(best)
    layer = inverse_lc_layer(g0, seq)
    return RgsOptimization(
        m, original, cost_report(original), seq, best, circuit, cost_report(circuit), tuple(layer)
    )
