"""Graph-to-circuit map with the minimal emitter count for a fixed order.

The circuit is built backwards. Starting from ``|G> (x) |0...0>`` the last
photon is absorbed into an emitter first, then the one before it, and so
on, until every qubit is back in ``|0>``. Reversing the recorded op list
(and inverting every gate) yields the forward emission circuit.

Before photon ``p`` is absorbed the tableau is put in echelon gauge
(leftmost-support ordering over photons, then emitters). Photon ``p`` is
absorbable iff some generator starts at column ``p``. When none does, the
cut entanglement drops across ``p`` and a time-reversed measurement
entangles a free emitter with photon ``p`` first; in forward time this is a
Z measurement of the emitter with an ``X_p`` correction, then a reset.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circuit import (
    Circuit,
    CnotEE,
    Emission,
    MeasureZ,
    Op,
    Reset,
    Unitary1Q,
    simulate_forward,
)
from .graphs import Graph, iter_bits
from .stabilizer import (
    INVERSE_KIND,
    Clifford1Q,
    apply_to_rows,
    clifford_word,
    pauli_product,
    states_equal,
    tableau_from_graph,
)


class MapperError(RuntimeError):
    """The reverse construction hit an internal inconsistency."""


class _NoFreeEmitter(Exception):
    pass


def gf2_rank(rows: list[int]) -> int:
    rank = 0
    rows = [r for r in rows if r]
    while rows:
        pivot = rows.pop()
        low = pivot & -pivot
        rows = [r ^ pivot if r & low else r for r in rows]
        rows = [r for r in rows if r]
        rank += 1
    return rank


def height_profile(g: Graph) -> list[int]:
    """Cut-ranks ``h[x]`` between nodes ``0..x-1`` and ``x..n-1``."""
    n = g.n
    h = [0] * (n + 1)
    for x in range(1, n):
        keep = ((1 << n) - 1) ^ ((1 << x) - 1)
        h[x] = gf2_rank([g.rows[i] & keep for i in range(x)])
    return h


def min_emitters(g: Graph) -> int:
    """Emitters the map uses: the maximal cut-rank, but never fewer than one."""
    return max(1, max(height_profile(g)))


def _leftmost(x: int, z: int) -> int:
    s = x | z
    return (s & -s).bit_length() - 1


# reverse-time words that conjugate X or Y into Z
_TO_Z = {(1, 0): ("H",), (1, 1): ("SQRT_Z", "H")}


class _ReverseBuilder:
    def __init__(self, g: Graph, n_emitters: int) -> None:
        self.n = g.n
        self.ne = n_emitters
        self.q = g.n + n_emitters
        t = tableau_from_graph(g, n_emitters)
        self.xs, self.zs, self.ss = list(t.xs), list(t.zs), list(t.signs)
        self.pmask = (1 << g.n) - 1
        self.records: list[tuple] = []

    # primitives -----------------------------------------------------------

    def gate(self, kind: str, *qs: int) -> None:
        apply_to_rows(kind, qs, self.xs, self.zs, self.ss)
        self.records.append(("g", kind, qs))

    def _mul_into(self, target: int, source: int) -> None:
        self.xs[target], self.zs[target], self.ss[target] = pauli_product(
            self.xs[target], self.zs[target], self.ss[target],
            self.xs[source], self.zs[source], self.ss[source],
        )

    def _swap(self, a: int, b: int) -> None:
        if a != b:
            for v in (self.xs, self.zs, self.ss):
                v[a], v[b] = v[b], v[a]

    def _kinds(self, col: int, start: int) -> dict[str, list[int]]:
        b = 1 << col
        out: dict[str, list[int]] = {"x": [], "y": [], "z": []}
        for i in range(start, self.q):
            xb, zb = self.xs[i] & b, self.zs[i] & b
            if xb and zb:
                out["y"].append(i)
            elif xb:
                out["x"].append(i)
            elif zb:
                out["z"].append(i)
        return out

    def echelon(self) -> None:
        """Echelon gauge: each column gets up to two pivot rows; rows below are cleared."""
        r = k = 0
        while r < self.q and k < self.q:
            lists = self._kinds(k, r)
            present = [t for t in ("x", "y", "z") if lists[t]]
            if not present:
                k += 1
                continue
            if len(present) == 1:
                rows = lists[present[0]]
                self._swap(r, rows[0])
                for i in rows[1:]:
                    self._mul_into(i, r)
                r += 1
                k += 1
                continue
            t1, t2 = ("x", "z") if len(present) == 3 else present
            self._swap(r, lists[t1][0])
            lists = self._kinds(k, r)
            self._swap(r + 1, lists[t2][0])
            lists = self._kinds(k, r)
            for i in lists[t1][1:]:
                self._mul_into(i, r)
            for i in lists[t2][1:]:
                self._mul_into(i, r + 1)
            if len(present) == 3:
                for i in self._kinds(k, r)["y"]:
                    self._mul_into(i, r)
                    self._mul_into(i, r + 1)
            r += 2
            k += 1

    def _to_z(self, row: int, qubit: int) -> None:
        key = ((self.xs[row] >> qubit) & 1, (self.zs[row] >> qubit) & 1)
        for kind in _TO_Z.get(key, ()):
            self.gate(kind, qubit)

    def _collapse_emitters(self, row: int, target: int) -> None:
        """``row`` is pure Z on emitters; CNOT its other emitter Zs onto ``target``."""
        for q in iter_bits(self.zs[row] & ~self.pmask):
            if q != target:
                self.gate("CNOT", q, target)

    def _single_z_on_emitter(self, row: int) -> int:
        e = _leftmost(self.xs[row] & ~self.pmask, self.zs[row] & ~self.pmask)
        for q in range(self.n, self.q):
            self._to_z(row, q)
        self._collapse_emitters(row, e)
        if self.ss[row]:
            self.gate("X", e)
        return e

    # reverse steps ------------------------------------------------------------

    def time_reversed_measurement(self, p: int) -> None:
        free = [i for i in range(self.q) if not (self.xs[i] | self.zs[i]) & self.pmask]
        if not free:
            raise _NoFreeEmitter
        e = self._single_z_on_emitter(free[0])
        apply_to_rows("H", (e,), self.xs, self.zs, self.ss)
        apply_to_rows("CNOT", (e, p), self.xs, self.zs, self.ss)
        self.records.append(("trm", e, p))

    def absorb(self, p: int) -> None:
        row = next(
            (i for i in range(self.q - 1, -1, -1) if _leftmost(self.xs[i], self.zs[i]) == p), -1
        )
        if row < 0:
            raise MapperError(f"no generator starts at photon {p}")
        if not (self.xs[row] | self.zs[row]) & ~self.pmask:
            # photon p is unentangled from the emitters: reset a free emitter to |0> and borrow it
            free = [i for i in range(self.q) if i != row and not (self.xs[i] | self.zs[i]) & self.pmask]
            if not free:
                raise _NoFreeEmitter
            self._single_z_on_emitter(free[0])
            self._mul_into(row, free[0])
        self._to_z(row, p)
        e = self._single_z_on_emitter(row)
        apply_to_rows("CNOT", (e, p), self.xs, self.zs, self.ss)
        self.records.append(("emit", e, p))
        b = 1 << p
        if self.xs[row] != 0 or self.zs[row] != b or self.ss[row]:
            raise MapperError(f"absorbing photon {p} did not leave a private +Z")
        for i in range(self.q):
            if i != row and self.zs[i] & b:
                self._mul_into(i, row)

    def disentangle(self) -> None:
        """Map the residual emitter state to ``|0...0>``.

        Photon rows are private ``+Z`` by now. On the emitter block: make the
        X part full rank with H on the non-pivot columns, reduce it to the
        identity, clear the symmetric Z part with P and CZ, then H everywhere.
        """
        n, q = self.n, self.q
        photon_rows = [
            i for i in range(q)
            if self.xs[i] == 0 and self.ss[i] == 0 and self.zs[i] & self.pmask == self.zs[i]
            and self.zs[i].bit_count() == 1
        ]
        rows = [i for i in range(q) if i not in photon_rows]
        if len(rows) != self.ne or any((self.xs[i] | self.zs[i]) & self.pmask for i in rows):
            raise MapperError("photons are not disentangled before the final sweep")
        emitters = list(range(n, q))

        def reduce_x() -> list[int]:
            pivots = []
            r = 0
            for col in emitters:
                b = 1 << col
                piv = next((i for i in rows[r:] if self.xs[i] & b), None)
                if piv is None:
                    continue
                k = rows.index(piv)
                rows[r], rows[k] = rows[k], rows[r]
                for i in rows:
                    if i != piv and self.xs[i] & b:
                        self._mul_into(i, piv)
                pivots.append(col)
                r += 1
            return pivots

        pivots = reduce_x()
        for col in emitters:
            if col not in pivots:
                self.gate("H", col)
        if len(reduce_x()) != self.ne:
            raise MapperError("emitter X block is rank deficient")
        for j in emitters:
            if (self.zs[rows[j - n]] >> j) & 1:
                self.gate("P", j)
        for j in emitters:
            for k in emitters:
                if k > j and (self.zs[rows[j - n]] >> k) & 1:
                    # controlled-Z as H CNOT H
                    self.gate("H", k)
                    self.gate("CNOT", j, k)
                    self.gate("H", k)
        for j in emitters:
            self.gate("H", j)
        for j in emitters:
            if self.ss[rows[j - n]]:
                self.gate("X", j)
        for j in emitters:
            i = rows[j - n]
            if self.xs[i] or self.zs[i] != 1 << j or self.ss[i]:
                raise MapperError("residual emitter state did not reduce to |0...0>")

    def run(self) -> None:
        for p in range(self.n - 1, -1, -1):
            self.echelon()
            if not any(_leftmost(x, z) == p for x, z in zip(self.xs, self.zs)):
                self.time_reversed_measurement(p)
                self.echelon()
            self.absorb(p)
        self.disentangle()

    def forward_ops(self) -> list[Op]:
        n = self.n
        ops: list[Op] = []
        for rec in reversed(self.records):
            if rec[0] == "g":
                _, kind, qs = rec
                if kind == "CNOT":
                    if qs[0] < n or qs[1] < n:
                        raise MapperError("two-qubit gate on a photon")
                    ops.append(CnotEE(qs[0] - n, qs[1] - n))
                else:
                    ops.append(Unitary1Q(qs[0], INVERSE_KIND[kind]))
            elif rec[0] == "emit":
                ops.append(Emission(rec[1] - n, rec[2]))
            else:
                _, e, p = rec
                ops.append(MeasureZ(e - n, ((p, "X"),)))
                ops.append(Reset(e - n))
        return merge_single_qubit_runs(ops, n)


def _touched(op: Op, n: int) -> list[int]:
    if isinstance(op, Unitary1Q):
        return [op.qubit]
    if isinstance(op, CnotEE):
        return [n + op.control, n + op.target]
    if isinstance(op, Emission):
        return [n + op.emitter, op.photon]
    if isinstance(op, MeasureZ):
        return [n + op.emitter] + [q for q, _ in op.correction]
    return [n + op.emitter]


def merge_single_qubit_runs(ops: list[Op], n_photons: int) -> list[Op]:
    """Replace each run of adjacent one-qubit gates on a qubit by its shortest word."""
    slots: list[list[Op]] = []
    runs: dict[int, tuple[int, Clifford1Q]] = {}

    def close(q: int) -> None:
        start, c = runs.pop(q)
        slots[start] = [Unitary1Q(q, k) for k in clifford_word(c)]

    for op in ops:
        if isinstance(op, Unitary1Q):
            if op.qubit in runs:
                start, c = runs[op.qubit]
                runs[op.qubit] = (start, c.then(op.gate))
            else:
                runs[op.qubit] = (len(slots), Clifford1Q.identity().then(op.gate))
                slots.append([])
            continue
        for q in _touched(op, n_photons):
            if q in runs:
                close(q)
        slots.append([op])
    for q in list(runs):
        close(q)
    return [op for slot in slots for op in slot]


@dataclass(frozen=True)
class MinimalEmitterMapper:
    """Callable graph-to-circuit map; any callable with this signature can replace it."""

    verify: bool = True

    def __call__(self, g: Graph) -> Circuit:
        return map_to_circuit(g, verify=self.verify)


def map_to_circuit(g: Graph, n_emitters: int | None = None, verify: bool = True) -> Circuit:
    """Emission circuit for ``g`` in its label order.

    ``n_emitters`` defaults to ``max(1, max(height_profile(g)))``. Graphs
    with isolated parts can need more; the count is then raised one
    emitter at a time (only when ``n_emitters`` was not given).
    """
    ne = n_emitters if n_emitters is not None else min_emitters(g)
    while True:
        builder = _ReverseBuilder(g, ne)
        try:
            builder.run()
        except _NoFreeEmitter:
            if n_emitters is not None or ne > g.n:
                raise MapperError(f"construction ran out of free emitters with {ne} emitter(s)")
            ne += 1
            continue
        break
    circuit = Circuit(g.n, ne, tuple(builder.forward_ops()))
    if verify and not verify_circuit(circuit, g):
        raise MapperError("mapped circuit does not reproduce the target graph state")
    return circuit


def verify_circuit(c: Circuit, g: Graph) -> bool:
    """True iff ``c`` leaves the photons in ``|g>`` and every emitter in ``|0>``."""
    if c.n_photons != g.n:
        raise ValueError(f"circuit has {c.n_photons} photons, graph has {g.n} nodes")
    t = simulate_forward(c)
    ref = tableau_from_graph(g, c.n_emitters)
    return states_equal(t, ref)
