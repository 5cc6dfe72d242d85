"""Stabilizer tableaus over Python-int bit rows.

A Pauli row is a triple ``(x, z, s)``: bit ``k`` of ``x``/``z`` is the X/Z
component on qubit ``k`` and ``s`` is the sign bit (``1`` means ``-1``). A
qubit with both bits set carries ``Y`` (the Hermitian ``iXZ``). Global phase
is never tracked.

Gate conjugation actions (``P -> U P U^dagger``):

========== ===================== =====================
kind       X maps to             Z maps to
========== ===================== =====================
H          Z                     X
P          Y                     Z
SQRT_Z     -Y                    Z        (``exp(i pi/4 Z)``, inverse of P)
SQRT_X_DAG X                     -Y       (``exp(-i pi/4 X)``)
X / Y / Z  sign flips on anticommuting components
========== ===================== =====================
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .graphs import Graph, iter_bits

ONE_QUBIT_KINDS = ("H", "P", "X", "Y", "Z", "SQRT_X_DAG", "SQRT_Z")
GATE_KINDS = ONE_QUBIT_KINDS + ("CNOT",)

# inverse kinds for the gates the synthesis routines emit
INVERSE_KIND = {"H": "H", "P": "SQRT_Z", "SQRT_Z": "P", "X": "X", "Y": "Y", "Z": "Z"}


class TableauError(ValueError):
    """Invalid tableau, gate target, or measurement request."""


@dataclass(frozen=True)
class CliffordGate:
    kind: str
    targets: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.kind not in GATE_KINDS:
            raise TableauError(f"unknown gate kind {self.kind!r}")
        arity = 2 if self.kind == "CNOT" else 1
        if len(self.targets) != arity:
            raise TableauError(f"{self.kind} takes {arity} target(s), got {self.targets}")
        if len(set(self.targets)) != arity:
            raise TableauError(f"{self.kind} targets must be distinct")


# ---------------------------------------------------------------------------
# Pauli row arithmetic


def pauli_product(x1: int, z1: int, s1: int, x2: int, z2: int, s2: int) -> tuple[int, int, int]:
    """Product ``P1 * P2`` of two signed Hermitian Paulis.

    For anticommuting inputs the imaginary unit is dropped.
    """
    x3 = x1 ^ x2
    z3 = z1 ^ z2
    e = (
        2 * s1
        + 2 * s2
        + (x1 & z1).bit_count()
        + (x2 & z2).bit_count()
        + 2 * (z1 & x2).bit_count()
        - (x3 & z3).bit_count()
    ) & 3
    return x3, z3, e >> 1


def commutes(x1: int, z1: int, x2: int, z2: int) -> bool:
    return ((x1 & z2).bit_count() + (z1 & x2).bit_count()) & 1 == 0


def pauli_string(x: int, z: int, s: int, n: int) -> str:
    chars = "".join("IXZY"[((x >> k) & 1) | (((z >> k) & 1) << 1)] for k in range(n))
    return ("-" if s else "+") + chars


def parse_pauli(text: str) -> tuple[int, int, int, int]:
    """Parse ``"+XZI"``-style strings into ``(x, z, s, n)``."""
    text = text.strip()
    s = 0
    if text[:1] in "+-":
        s = int(text[0] == "-")
        text = text[1:]
    x = z = 0
    for k, ch in enumerate(text.upper()):
        if ch == "X":
            x |= 1 << k
        elif ch == "Z":
            z |= 1 << k
        elif ch == "Y":
            x |= 1 << k
            z |= 1 << k
        elif ch not in "I_":
            raise TableauError(f"bad Pauli character {ch!r}")
    return x, z, s, len(text)


def conjugate_row(kind: str, targets: Sequence[int], x: int, z: int, s: int) -> tuple[int, int, int]:
    """Conjugate a single Pauli row by one gate."""
    if kind == "CNOT":
        c, t = targets
        xc = (x >> c) & 1
        zc = (z >> c) & 1
        xt = (x >> t) & 1
        zt = (z >> t) & 1
        s ^= xc & zt & (xt ^ zc ^ 1)
        x ^= xc << t
        z ^= zt << c
        return x, z, s
    q = targets[0]
    b = 1 << q
    xq = (x >> q) & 1
    zq = (z >> q) & 1
    if kind == "H":
        s ^= xq & zq
        if xq != zq:
            x ^= b
            z ^= b
    elif kind == "P":
        s ^= xq & zq
        z ^= xq << q
    elif kind == "SQRT_Z":
        s ^= xq & (zq ^ 1)
        z ^= xq << q
    elif kind == "SQRT_X_DAG":
        s ^= zq & (xq ^ 1)
        x ^= zq << q
    elif kind == "X":
        s ^= zq
    elif kind == "Z":
        s ^= xq
    elif kind == "Y":
        s ^= xq ^ zq
    else:
        raise TableauError(f"unknown gate kind {kind!r}")
    return x, z, s


def apply_to_rows(
    kind: str, targets: Sequence[int], xs: list[int], zs: list[int], ss: list[int] | None
) -> None:
    """In-place conjugation of a list of rows; ``ss=None`` ignores signs."""
    if kind == "CNOT":
        c, t = targets
        mc, mt = 1 << c, 1 << t
        for i in range(len(xs)):
            x, z = xs[i], zs[i]
            xc = x & mc
            zt = z & mt
            if not (xc or zt):
                continue
            if ss is not None and xc and zt and (((x >> t) ^ (z >> c)) & 1) == 0:
                ss[i] ^= 1
            if xc:
                xs[i] = x ^ mt
            if zt:
                zs[i] = z ^ mc
        return
    q = targets[0]
    b = 1 << q
    for i in range(len(xs)):
        x, z = xs[i], zs[i]
        xq = x & b
        zq = z & b
        if not (xq or zq):
            continue
        if kind == "H":
            if ss is not None and xq and zq:
                ss[i] ^= 1
            if bool(xq) != bool(zq):
                xs[i] = x ^ b
                zs[i] = z ^ b
        elif kind == "P":
            if ss is not None and xq and zq:
                ss[i] ^= 1
            if xq:
                zs[i] = z ^ b
        elif kind == "SQRT_Z":
            if ss is not None and xq and not zq:
                ss[i] ^= 1
            if xq:
                zs[i] = z ^ b
        elif kind == "SQRT_X_DAG":
            if ss is not None and zq and not xq:
                ss[i] ^= 1
            if zq:
                xs[i] = x ^ b
        elif ss is None:
            pass
        elif kind == "X":
            if zq:
                ss[i] ^= 1
        elif kind == "Z":
            if xq:
                ss[i] ^= 1
        elif kind == "Y":
            if bool(xq) != bool(zq):
                ss[i] ^= 1
        else:
            raise TableauError(f"unknown gate kind {kind!r}")


def rref_rows(
    xs: list[int], zs: list[int], ss: list[int], n: int
) -> tuple[list[int], list[int], list[int]]:
    """Reduced row echelon form, pivots over X columns then Z columns.

    Signs follow the row products, so the result depends only on the
    generated (signed) group.
    """
    xs, zs, ss = list(xs), list(zs), list(ss)
    m = len(xs)
    rank = 0
    for use_z in (False, True):
        for k in range(n):
            if rank == m:
                break
            b = 1 << k
            bits = zs if use_z else xs
            piv = -1
            for i in range(rank, m):
                if bits[i] & b:
                    piv = i
                    break
            if piv < 0:
                continue
            xs[rank], xs[piv] = xs[piv], xs[rank]
            zs[rank], zs[piv] = zs[piv], zs[rank]
            ss[rank], ss[piv] = ss[piv], ss[rank]
            px, pz, ps = xs[rank], zs[rank], ss[rank]
            for i in range(m):
                if i != rank and bits[i] & b:
                    xs[i], zs[i], ss[i] = pauli_product(xs[i], zs[i], ss[i], px, pz, ps)
            rank += 1
    return xs[:rank], zs[:rank], ss[:rank]


def _complete_destabilizers(xs: Sequence[int], zs: Sequence[int], n: int) -> tuple[list[int], list[int]]:
    """Destabilizer rows for an independent commuting generator set."""
    m = len(xs)
    wx, wz = list(xs), list(zs)
    combo = [1 << i for i in range(m)]  # row i of the RREF as a subset of inputs
    pivots: list[tuple[bool, int]] = []
    rank = 0
    for use_z in (False, True):
        for k in range(n):
            b = 1 << k
            bits = wz if use_z else wx
            piv = next((i for i in range(rank, m) if bits[i] & b), -1)
            if piv < 0:
                continue
            for arr in (wx, wz, combo):
                arr[rank], arr[piv] = arr[piv], arr[rank]
            for i in range(m):
                if i != rank and bits[i] & b:
                    wx[i] ^= wx[rank]
                    wz[i] ^= wz[rank]
                    combo[i] ^= combo[rank]
            pivots.append((use_z, k))
            rank += 1
    if rank != m:
        raise TableauError("stabilizer generators are not independent")
    # dual of an X pivot at k is Z_k, of a Z pivot is X_k
    duals = [(0, 1 << k) if not use_z else (1 << k, 0) for use_z, k in pivots]
    dx, dz = [0] * m, [0] * m
    for r, (ax, az) in enumerate(duals):
        for i in iter_bits(combo[r]):
            dx[i] ^= ax
            dz[i] ^= az
    for k in range(m):
        for i in range(k):
            if not commutes(dx[i], dz[i], dx[k], dz[k]):
                dx[k] ^= xs[i]
                dz[k] ^= zs[i]
    return dx, dz


# ---------------------------------------------------------------------------
# Tableau


class Tableau:
    """Pure ``n_qubits``-qubit stabilizer state with destabilizers.

    Only the stabilizer rows are part of the public contract; the
    destabilizer rows keep Z measurements at ``O(n^2)`` cost.
    """

    __slots__ = ("n_qubits", "xs", "zs", "signs", "dxs", "dzs")

    def __init__(
        self,
        n_qubits: int,
        xs: list[int],
        zs: list[int],
        signs: list[int],
        dxs: list[int] | None = None,
        dzs: list[int] | None = None,
    ) -> None:
        if len(xs) != n_qubits or len(zs) != n_qubits or len(signs) != n_qubits:
            raise TableauError("a pure state needs exactly n_qubits generators")
        self.n_qubits = n_qubits
        self.xs, self.zs, self.signs = xs, zs, signs
        if dxs is None or dzs is None:
            dxs, dzs = _complete_destabilizers(xs, zs, n_qubits)
        self.dxs, self.dzs = dxs, dzs

    @classmethod
    def zero_state(cls, n_qubits: int) -> "Tableau":
        return cls(
            n_qubits,
            [0] * n_qubits,
            [1 << k for k in range(n_qubits)],
            [0] * n_qubits,
            [1 << k for k in range(n_qubits)],
            [0] * n_qubits,
        )

    @classmethod
    def from_stabilizers(cls, generators: Iterable[str]) -> "Tableau":
        rows = [parse_pauli(g) for g in generators]
        if not rows:
            raise TableauError("no generators given")
        n = rows[0][3]
        if any(r[3] != n for r in rows):
            raise TableauError("generators have different lengths")
        xs = [r[0] for r in rows]
        zs = [r[1] for r in rows]
        ss = [r[2] for r in rows]
        for i in range(len(rows)):
            for j in range(i):
                if not commutes(xs[i], zs[i], xs[j], zs[j]):
                    raise TableauError(f"generators {i} and {j} anticommute")
        return cls(n, xs, zs, ss)

    def copy(self) -> "Tableau":
        return Tableau(
            self.n_qubits,
            list(self.xs),
            list(self.zs),
            list(self.signs),
            list(self.dxs),
            list(self.dzs),
        )

    @property
    def xbits(self) -> np.ndarray:
        return _bit_matrix(self.xs, self.n_qubits)

    @property
    def zbits(self) -> np.ndarray:
        return _bit_matrix(self.zs, self.n_qubits)

    def stabilizers(self) -> list[str]:
        return [pauli_string(x, z, s, self.n_qubits) for x, z, s in zip(self.xs, self.zs, self.signs)]

    def __str__(self) -> str:
        return "\n".join(self.stabilizers())

    def __repr__(self) -> str:
        return f"Tableau({self.stabilizers()!r})"

    # in-place primitives ---------------------------------------------------

    def _check_targets(self, targets: Sequence[int]) -> None:
        for t in targets:
            if not 0 <= t < self.n_qubits:
                raise TableauError(f"qubit {t} out of range for {self.n_qubits} qubits")

    def apply_inplace(self, kind: str, *targets: int) -> None:
        self._check_targets(targets)
        apply_to_rows(kind, targets, self.xs, self.zs, self.signs)
        apply_to_rows(kind, targets, self.dxs, self.dzs, None)

    def apply_pauli_inplace(self, x: int, z: int) -> None:
        """Apply the Pauli ``X^x Z^z`` (flips signs of anticommuting rows)."""
        for i in range(self.n_qubits):
            if not commutes(x, z, self.xs[i], self.zs[i]):
                self.signs[i] ^= 1

    def peek_z(self, qubit: int) -> int | None:
        """Deterministic Z outcome of ``qubit`` or ``None`` when random."""
        self._check_targets((qubit,))
        b = 1 << qubit
        if any(x & b for x in self.xs):
            return None
        sx = sz = ss = 0
        for i in range(self.n_qubits):
            if self.dxs[i] & b:
                sx, sz, ss = pauli_product(sx, sz, ss, self.xs[i], self.zs[i], self.signs[i])
        return ss

    def measure_z_inplace(
        self, qubit: int, forced_outcome: int | None = None, rng: np.random.Generator | None = None
    ) -> int:
        self._check_targets((qubit,))
        b = 1 << qubit
        n = self.n_qubits
        xs, zs, ss, dxs, dzs = self.xs, self.zs, self.signs, self.dxs, self.dzs
        p = next((i for i in range(n) if xs[i] & b), -1)
        if p < 0:
            outcome = self.peek_z(qubit)
            if forced_outcome is not None and forced_outcome != outcome:
                raise TableauError(
                    f"forced outcome {forced_outcome} contradicts deterministic outcome {outcome}"
                )
            return outcome
        if forced_outcome is not None:
            if forced_outcome not in (0, 1):
                raise TableauError("forced outcome must be 0 or 1")
            outcome = forced_outcome
        else:
            rng = rng if rng is not None else np.random.default_rng()
            outcome = int(rng.integers(2))
        px, pz, ps = xs[p], zs[p], ss[p]
        for i in range(n):
            if i != p and xs[i] & b:
                xs[i], zs[i], ss[i] = pauli_product(xs[i], zs[i], ss[i], px, pz, ps)
            if i != p and dxs[i] & b:
                dxs[i] ^= px
                dzs[i] ^= pz
        dxs[p], dzs[p] = px, pz
        xs[p], zs[p], ss[p] = 0, b, outcome
        return outcome

    def reset_inplace(self, qubit: int) -> None:
        outcome = self.measure_z_inplace(qubit, forced_outcome=None if self.peek_z(qubit) is not None else 0)
        if outcome:
            self.apply_inplace("X", qubit)


def _bit_matrix(rows: Sequence[int], n: int) -> np.ndarray:
    out = np.zeros((len(rows), n), dtype=np.uint8)
    for i, r in enumerate(rows):
        for k in iter_bits(r):
            out[i, k] = 1
    return out


# ---------------------------------------------------------------------------
# pure-function facade


def apply_gate(t: Tableau, gate: CliffordGate) -> Tableau:
    out = t.copy()
    out.apply_inplace(gate.kind, *gate.targets)
    return out


def apply_gates(t: Tableau, gates: Iterable[CliffordGate]) -> Tableau:
    out = t.copy()
    for g in gates:
        out.apply_inplace(g.kind, *g.targets)
    return out


def measure_z(
    t: Tableau, qubit: int, forced_outcome: int | None = None, rng: np.random.Generator | None = None
) -> tuple[int, Tableau]:
    out = t.copy()
    outcome = out.measure_z_inplace(qubit, forced_outcome, rng)
    return outcome, out


def canonical_rows(t: Tableau) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    xs, zs, ss = rref_rows(t.xs, t.zs, t.signs, t.n_qubits)
    return tuple(xs), tuple(zs), tuple(ss)


def canonicalize(t: Tableau) -> Tableau:
    xs, zs, ss = rref_rows(t.xs, t.zs, t.signs, t.n_qubits)
    return Tableau(t.n_qubits, xs, zs, ss)


def states_equal(t1: Tableau, t2: Tableau) -> bool:
    if t1.n_qubits != t2.n_qubits:
        raise TableauError(f"qubit counts differ: {t1.n_qubits} vs {t2.n_qubits}")
    return canonical_rows(t1) == canonical_rows(t2)


def tableau_from_graph(g: Graph, extra_zero_qubits: int = 0) -> Tableau:
    """Graph state on qubits ``0..n-1`` followed by ``|0>`` ancillas."""
    if extra_zero_qubits < 0:
        raise TableauError("extra_zero_qubits must be nonnegative")
    n = g.n
    q = n + extra_zero_qubits
    xs = [1 << a for a in range(n)] + [0] * extra_zero_qubits
    zs = list(g.rows) + [1 << (n + e) for e in range(extra_zero_qubits)]
    dxs = [0] * n + [1 << (n + e) for e in range(extra_zero_qubits)]
    dzs = [1 << a for a in range(n)] + [0] * extra_zero_qubits
    return Tableau(q, xs, zs, [0] * q, dxs, dzs)


def lc_unitary_gates(g: Graph, v: int) -> list[CliffordGate]:
    """Local Clifford taking ``|g>`` to the graph state of ``LC_v(g)``."""
    nbrs = g.neighbors(v)
    return [CliffordGate("SQRT_X_DAG", (v,))] + [CliffordGate("SQRT_Z", (b,)) for b in nbrs]


# ---------------------------------------------------------------------------
# single-qubit Clifford group


@dataclass(frozen=True)
class Clifford1Q:
    """Single-qubit Clifford stored by the signed images of X and Z.

    Images are ``(x, z, s)`` one-qubit rows.
    """

    x_image: tuple[int, int, int]
    z_image: tuple[int, int, int]

    @classmethod
    def identity(cls) -> "Clifford1Q":
        return cls((1, 0, 0), (0, 1, 0))

    def then(self, kind: str) -> "Clifford1Q":
        """This Clifford followed by gate ``kind``."""
        return Clifford1Q(
            conjugate_row(kind, (0,), *self.x_image),
            conjugate_row(kind, (0,), *self.z_image),
        )

    def image(self, x: int, z: int, s: int) -> tuple[int, int, int]:
        """Conjugation image of the one-qubit Pauli ``(x, z, s)``."""
        if not x and not z:
            return 0, 0, s
        if x and not z:
            return self.x_image[0], self.x_image[1], self.x_image[2] ^ s
        if z and not x:
            return self.z_image[0], self.z_image[1], self.z_image[2] ^ s
        # Y = i X Z
        ix, iz, _ = pauli_product(*self.x_image, *self.z_image)
        e = (
            2 * self.x_image[2]
            + 2 * self.z_image[2]
            + (self.x_image[0] & self.x_image[1])
            + (self.z_image[0] & self.z_image[1])
            + 2 * (self.x_image[1] & self.z_image[0])
            - (ix & iz)
            + 1
        ) & 3
        return ix, iz, (e >> 1) ^ s


_SYNTH_GENERATORS = ("H", "P", "SQRT_Z", "X", "Y", "Z")


def _build_clifford_words() -> dict[Clifford1Q, tuple[str, ...]]:
    start = Clifford1Q.identity()
    words = {start: ()}
    queue = deque([start])
    while queue:
        c = queue.popleft()
        for kind in _SYNTH_GENERATORS:
            nxt = c.then(kind)
            if nxt not in words:
                words[nxt] = words[c] + (kind,)
                queue.append(nxt)
    return words


CLIFFORD_WORDS = _build_clifford_words()
assert len(CLIFFORD_WORDS) == 24


def clifford_word(c: Clifford1Q) -> tuple[str, ...]:
    """Shortest gate word (application order) realizing ``c``."""
    return CLIFFORD_WORDS[c]


def clifford_of_word(kinds: Iterable[str]) -> Clifford1Q:
    c = Clifford1Q.identity()
    for k in kinds:
        c = c.then(k)
    return c


@lru_cache(maxsize=None)
def word_to_z(x: int, z: int, s: int, care_sign: bool) -> tuple[str, ...]:
    """Shortest word mapping the one-qubit Pauli ``(x, z, s)`` to ``Z``.

    With ``care_sign`` the image must be ``+Z``; otherwise ``-Z`` is fine.
    """
    best: tuple[str, ...] | None = None
    for c, word in CLIFFORD_WORDS.items():
        ix, iz, isg = c.image(x, z, s)
        if ix == 0 and iz == 1 and (isg == 0 or not care_sign):
            if best is None or len(word) < len(best):
                best = word
    assert best is not None
    return best
