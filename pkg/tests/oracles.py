"""Independent reference implementations used only by the tests.

Everything here works on dense state vectors, so it shares no code path
with the GF(2) tableau machinery under test.
"""

from __future__ import annotations

import itertools
from functools import reduce

import numpy as np

from photonlc.circuit import Circuit, CnotEE, Emission, MeasureZ, Reset, Unitary1Q
from photonlc.graphs import Graph

S2 = 1 / np.sqrt(2)
I2 = np.eye(2, dtype=complex)
PAULI = {
    "I": I2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
GATE = {
    "H": S2 * np.array([[1, 1], [1, -1]], dtype=complex),
    "P": np.diag([1, 1j]),
    "SQRT_Z": np.diag([1, -1j]),  # exp(+i pi/4 Z) up to phase
    "SQRT_X_DAG": S2 * np.array([[1, -1j], [-1j, 1]], dtype=complex),  # exp(-i pi/4 X)
    "X": PAULI["X"],
    "Y": PAULI["Y"],
    "Z": PAULI["Z"],
}


def apply_1q(psi: np.ndarray, u: np.ndarray, q: int, n: int) -> np.ndarray:
    """Qubit ``q`` is bit ``q`` of the basis index (little endian)."""
    t = psi.reshape([2] * n)  # axis k is qubit n-1-k
    ax = n - 1 - q
    t = np.moveaxis(np.tensordot(u, t, axes=([1], [ax])), 0, ax)
    return t.reshape(-1)


def apply_cnot(psi: np.ndarray, c: int, t: int, n: int) -> np.ndarray:
    idx = np.arange(psi.size)
    src = np.where((idx >> c) & 1, idx ^ (1 << t), idx)
    return psi[src]


def zero_state(n: int) -> np.ndarray:
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1
    return psi


def graph_state(g: Graph, extra_zero: int = 0) -> np.ndarray:
    n = g.n
    idx = np.arange(1 << n)
    phase = np.zeros(idx.size, dtype=int)
    for i, j in g.edges():
        phase ^= ((idx >> i) & 1) & ((idx >> j) & 1)
    psi = np.where(phase, -1.0, 1.0).astype(complex) / np.sqrt(1 << n)
    if extra_zero:
        full = np.zeros(1 << (n + extra_zero), dtype=complex)
        full[: 1 << n] = psi
        return full
    return psi


def overlap(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)))


def pauli_matrix(x: int, z: int, s: int, n: int) -> np.ndarray:
    """Dense matrix of the signed Pauli row ``(-1)^s X^x Z^z`` (Y where both bits set)."""
    mats = []
    for q in range(n - 1, -1, -1):
        xb, zb = (x >> q) & 1, (z >> q) & 1
        mats.append(PAULI["Y" if xb and zb else "X" if xb else "Z" if zb else "I"])
    m = reduce(np.kron, mats)
    return -m if s else m


def stabilizes(rows, psi: np.ndarray, n: int) -> bool:
    return all(np.allclose(pauli_matrix(x, z, s, n) @ psi, psi, atol=1e-9) for x, z, s in rows)


def run_circuit(c: Circuit, outcomes: dict[int, int] | None = None) -> np.ndarray:
    """Dense simulation; ``outcomes[k]`` picks the branch of the ``k``-th random measurement.

    Returns ``None`` if a requested branch has zero probability.
    """
    n = c.n_qubits
    base = c.n_photons
    psi = zero_state(n)
    k = 0
    for op in c.ops:
        if isinstance(op, Unitary1Q):
            psi = apply_1q(psi, GATE[op.gate], op.qubit, n)
        elif isinstance(op, CnotEE):
            psi = apply_cnot(psi, base + op.control, base + op.target, n)
        elif isinstance(op, Emission):
            psi = apply_cnot(psi, base + op.emitter, op.photon, n)
        elif isinstance(op, MeasureZ):
            q = base + op.emitter
            bit = (np.arange(psi.size) >> q) & 1
            p1 = float(np.sum(abs(psi[bit == 1]) ** 2))
            if p1 < 1e-12:
                out = 0
            elif p1 > 1 - 1e-12:
                out = 1
            else:
                out = (outcomes or {}).get(k, 0)
                k += 1
            psi = np.where(bit == out, psi, 0)
            psi = psi / np.linalg.norm(psi)
            if out:
                for qq, p in op.correction:
                    psi = apply_1q(psi, PAULI[p], qq, n)
        elif isinstance(op, Reset):
            q = base + op.emitter
            bit = (np.arange(psi.size) >> q) & 1
            if np.sum(abs(psi[bit == 1]) ** 2) > 1e-12:
                # deterministic-branch reset: measure then flip
                if np.sum(abs(psi[bit == 0]) ** 2) < 1e-12:
                    psi = apply_1q(psi, PAULI["X"], q, n)
                else:
                    psi = np.where(bit == 0, psi, 0)
                    psi = psi / np.linalg.norm(psi)
    return psi


def schmidt_rank_log2(psi: np.ndarray, n: int, cut: int) -> int:
    """log2 of the Schmidt rank between qubits ``0..cut-1`` and the rest."""
    m = psi.reshape(1 << (n - cut), 1 << cut)
    sv = np.linalg.svd(m, compute_uv=False)
    r = int(np.sum(sv > 1e-9))
    return int(round(np.log2(r)))


def brute_force_orbit(seed: Graph) -> set[tuple[int, ...]]:
    """Orbit closure with a plain adjacency-matrix LC, no bit tricks."""
    def lc(a: np.ndarray, v: int) -> np.ndarray:
        b = a.copy()
        nb = np.flatnonzero(a[v])
        for i, j in itertools.combinations(nb, 2):
            b[i, j] ^= 1
            b[j, i] ^= 1
        return b

    def key(a: np.ndarray) -> tuple[int, ...]:
        return tuple(int(sum(int(bit) << j for j, bit in enumerate(row))) for row in a)

    start = seed.to_adjacency()
    seen = {key(start)}
    stack = [start]
    while stack:
        a = stack.pop()
        for v in range(a.shape[0]):
            b = lc(a, v)
            k = key(b)
            if k not in seen:
                seen.add(k)
                stack.append(b)
    return seen


def _full_op(u: np.ndarray, q: int, n: int) -> np.ndarray:
    mats = [u if k == q else I2 for k in range(n - 1, -1, -1)]
    return reduce(np.kron, mats)


def _cnot_op(c: int, t: int, n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    src = np.where((idx >> c) & 1, idx ^ (1 << t), idx)
    return np.eye(1 << n, dtype=complex)[src]


def _pauli_on(q_bits: dict[int, str], n: int) -> np.ndarray:
    mats = [PAULI[q_bits.get(k, "I")] for k in range(n - 1, -1, -1)]
    return reduce(np.kron, mats)


def _letter(x: int, z: int) -> str:
    return "Y" if x and z else "X" if x else "Z" if z else "I"


def _measure_channel(rho, proj0, proj1, fix):
    """Projective measurement; outcome 1 is followed by the unitary ``fix``."""
    return proj0 @ rho @ proj0 + fix @ proj1 @ rho @ proj1 @ fix.conj().T


def noisy_pair_fidelity_dm(c: Circuit, layer, plan, dist, noisy) -> float:
    """Density-matrix evaluation of one distilled pair under a Pauli channel.

    ``dist`` lists ``(prob, (x1, z1, x2, z2))``; ``noisy(op)`` says which
    CNOT-type ops are followed by the channel.
    """
    n = c.n_qubits
    base = c.n_photons
    dim = 1 << n
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1
    eye = np.eye(dim, dtype=complex)
    p_none = 1 - sum(p for p, _ in dist)

    def z_projectors(q):
        bit = (np.arange(dim) >> q) & 1
        return np.diag((bit == 0).astype(complex)), np.diag((bit == 1).astype(complex))

    for op in c.ops:
        if isinstance(op, Unitary1Q):
            u = _full_op(GATE[op.gate], op.qubit, n)
            rho = u @ rho @ u.conj().T
            continue
        if isinstance(op, MeasureZ):
            p0, p1 = z_projectors(base + op.emitter)
            fix = _pauli_on({q: p for q, p in op.correction}, n) if op.correction else eye
            rho = _measure_channel(rho, p0, p1, fix)
            continue
        if isinstance(op, Reset):
            q = base + op.emitter
            p0, p1 = z_projectors(q)
            rho = _measure_channel(rho, p0, p1, _full_op(PAULI["X"], q, n))
            continue
        if isinstance(op, CnotEE):
            qs = (base + op.control, base + op.target)
        else:
            qs = (base + op.emitter, op.photon)
        u = _cnot_op(*qs, n)
        rho = u @ rho @ u.conj().T
        if noisy(op):
            out = p_none * rho
            for p, (x1, z1, x2, z2) in dist:
                e = _pauli_on({qs[0]: _letter(x1, z1), qs[1]: _letter(x2, z2)}, n)
                out = out + p * (e @ rho @ e.conj().T)
            rho = out
    for gate in layer:
        u = _full_op(GATE[gate.kind], gate.targets[0], n)
        rho = u @ rho @ u.conj().T
    for step in plan.steps:
        p0, p1 = z_projectors(step.qubit)
        if step.basis == "X":
            h = _full_op(GATE["H"], step.qubit, n)
            p0, p1 = h @ p0 @ h, h @ p1 @ h
        x, z = step.correction
        fix = _pauli_on({q: _letter((x >> q) & 1, (z >> q) & 1) for q in range(n) if ((x | z) >> q) & 1}, n)
        rho = _measure_channel(rho, p0, p1, fix)
    proj = eye
    for gx, gz, gs in plan.pair_stabilizers:
        proj = proj @ (eye + pauli_matrix(gx, gz, gs, n)) / 2
    # the projector acts trivially off the pair, so Tr(proj rho) is the pair fidelity
    return float(np.real(np.trace(proj @ rho)))
