import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photonlc.graphs import Graph, apply_lc_sequence, local_complement, make_rgs
from photonlc.orbit import rgs_correlated_sequence
from photonlc.stabilizer import (
    CLIFFORD_WORDS,
    INVERSE_KIND,
    ONE_QUBIT_KINDS,
    CliffordGate,
    Clifford1Q,
    Tableau,
    TableauError,
    apply_gate,
    apply_gates,
    canonicalize,
    clifford_of_word,
    clifford_word,
    commutes,
    lc_unitary_gates,
    measure_z,
    pauli_product,
    states_equal,
    tableau_from_graph,
    word_to_z,
)
from oracles import GATE, apply_1q, apply_cnot, graph_state, overlap, stabilizes, zero_state
from strategies import graph_and_node


def tab(*gens):
    return Tableau.from_stabilizers(gens)


def invariants_hold(t: Tableau) -> None:
    n = t.n_qubits
    assert len(t.xs) == n
    for i, j in itertools.combinations(range(n), 2):
        assert commutes(t.xs[i], t.zs[i], t.xs[j], t.zs[j])
    m = np.concatenate([t.xbits, t.zbits], axis=1) % 2
    # GF(2) rank
    m = m.copy()
    r = 0
    for c in range(m.shape[1]):
        piv = next((i for i in range(r, n) if m[i, c]), None)
        if piv is None:
            continue
        m[[r, piv]] = m[[piv, r]]
        for i in range(n):
            if i != r and m[i, c]:
                m[i] ^= m[r]
        r += 1
    assert r == n


def test_tableau_from_graph_examples():
    assert tableau_from_graph(Graph.empty(1)).stabilizers() == ["+X"]
    assert tableau_from_graph(Graph.complete(2)).stabilizers() == ["+XZ", "+ZX"]
    assert tableau_from_graph(Graph.empty(2)).stabilizers() == ["+XI", "+IX"]
    assert tableau_from_graph(Graph.complete(2), 1).stabilizers() == ["+XZI", "+ZXI", "+IIZ"]


def test_gate_examples():
    assert apply_gate(tab("Z"), CliffordGate("H", (0,))).stabilizers() == ["+X"]
    assert apply_gate(tab("XI", "IZ"), CliffordGate("CNOT", (0, 1))).stabilizers()[0] == "+XX"
    assert apply_gate(tab("ZI", "IZ"), CliffordGate("CNOT", (0, 1))).stabilizers()[1] == "+ZZ"


def test_gate_validation():
    with pytest.raises(TableauError):
        CliffordGate("T", (0,))
    with pytest.raises(TableauError):
        CliffordGate("CNOT", (1, 1))
    with pytest.raises(TableauError):
        apply_gate(tab("Z"), CliffordGate("H", (3,)))


def test_measure_examples():
    out, t = measure_z(Tableau.zero_state(1), 0)
    assert out == 0 and t.stabilizers() == ["+Z"]
    out, t = measure_z(tab("X"), 0, forced_outcome=1)
    assert out == 1 and t.stabilizers() == ["-Z"]
    with pytest.raises(TableauError):
        measure_z(Tableau.zero_state(1), 0, forced_outcome=1)


@pytest.mark.parametrize("s", [0, 1])
def test_ghz_measurement_collapses_partners(s):
    out, t = measure_z(tab("XXX", "ZZI", "IZZ"), 0, forced_outcome=s)
    assert out == s
    expected = zero_state(3)
    if s:
        expected = np.zeros(8, dtype=complex)
        expected[7] = 1
    xs_zs = list(zip(t.xs, t.zs, t.signs))
    assert stabilizes(xs_zs, expected, 3)
    for q in (1, 2):
        o, _ = measure_z(t, q)
        assert o == s


def test_measurement_is_fair_coin():
    rng = np.random.default_rng(0)
    outs = [measure_z(tab("X"), 0, rng=rng)[0] for _ in range(2000)]
    assert 900 < sum(outs) < 1100


def test_canonical_form_examples():
    a = tab("XX", "ZZ")
    b = tab("XX", "-YY")
    assert states_equal(a, b)
    assert canonicalize(a).stabilizers() == canonicalize(b).stabilizers()
    c = canonicalize(a)
    assert canonicalize(c).stabilizers() == c.stabilizers()
    assert not states_equal(tab("XX", "ZZ"), tab("XX", "-ZZ"))
    assert not states_equal(Tableau.zero_state(1), tab("-Z"))
    with pytest.raises(TableauError):
        states_equal(Tableau.zero_state(1), Tableau.zero_state(2))


def test_canonical_form_matches_group_membership():
    # every pure 2-qubit stabilizer state reached from |00> by a short word; compare groups directly
    rng = np.random.default_rng(5)
    kinds = list(ONE_QUBIT_KINDS)
    states = []
    for _ in range(60):
        t = Tableau.zero_state(2)
        for _ in range(6):
            if rng.random() < 0.3:
                t.apply_inplace("CNOT", *[int(v) for v in rng.permutation(2)])
            else:
                t.apply_inplace(kinds[rng.integers(len(kinds))], int(rng.integers(2)))
        states.append(t)

    def group(t):
        out = {(0, 0, 0)}
        for x, z, s in zip(t.xs, t.zs, t.signs):
            out |= {pauli_product(*e, x, z, s) for e in out}
        return frozenset(out)

    for a, b in itertools.combinations(states, 2):
        assert states_equal(a, b) == (group(a) == group(b))


def _random_clifford_circuit(rng, n, depth):
    ops = []
    for _ in range(depth):
        if n > 1 and rng.random() < 0.35:
            c, t = (int(v) for v in rng.choice(n, 2, replace=False))
            ops.append(("CNOT", (c, t)))
        else:
            ops.append((ONE_QUBIT_KINDS[rng.integers(len(ONE_QUBIT_KINDS))], (int(rng.integers(n)),)))
    return ops


@settings(max_examples=150)
@given(st.integers(1, 5), st.integers(0, 40), st.integers(0, 10**6))
def test_tableau_matches_state_vector(n, depth, seed):
    rng = np.random.default_rng(seed)
    ops = _random_clifford_circuit(rng, n, depth)
    t = Tableau.zero_state(n)
    psi = zero_state(n)
    for kind, qs in ops:
        t.apply_inplace(kind, *qs)
        if kind == "CNOT":
            psi = apply_cnot(psi, qs[0], qs[1], n)
        else:
            psi = apply_1q(psi, GATE[kind], qs[0], n)
    invariants_hold(t)
    assert stabilizes(list(zip(t.xs, t.zs, t.signs)), psi, n)


@settings(max_examples=100)
@given(st.integers(1, 5), st.integers(0, 30), st.integers(0, 10**6))
def test_measurement_matches_state_vector(n, depth, seed):
    rng = np.random.default_rng(seed)
    t = Tableau.zero_state(n)
    psi = zero_state(n)
    for kind, qs in _random_clifford_circuit(rng, n, depth):
        t.apply_inplace(kind, *qs)
        psi = apply_cnot(psi, *qs, n) if kind == "CNOT" else apply_1q(psi, GATE[kind], qs[0], n)
    q = int(rng.integers(n))
    bit = (np.arange(psi.size) >> q) & 1
    p1 = float(np.sum(abs(psi[bit == 1]) ** 2))
    det = t.peek_z(q)
    out = t.measure_z_inplace(q, forced_outcome=None if det is not None else int(rng.integers(2)))
    assert (p1 > 1e-9) if out else (p1 < 1 - 1e-9)
    if det is not None:
        assert p1 == pytest.approx(float(det), abs=1e-9)
    else:
        assert p1 == pytest.approx(0.5, abs=1e-9)
    post = np.where(bit == out, psi, 0)
    post = post / np.linalg.norm(post)
    invariants_hold(t)
    assert stabilizes(list(zip(t.xs, t.zs, t.signs)), post, n)


def test_graph_state_matches_vector():
    for g in (make_rgs(3), Graph.complete(4), Graph.from_edges(5, [(0, 1), (1, 2), (3, 4)])):
        t = tableau_from_graph(g)
        assert stabilizes(list(zip(t.xs, t.zs, t.signs)), graph_state(g), g.n)


@settings(max_examples=1000)
@given(graph_and_node(max_n=8))
def test_lc_unitary_property(gv):
    g, v = gv
    t = apply_gates(tableau_from_graph(g), lc_unitary_gates(g, v))
    assert states_equal(t, tableau_from_graph(local_complement(g, v)))


def test_lc_unitary_state_vector():
    g = Graph.from_edges(5, [(0, 1), (1, 2), (1, 3), (3, 4)])
    psi = graph_state(g)
    for gate in lc_unitary_gates(g, 1):
        psi = apply_1q(psi, GATE[gate.kind], gate.targets[0], 5)
    assert overlap(psi, graph_state(local_complement(g, 1))) == pytest.approx(1.0)


def test_lc_unitary_examples():
    p3 = Graph.from_edges(3, [(0, 1), (1, 2)])
    assert states_equal(apply_gates(tableau_from_graph(p3), lc_unitary_gates(p3, 1)), tableau_from_graph(Graph.complete(3)))
    assert states_equal(apply_gates(tableau_from_graph(p3), lc_unitary_gates(p3, 0)), tableau_from_graph(p3))
    g0 = make_rgs(4)
    t = tableau_from_graph(g0)
    g = g0
    for v in rgs_correlated_sequence(4, 1):
        t = apply_gates(t, lc_unitary_gates(g, v))
        g = local_complement(g, v)
    assert states_equal(t, tableau_from_graph(apply_lc_sequence(g0, [1, 3, 1])))


def test_single_qubit_clifford_group():
    assert len(CLIFFORD_WORDS) == 24
    for c, word in CLIFFORD_WORDS.items():
        assert clifford_of_word(word) == c
        assert clifford_word(c) == word
    for kind, inv in INVERSE_KIND.items():
        assert clifford_of_word((kind, inv)) == Clifford1Q.identity()


@pytest.mark.parametrize("x,z", [(1, 0), (0, 1), (1, 1)])
@pytest.mark.parametrize("s", [0, 1])
def test_word_to_z(x, z, s):
    c = clifford_of_word(word_to_z(x, z, s, care_sign=True))
    assert c.image(x, z, s) == (0, 1, 0)
