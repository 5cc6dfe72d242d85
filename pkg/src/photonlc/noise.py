"""EPR distillation from repeater graph states under Pauli noise.

Two estimators share the distillation plan but nothing else:

* the frame route propagates two sensitivity Paulis backwards through the
  circuit, which gives every fault location's effect on the kept pair in
  one pass; trajectories are then sampled from those per-location
  syndromes (and an exact value follows from a small convolution);
* the tableau route simulates each noisy trajectory with random outcomes
  and scores the final pair by stabilizer overlap.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .circuit import Circuit, CnotEE, Emission, MeasureZ, Reset, Unitary1Q, correction_bits
from .graphs import Graph, make_rgs
from .stabilizer import (
    CliffordGate,
    Tableau,
    commutes,
    conjugate_row,
    pauli_product,
    states_equal,
    tableau_from_graph,
)

SCOPES = ("ee", "all")
CHANNELS = ("two-qubit", "local")


class NoiseError(ValueError):
    """Invalid noise model, distillation request or trial count."""


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing noise after CNOT-type gates.

    ``scope="ee"`` only disturbs emitter-emitter CNOTs; ``"all"`` also the
    emission CNOTs. ``channel="two-qubit"`` draws one of the 15 non-identity
    two-qubit Paulis with total probability ``p_dep``; ``"local"`` depolarizes
    each of the two qubits independently with probability ``p_dep``.
    """

    p_dep: float
    scope: str = "ee"
    channel: str = "two-qubit"

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_dep <= 1.0:
            raise NoiseError(f"p_dep must lie in [0, 1], got {self.p_dep}")
        if self.scope not in SCOPES:
            raise NoiseError(f"scope must be one of {SCOPES}")
        if self.channel not in CHANNELS:
            raise NoiseError(f"channel must be one of {CHANNELS}")

    def noisy(self, op) -> bool:
        return isinstance(op, CnotEE) or (self.scope == "all" and isinstance(op, Emission))

    def pauli_distribution(self) -> list[tuple[float, tuple[int, int, int, int]]]:
        """``(probability, (x1, z1, x2, z2))`` for every non-identity error."""
        p = self.p_dep
        paulis = [b for b in itertools.product((0, 1), repeat=4) if any(b)]
        if self.channel == "two-qubit":
            return [(p / 15, b) for b in paulis]
        single = {(0, 0): 1 - p, (1, 0): p / 3, (0, 1): p / 3, (1, 1): p / 3}
        return [(single[b[0], b[1]] * single[b[2], b[3]], b) for b in paulis]


# ---------------------------------------------------------------------------
# distillation plan


@dataclass(frozen=True)
class MeasurementStep:
    qubit: int
    basis: str  # "Z" or "X"
    correction: tuple[int, int]  # (x, z) masks applied on outcome 1


@dataclass(frozen=True)
class DistillationPlan:
    n: int
    pair: tuple[int, int]
    steps: tuple[MeasurementStep, ...]
    # ideal pair stabilizer generators (x, z, sign) on the pair qubits
    pair_stabilizers: tuple[tuple[int, int, int], ...]

    @property
    def z_set(self) -> tuple[int, ...]:
        return tuple(s.qubit for s in self.steps if s.basis == "Z")

    @property
    def x_set(self) -> tuple[int, ...]:
        return tuple(s.qubit for s in self.steps if s.basis == "X")


def _observable(qubit: int, basis: str) -> tuple[int, int]:
    b = 1 << qubit
    return (0, b) if basis == "Z" else (b, 0)


def _measure(t: Tableau, qubit: int, basis: str, forced: int | None, rng) -> int:
    if basis == "X":
        t.apply_inplace("H", qubit)
    outcome = t.measure_z_inplace(qubit, forced_outcome=forced, rng=rng)
    if basis == "X":
        t.apply_inplace("H", qubit)
    return outcome


def _restrict(t: Tableau, keep: int) -> list[tuple[int, int, int]]:
    """Generators of the stabilizer subgroup supported inside the mask ``keep``."""
    rows = [(t.xs[i], t.zs[i], t.signs[i]) for i in range(t.n_qubits)]
    outside = ((1 << t.n_qubits) - 1) & ~keep
    for q in range(t.n_qubits):
        if not (outside >> q) & 1:
            continue
        for part in (0, 1):
            b = 1 << q
            piv = next((i for i, r in enumerate(rows) if r[part] & b), None)
            if piv is None:
                continue
            pr = rows.pop(piv)
            rows = [pauli_product(*r, *pr) if r[part] & b else r for r in rows]
    return [r for r in rows if r[0] | r[1]]


def distill_pattern(rgs: Graph, leaf_a: int, leaf_b: int) -> DistillationPlan:
    """Z-measure everything but the two leaves and their cores, then X-measure the cores."""
    n = rgs.n
    for leaf in (leaf_a, leaf_b):
        if not 0 <= leaf < n or leaf % 2 or rgs.rows[leaf] != 1 << (leaf + 1):
            raise NoiseError(f"node {leaf} is not a leaf of a repeater graph")
    if leaf_a == leaf_b:
        raise NoiseError("the two leaves must differ")
    core_a, core_b = leaf_a + 1, leaf_b + 1
    kept = {leaf_a, leaf_b, core_a, core_b}
    order = [(q, "Z") for q in range(n) if q not in kept] + [(core_a, "X"), (core_b, "X")]
    t = tableau_from_graph(rgs)
    steps = []
    for q, basis in order:
        mx, mz = _observable(q, basis)
        g = next(
            (i for i in range(n) if not commutes(mx, mz, t.xs[i], t.zs[i])),
            None,
        )
        if g is None:
            raise NoiseError(f"measurement of qubit {q} is deterministic; plan is degenerate")
        strip = ~(1 << q)
        steps.append(MeasurementStep(q, basis, (t.xs[g] & strip, t.zs[g] & strip)))
        _measure(t, q, basis, 0, None)
    pair_mask = (1 << leaf_a) | (1 << leaf_b)
    stabs = _restrict(t, pair_mask)
    if len(stabs) != 2:
        raise NoiseError("distilled pair is not a pure two-qubit state")
    return DistillationPlan(n, (leaf_a, leaf_b), tuple(steps), tuple(stabs))


def leaf_pairs(m: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(0, 2 * m, 2), 2))


def pair_fidelity(rows: Sequence[tuple[int, int, int]], ideal: Sequence[tuple[int, int, int]]) -> float:
    """Overlap of a (possibly mixed) stabilizer state with a pure ideal one.

    Both groups are given by generators on the same qubits; the ideal group
    must be maximal. ``F = 2^-k * sum of signs over the shared elements``.
    """
    def group(gens):
        out = {(0, 0): 0}
        for gx, gz, gs in gens:
            for (x, z), s in list(out.items()):
                px, pz, ps = pauli_product(x, z, s, gx, gz, gs)
                out[px, pz] = ps
        return out

    mine = group(rows)
    ideal_group = group(ideal)
    total = 0
    for key, s in mine.items():
        if key in ideal_group:
            total += 1 if s == ideal_group[key] else -1
    return total / len(ideal_group)


# ---------------------------------------------------------------------------
# frame route


def _sym(ax: int, az: int, bx: int, bz: int) -> int:
    return ((ax & bz) ^ (az & bx)).bit_count() & 1


def _fault_syndromes(
    c: Circuit, layer: Sequence[CliffordGate], plan: DistillationPlan, noise: NoiseModel
) -> np.ndarray:
    """Probabilities of the four pair syndromes for every fault location.

    Row ``k`` holds ``P(syndrome = s)`` for the ``k``-th noisy gate; the
    syndrome bit ``i`` says whether the propagated error anticommutes with
    the ``i``-th ideal pair stabilizer.
    """
    base = c.n_photons
    emitter_mask = ((1 << c.n_qubits) - 1) ^ ((1 << base) - 1)
    sens = [[x, z] for x, z, _ in plan.pair_stabilizers]

    def conj(kind: str, qs: tuple[int, ...]) -> None:
        # every gate used here is an involution on the symplectic (sign-free) level
        for s in sens:
            s[0], s[1], _ = conjugate_row(kind, qs, s[0], s[1], 0)

    for step in reversed(plan.steps):
        mx, mz = _observable(step.qubit, step.basis)
        cx, cz = step.correction
        keep = ~(1 << step.qubit)
        for s in sens:
            s[0] &= keep
            s[1] &= keep
            if _sym(s[0], s[1], cx, cz):
                s[0] ^= mx
                s[1] ^= mz
    for gate in reversed(layer):
        conj(gate.kind, gate.targets)
    for s in sens:
        s[0] &= ~emitter_mask
        s[1] &= ~emitter_mask

    dist = noise.pauli_distribution()
    out = []
    for op in reversed(c.ops):
        if isinstance(op, (CnotEE, Emission)):
            if isinstance(op, CnotEE):
                qs = (base + op.control, base + op.target)
            else:
                qs = (base + op.emitter, op.photon)
            if noise.noisy(op):
                row = np.zeros(4)
                row[0] = 1.0 - sum(p for p, _ in dist)
                for p, (x1, z1, x2, z2) in dist:
                    ex = (x1 << qs[0]) | (x2 << qs[1])
                    ez = (z1 << qs[0]) | (z2 << qs[1])
                    syn = _sym(*sens[0], ex, ez) | (_sym(*sens[1], ex, ez) << 1)
                    row[syn] += p
                out.append(row)
            conj("CNOT", qs)
        elif isinstance(op, Unitary1Q):
            conj(op.gate, (op.qubit,))
        elif isinstance(op, MeasureZ):
            b = 1 << (base + op.emitter)
            cx, cz = correction_bits(op.correction)
            for s in sens:
                if _sym(s[0], s[1], cx, cz):
                    s[1] ^= b
        elif isinstance(op, Reset):
            b = ~(1 << (base + op.emitter))
            for s in sens:
                s[0] &= b
                s[1] &= b
    out.reverse()
    return np.array(out).reshape(-1, 4)


def exact_pair_fidelity(syndromes: np.ndarray) -> float:
    """Exact trivial-syndrome probability by XOR convolution over locations."""
    dist = np.array([1.0, 0.0, 0.0, 0.0])
    for row in syndromes:
        new = np.zeros(4)
        for a in range(4):
            for b in range(4):
                new[a ^ b] += dist[a] * row[b]
        dist = new
    return float(dist[0])


def sample_pair_fidelity(syndromes: np.ndarray, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Per-trajectory fidelities (0 or 1) sampled from per-location syndromes."""
    if syndromes.shape[0] == 0:
        return np.ones(trials)
    cum = np.cumsum(syndromes, axis=1)[:, :3]
    total = np.zeros(trials, dtype=np.int64)
    chunk = max(1, 2_000_000 // max(1, syndromes.shape[0]))
    for start in range(0, trials, chunk):
        u = rng.random((min(chunk, trials - start), syndromes.shape[0]))
        cat = (u[:, :, None] >= cum[None, :, :]).sum(axis=2)
        total[start : start + u.shape[0]] = np.bitwise_xor.reduce(cat, axis=1)
    return (total == 0).astype(float)


# ---------------------------------------------------------------------------
# tableau route


def _random_error(dist, rng: np.random.Generator):
    probs = np.array([p for p, _ in dist])
    total = probs.sum()
    if rng.random() >= total:
        return None
    k = rng.choice(len(dist), p=probs / total)
    return dist[k][1]


def trajectory_fidelity(
    c: Circuit,
    layer: Sequence[CliffordGate],
    plan: DistillationPlan,
    noise: NoiseModel,
    rng: np.random.Generator,
) -> float:
    """One noisy trajectory simulated on a tableau, scored by stabilizer overlap."""
    t = Tableau.zero_state(c.n_qubits)
    base = c.n_photons
    dist = noise.pauli_distribution()
    for op in c.ops:
        if isinstance(op, Unitary1Q):
            t.apply_inplace(op.gate, op.qubit)
            continue
        if isinstance(op, MeasureZ):
            if t.measure_z_inplace(base + op.emitter, rng=rng):
                t.apply_pauli_inplace(*correction_bits(op.correction))
            continue
        if isinstance(op, Reset):
            t.reset_inplace(base + op.emitter)
            continue
        if isinstance(op, CnotEE):
            qs = (base + op.control, base + op.target)
        else:
            qs = (base + op.emitter, op.photon)
        t.apply_inplace("CNOT", *qs)
        if noise.noisy(op):
            err = _random_error(dist, rng)
            if err is not None:
                x1, z1, x2, z2 = err
                t.apply_pauli_inplace((x1 << qs[0]) | (x2 << qs[1]), (z1 << qs[0]) | (z2 << qs[1]))
    for gate in layer:
        t.apply_inplace(gate.kind, *gate.targets)
    for step in plan.steps:
        if _measure(t, step.qubit, step.basis, None, rng):
            t.apply_pauli_inplace(*step.correction)
    a, b = plan.pair
    rows = _restrict(t, (1 << a) | (1 << b))
    return pair_fidelity(rows, plan.pair_stabilizers)


# ---------------------------------------------------------------------------
# estimator


@dataclass(frozen=True)
class PairEstimate:
    pair: tuple[int, int]
    fidelity: float
    stderr: float
    exact: float | None


@dataclass(frozen=True)
class FidelityEstimate:
    fidelity: float
    stderr: float
    lower_bound: float
    lower_bound_stderr: float
    pairs: tuple[PairEstimate, ...]
    trials: int


def _check_state(c: Circuit, layer: Sequence[CliffordGate], rgs: Graph) -> None:
    from .circuit import simulate_forward

    t = simulate_forward(c)
    for gate in layer:
        t.apply_inplace(gate.kind, *gate.targets)
    if not states_equal(t, tableau_from_graph(rgs, c.n_emitters)):
        raise NoiseError("circuit plus local layer does not prepare the repeater graph state")


def epr_fidelity_mc(
    c: Circuit,
    layer: Sequence[CliffordGate],
    noise: NoiseModel,
    trials: int,
    rng: np.random.Generator,
    pairs: Iterable[tuple[int, int]] | None = None,
    method: str = "frame",
) -> FidelityEstimate:
    """Monte-Carlo EPR fidelity averaged over leaf pairs, with the worst pair as lower bound.

    ``method="frame"`` samples from propagated fault syndromes and also
    reports the exact per-pair value; ``"tableau"`` simulates every
    trajectory (slow, used as a cross-check).
    """
    if isinstance(trials, bool) or not isinstance(trials, (int, np.integer)) or trials < 1:
        raise NoiseError(f"trials must be a positive integer, got {trials!r}")
    if method not in ("frame", "tableau"):
        raise NoiseError(f"unknown method {method!r}")
    if c.n_photons % 2 or c.n_photons < 4:
        raise NoiseError("circuit must produce a repeater graph state with at least 2 arms")
    m = c.n_photons // 2
    rgs = make_rgs(m)
    _check_state(c, layer, rgs)
    chosen = list(pairs) if pairs is not None else leaf_pairs(m)
    if not chosen:
        raise NoiseError("no leaf pairs selected")
    estimates = []
    for pair in chosen:
        plan = distill_pattern(rgs, *pair)
        if method == "frame":
            syn = _fault_syndromes(c, layer, plan, noise)
            samples = sample_pair_fidelity(syn, int(trials), rng)
            exact = exact_pair_fidelity(syn)
        else:
            samples = np.array([trajectory_fidelity(c, layer, plan, noise, rng) for _ in range(int(trials))])
            exact = None
        mean = float(samples.mean())
        se = float(samples.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
        estimates.append(PairEstimate(tuple(pair), mean, se, exact))
    k = len(estimates)
    mean = sum(e.fidelity for e in estimates) / k
    se = math.sqrt(sum(e.stderr ** 2 for e in estimates)) / k
    worst = min(estimates, key=lambda e: (e.fidelity, e.pair))
    return FidelityEstimate(mean, se, worst.fidelity, worst.stderr, tuple(estimates), int(trials))
