"""Sequential-emission circuits: ops, forward simulation and cost metrics.

Qubit addressing: photons occupy global indices ``0..n_photons-1`` and
emitter ``e`` sits at global index ``n_photons + e``. Fields named
``emitter``/``control``/``target`` of emitter ops use emitter-local indices;
``Unitary1Q.qubit`` and correction Paulis use global indices.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass
from typing import Any, Iterable, Union

import numpy as np

from .stabilizer import ONE_QUBIT_KINDS, Tableau


class CircuitError(ValueError):
    """Circuit violates the sequential-emission model."""


@dataclass(frozen=True)
class Unitary1Q:
    qubit: int
    gate: str


@dataclass(frozen=True)
class CnotEE:
    control: int
    target: int


@dataclass(frozen=True)
class Emission:
    emitter: int
    photon: int


@dataclass(frozen=True)
class MeasureZ:
    """Z measurement of an emitter; ``correction`` is applied on outcome 1.

    ``correction`` is a tuple of ``(global_qubit, "X" | "Y" | "Z")`` pairs.
    """

    emitter: int
    correction: tuple[tuple[int, str], ...] = ()


@dataclass(frozen=True)
class Reset:
    emitter: int


Op = Union[Unitary1Q, CnotEE, Emission, MeasureZ, Reset]


@dataclass(frozen=True)
class CostReport:
    n_emitters: int
    ee_cnots: int
    unitary_count: int
    depth: int
    emitter_depth: int
    emission_count: int

    def as_dict(self) -> dict[str, int]:
        return asdict(self)


METRICS = ("n_emitters", "ee_cnots", "unitary_count", "depth", "emitter_depth")


@dataclass(frozen=True)
class Circuit:
    n_photons: int
    n_emitters: int
    ops: tuple[Op, ...]

    def __post_init__(self) -> None:
        if self.n_photons < 0 or self.n_emitters < 0:
            raise CircuitError("register sizes must be nonnegative")
        object.__setattr__(self, "ops", tuple(self.ops))

    @property
    def n_qubits(self) -> int:
        return self.n_photons + self.n_emitters

    def emitter_qubit(self, e: int) -> int:
        return self.n_photons + e

    def validate(self) -> None:
        """Raise ``CircuitError`` unless the emission-model invariants hold."""
        np_, ne = self.n_photons, self.n_emitters
        emitted = [False] * np_

        def check_emitter(e: int) -> None:
            if not 0 <= e < ne:
                raise CircuitError(f"emitter {e} out of range (n_emitters={ne})")

        for k, op in enumerate(self.ops):
            if isinstance(op, Unitary1Q):
                if op.gate not in ONE_QUBIT_KINDS:
                    raise CircuitError(f"op {k}: unknown single-qubit gate {op.gate!r}")
                if not 0 <= op.qubit < np_ + ne:
                    raise CircuitError(f"op {k}: qubit {op.qubit} out of range")
                if op.qubit < np_ and not emitted[op.qubit]:
                    raise CircuitError(f"op {k}: gate on photon {op.qubit} before its emission")
            elif isinstance(op, CnotEE):
                check_emitter(op.control)
                check_emitter(op.target)
                if op.control == op.target:
                    raise CircuitError(f"op {k}: CNOT control equals target")
            elif isinstance(op, Emission):
                check_emitter(op.emitter)
                if not 0 <= op.photon < np_:
                    raise CircuitError(f"op {k}: photon {op.photon} out of range")
                if emitted[op.photon]:
                    raise CircuitError(f"op {k}: photon {op.photon} emitted twice")
                emitted[op.photon] = True
            elif isinstance(op, MeasureZ):
                check_emitter(op.emitter)
                for q, p in op.correction:
                    if p not in ("X", "Y", "Z"):
                        raise CircuitError(f"op {k}: bad correction Pauli {p!r}")
                    if not 0 <= q < np_ + ne:
                        raise CircuitError(f"op {k}: correction qubit {q} out of range")
                    if q == np_ + op.emitter:
                        raise CircuitError(f"op {k}: correction acts on the measured emitter")
                    if q < np_ and not emitted[q]:
                        raise CircuitError(f"op {k}: correction on photon {q} before its emission")
            elif isinstance(op, Reset):
                check_emitter(op.emitter)
            else:
                raise CircuitError(f"op {k}: unknown op {op!r}")
        missing = [p for p in range(np_) if not emitted[p]]
        if missing:
            raise CircuitError(f"photons never emitted: {missing}")

    # documents ------------------------------------------------------------

    def to_document(self) -> dict[str, Any]:
        ops: list[dict[str, Any]] = []
        for op in self.ops:
            if isinstance(op, Unitary1Q):
                ops.append({"op": "u1", "target": op.qubit, "gate": op.gate})
            elif isinstance(op, CnotEE):
                ops.append({"op": "cnot", "control": op.control, "target": op.target})
            elif isinstance(op, Emission):
                ops.append({"op": "emission", "emitter": op.emitter, "photon": op.photon})
            elif isinstance(op, MeasureZ):
                ops.append({"op": "measure", "emitter": op.emitter, "correction": format_correction(op.correction)})
            else:
                ops.append({"op": "reset", "emitter": op.emitter})
        return {"photons": self.n_photons, "emitters": self.n_emitters, "ops": ops}

    @classmethod
    def from_document(cls, doc: dict[str, Any]) -> "Circuit":
        try:
            ops: list[Op] = []
            for entry in doc["ops"]:
                kind = entry["op"]
                if kind == "u1":
                    ops.append(Unitary1Q(int(entry["target"]), str(entry["gate"])))
                elif kind == "cnot":
                    ops.append(CnotEE(int(entry["control"]), int(entry["target"])))
                elif kind == "emission":
                    ops.append(Emission(int(entry["emitter"]), int(entry["photon"])))
                elif kind == "measure":
                    ops.append(MeasureZ(int(entry["emitter"]), parse_correction(entry.get("correction", ""))))
                elif kind == "reset":
                    ops.append(Reset(int(entry["emitter"])))
                else:
                    raise CircuitError(f"unknown op kind {kind!r}")
            circuit = cls(int(doc["photons"]), int(doc["emitters"]), tuple(ops))
        except (KeyError, TypeError) as exc:
            raise CircuitError(f"malformed circuit document: {exc}") from exc
        circuit.validate()
        return circuit

    def dumps(self) -> str:
        return json.dumps(self.to_document())


_CORRECTION_TOKEN = re.compile(r"^([XYZ])_(\d+)$")


def format_correction(correction: Iterable[tuple[int, str]]) -> str:
    return " ".join(f"{p}_{q}" for q, p in correction)


def parse_correction(text: str) -> tuple[tuple[int, str], ...]:
    out = []
    for token in text.split():
        m = _CORRECTION_TOKEN.match(token)
        if not m:
            raise CircuitError(f"bad correction token {token!r}")
        out.append((int(m.group(2)), m.group(1)))
    return tuple(out)


def correction_bits(correction: Iterable[tuple[int, str]]) -> tuple[int, int]:
    x = z = 0
    for q, p in correction:
        if p in ("X", "Y"):
            x ^= 1 << q
        if p in ("Z", "Y"):
            z ^= 1 << q
    return x, z


def simulate_forward(c: Circuit, rng: np.random.Generator | None = None) -> Tableau:
    """Run ``c`` from ``|0...0>`` (photons then emitters).

    Random measurement outcomes take the 0 branch unless ``rng`` is given,
    in which case they are sampled; corrections make the result
    branch-independent for valid circuits.
    """
    c.validate()
    t = Tableau.zero_state(c.n_qubits)
    base = c.n_photons
    for op in c.ops:
        if isinstance(op, Unitary1Q):
            t.apply_inplace(op.gate, op.qubit)
        elif isinstance(op, CnotEE):
            t.apply_inplace("CNOT", base + op.control, base + op.target)
        elif isinstance(op, Emission):
            t.apply_inplace("CNOT", base + op.emitter, op.photon)
        elif isinstance(op, MeasureZ):
            q = base + op.emitter
            forced = None if rng is not None or t.peek_z(q) is not None else 0
            outcome = t.measure_z_inplace(q, forced_outcome=forced, rng=rng)
            if outcome:
                x, z = correction_bits(op.correction)
                t.apply_pauli_inplace(x, z)
        else:
            t.reset_inplace(base + op.emitter)
    return t


def _touched(op: Op, base: int) -> list[int]:
    if isinstance(op, Unitary1Q):
        return [op.qubit]
    if isinstance(op, CnotEE):
        return [base + op.control, base + op.target]
    if isinstance(op, Emission):
        return [base + op.emitter, op.photon]
    if isinstance(op, MeasureZ):
        return [base + op.emitter] + [q for q, _ in op.correction]
    return [base + op.emitter]


def cost_report(c: Circuit) -> CostReport:
    base = c.n_photons
    ee = emissions = unitaries = 0
    level = [0] * c.n_qubits
    depth = 0
    run = [0] * c.n_emitters
    emitter_depth = 0

    def bump(e: int) -> None:
        nonlocal emitter_depth
        run[e] += 1
        emitter_depth = max(emitter_depth, run[e])

    for op in c.ops:
        qs = _touched(op, base)
        step = 1 + max(level[q] for q in qs)
        for q in qs:
            level[q] = step
        depth = max(depth, step)
        if isinstance(op, Unitary1Q):
            unitaries += 1
            if op.qubit >= base:
                bump(op.qubit - base)
        elif isinstance(op, CnotEE):
            unitaries += 1
            ee += 1
            bump(op.control)
            bump(op.target)
        elif isinstance(op, Emission):
            unitaries += 1
            emissions += 1
            bump(op.emitter)
        elif isinstance(op, MeasureZ):
            run[op.emitter] = 0
        else:
            run[op.emitter] = 0
    return CostReport(
        n_emitters=c.n_emitters,
        ee_cnots=ee,
        unitary_count=unitaries,
        depth=depth,
        emitter_depth=emitter_depth,
        emission_count=emissions,
    )


def circuit_from_ops(n_photons: int, n_emitters: int, ops: Iterable[Op]) -> Circuit:
    c = Circuit(n_photons, n_emitters, tuple(ops))
    c.validate()
    return c
