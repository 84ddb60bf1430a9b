"""Telecorrector circuits and conversion to the native parity-state gate set.

The native set is {Prep0, H, XXp90, MeasZ}.  Circuits are first written with
CNOTs and both preparation/measurement bases, then rewritten: CNOT becomes
H CZ H, |0> preparation becomes |+> then H, Z readout becomes H then X
readout, and finally every gate is conjugated by a Hadamard on each qubit,
which turns CZ into XX'90 (up to a known X x X), |+> into |0> and X readout
into Z readout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..statevec import (
    GateSpec,
    PureState,
    UnsupportedGateError,
    apply_gate,
    apply_h,
    basis_state,
)
from .codes import CssCode, rref

NATIVE = ("Prep0", "H", "XXp90", "MeasZ")
SOURCE = ("Prep0", "PrepPlus", "CNOT", "CZ", "H", "MeasZ", "MeasX")
PREPS = ("Prep0", "PrepPlus")
MEASURES = ("MeasZ", "MeasX")
_ARITY = {"Prep0": 1, "PrepPlus": 1, "H": 1, "Z90": 1, "MeasZ": 1, "MeasX": 1, "CNOT": 2, "CZ": 2, "XXp90": 2}


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    tag: str = ""  # block label of a measurement or preparation
    phase: str = "anc"  # "anc" (offline resource) or "data" (acts on the data)
    byproduct: str = ""  # known Pauli the ideal circuit applies after the gate

    def __post_init__(self):
        if self.kind not in _ARITY:
            raise UnsupportedGateError(f"unknown gate kind {self.kind!r}")
        if len(self.qubits) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind} needs {_ARITY[self.kind]} qubit(s)")


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...]
    blocks: dict[str, tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        for g in self.gates:
            if any(not 0 <= q < self.num_qubits for q in g.qubits):
                raise IndexError(f"gate {g} touches a qubit outside the register")

    def count(self, kind: str, phase: str | None = None) -> int:
        return sum(1 for g in self.gates if g.kind == kind and (phase is None or g.phase == phase))

    @property
    def kinds(self) -> set[str]:
        return {g.kind for g in self.gates}

    def is_native(self) -> bool:
        return self.kinds <= set(NATIVE)

    @cached_property
    def timesteps(self) -> tuple[int, ...]:
        """Layer of each gate.

        Data-phase gates run as early as possible once the resource is
        ready.  Resource gates are pushed as late as possible to cut idle
        time, except measurements, which stay right after their inputs.
        """
        last = [0] * self.num_qubits
        anc_end = 0
        asap = []
        for g in self.gates:
            start = max(last[q] for q in g.qubits)
            if g.phase == "data":
                start = max(start, anc_end)
            t = start + 1
            for q in g.qubits:
                last[q] = t
            if g.phase == "anc":
                anc_end = max(anc_end, t)
            asap.append(t)
        out = list(asap)
        nxt = [anc_end + 1] * self.num_qubits
        for i in reversed(range(len(self.gates))):
            g = self.gates[i]
            if g.phase != "anc":
                continue
            if g.kind not in MEASURES:
                out[i] = min(nxt[q] for q in g.qubits) - 1
            for q in g.qubits:
                nxt[q] = out[i]
        return tuple(out)

    @property
    def depth(self) -> int:
        return max(self.timesteps, default=0)

    def dump(self) -> str:
        lines = [f"{t} {g.kind} {' '.join(map(str, g.qubits))}" for t, g in sorted(zip(self.timesteps, self.gates), key=lambda p: p[0])]
        return "\n".join(lines) + ("\n" if lines else "")


def parse_dump(text: str, num_qubits: int) -> list[tuple[int, str, tuple[int, ...]]]:
    rows = []
    for line in text.splitlines():
        if not line.strip():
            continue
        t, kind, *qs = line.split()
        rows.append((int(t), kind, tuple(int(q) for q in qs)))
        if any(q >= num_qubits for q in rows[-1][2]):
            raise ValueError(f"qubit out of range in line {line!r}")
    return rows


# ----------------------------------------------------------------------
# Gate-set conversion
# ----------------------------------------------------------------------


def _expand(g: Gate) -> list[Gate]:
    def like(kind, qubits, **kw):
        return Gate(kind, qubits, g.tag, g.phase, **kw)

    q = g.qubits
    if g.kind == "Prep0":
        return [like("PrepPlus", q), like("H", q)]
    if g.kind == "MeasZ":
        return [like("H", q), like("MeasX", q)]
    if g.kind == "CNOT":
        return [like("H", q[1:]), like("CZ", q), like("H", q[1:])]
    if g.kind in ("PrepPlus", "MeasX", "CZ", "H"):
        return [g]
    raise UnsupportedGateError(f"cannot convert gate kind {g.kind!r}")


_CONJUGATE = {"PrepPlus": "Prep0", "MeasX": "MeasZ", "H": "H", "CZ": "XXp90"}


def _cancel_hadamards(gates: list[Gate], num_qubits: int) -> list[Gate]:
    keep = [True] * len(gates)
    last: list[int | None] = [None] * num_qubits
    for i, g in enumerate(gates):
        if g.kind == "H":
            j = last[g.qubits[0]]
            if j is not None and gates[j].kind == "H":
                keep[i] = keep[j] = False
                # the qubit's previous surviving gate is unknown now; stop chaining
                last[g.qubits[0]] = None
                continue
        for q in g.qubits:
            last[q] = i
    return [g for g, k in zip(gates, keep) if k]


def convert_gate_set(circuit: Circuit, boundary: bool = False) -> Circuit:
    """Rewrite a circuit over {CNOT, CZ, H, Prep0, PrepPlus, MeasZ, MeasX} natively.

    With ``boundary`` the result carries Hadamards on unprepared inputs and
    unmeasured outputs, so it implements exactly the same operation (up to
    the recorded X x X byproducts).  Without it the native circuit is the
    original conjugated by H on those boundary qubits, which is how the
    telecorrector is used: data and output live in the conjugated basis.
    """
    expanded = [h for g in circuit.gates for h in _expand(g)]
    out: list[Gate] = []
    if boundary:
        first = {}
        for g in expanded:
            for q in g.qubits:
                first.setdefault(q, g)
        for q in range(circuit.num_qubits):
            if q in first and first[q].kind not in PREPS:
                out.append(Gate("H", (q,), phase=first[q].phase))
    for g in expanded:
        kind = _CONJUGATE[g.kind]
        out.append(Gate(kind, g.qubits, g.tag, g.phase, "XX" if kind == "XXp90" else ""))
    if boundary:
        lastg = {}
        for g in expanded:
            for q in g.qubits:
                lastg[q] = g
        for q in range(circuit.num_qubits):
            if q in lastg and lastg[q].kind not in MEASURES:
                out.append(Gate("H", (q,), phase=lastg[q].phase))
    out = _cancel_hadamards(out, circuit.num_qubits)
    return Circuit(circuit.num_qubits, tuple(out), dict(circuit.blocks))


# ----------------------------------------------------------------------
# Dense execution for oracle checks
# ----------------------------------------------------------------------


def run_dense(circuit: Circuit, state: PureState | None = None) -> PureState:
    """Apply a measurement-free circuit to ``state`` (default all |0>).

    Preparations must precede any other gate on their qubit; Prep0 leaves the
    qubit at |0> and PrepPlus rotates it to |+>.  Native XX'90 gates are
    followed by their recorded byproduct.
    """
    if state is None:
        state = basis_state("0" * circuit.num_qubits)
    touched = set()
    for g in circuit.gates:
        if g.kind in MEASURES:
            raise ValueError("run_dense does not handle measurements")
        if g.kind in PREPS:
            (q,) = g.qubits
            if q in touched:
                raise ValueError(f"qubit {q} prepared after use")
            if g.kind == "PrepPlus":
                state = apply_h(state, [q])
        elif g.kind == "XXp90":
            state = apply_gate(state, GateSpec("XXp90", g.qubits))
            if g.byproduct == "XX":
                for q in g.qubits:
                    state = apply_gate(state, GateSpec("PauliX", (q,)))
        else:
            state = apply_gate(state, GateSpec(g.kind, g.qubits))
        touched.update(g.qubits)
    return state


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    n = circuit.num_qubits
    cols = []
    for k in range(2**n):
        cols.append(run_dense(circuit, basis_state(format(k, f"0{n}b"))).amplitudes)
    return np.stack(cols, axis=1)


# ----------------------------------------------------------------------
# Telecorrector
# ----------------------------------------------------------------------


def _encoder(matrix: np.ndarray, qubits: tuple[int, ...], tag: str) -> list[Gate]:
    """Prepare the uniform superposition over the row space of ``matrix``.

    Pivot qubits start in |+> and copy themselves onto the rest of their row.
    """
    red, pivots = rref(matrix)
    gates = []
    for i, q in enumerate(qubits):
        gates.append(Gate("PrepPlus" if i in pivots else "Prep0", (q,), tag))
    for row, p in zip(red, pivots):
        for j in np.nonzero(row)[0]:
            if j != p:
                gates.append(Gate("CNOT", (qubits[p], qubits[j]), tag))
    return gates


def encode_zero(code: CssCode, qubits) -> list[Gate]:
    """|0>_L: uniform superposition over C-perp, the row space of the checks."""
    return _encoder(code.checks, tuple(qubits), "")


def encode_plus(code: CssCode, qubits) -> list[Gate]:
    """|+>_L: uniform superposition over all of C."""
    return _encoder(code.generator, tuple(qubits), "")


def _transversal(kind: str, a, b, phase="anc") -> list[Gate]:
    return [Gate(kind, (p, q), phase=phase) for p, q in zip(a, b)]


def _measure(kind: str, qubits, tag: str, phase="anc") -> list[Gate]:
    return [Gate(kind, (q,), tag, phase) for q in qubits]


def telecorrector_source(code: CssCode) -> Circuit:
    """Knill-style telecorrector over the CNOT gate set.

    Blocks: data (0), A and B form the encoded Bell pair, C checks B for X
    errors and D checks A for Z errors.  The corrected data leaves on B.
    """
    n = code.n
    blocks = {name: tuple(range(k * n, (k + 1) * n)) for k, name in enumerate(("data", "A", "B", "C", "D"))}
    a, b, c, d, data = blocks["A"], blocks["B"], blocks["C"], blocks["D"], blocks["data"]
    gates = []
    gates += [Gate(g.kind, g.qubits, "B") for g in encode_zero(code, b)]
    gates += [Gate(g.kind, g.qubits, "C") for g in encode_zero(code, c)]
    gates += [Gate(g.kind, g.qubits, "A") for g in encode_plus(code, a)]
    gates += [Gate(g.kind, g.qubits, "D") for g in encode_plus(code, d)]
    gates += _transversal("CNOT", b, c)
    gates += _measure("MeasZ", c, "C")
    gates += _transversal("CNOT", d, a)
    gates += _measure("MeasX", d, "D")
    gates += _transversal("CNOT", a, b)
    gates += _transversal("CNOT", data, a, phase="data")
    gates += _measure("MeasX", data, "data", phase="data")
    gates += _measure("MeasZ", a, "A", phase="data")
    return Circuit(5 * n, tuple(gates), blocks)


def _resource_phase(circuit: Circuit) -> Circuit:
    """Mark gates that act only on the resource before it meets the data as resource preparation."""
    data = set(circuit.blocks.get("data", ()))
    met: set[int] = set()
    gates = []
    for g in circuit.gates:
        if any(q in data for q in g.qubits):
            met.update(g.qubits)
        elif g.phase == "data" and not met.intersection(g.qubits):
            g = Gate(g.kind, g.qubits, g.tag, "anc", g.byproduct)
        gates.append(g)
    return Circuit(circuit.num_qubits, tuple(gates), dict(circuit.blocks))


def build_telecorrector(code: CssCode) -> Circuit:
    """Native-gate telecorrector; data and output are in the conjugated basis."""
    return _resource_phase(convert_gate_set(telecorrector_source(code), boundary=False))
