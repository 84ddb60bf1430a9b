"""Pauli frames, noise tables and single-gate propagation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..rates import OpKind, PhysicalNoise, all_rates
from ..statevec import GateSpec, conjugation_table
from .circuit import Gate

Triple = tuple[float, float, float]  # (located, x_unlocated, z_unlocated)


def _symplectic(kind: str) -> np.ndarray:
    """Binary map on (x_0, z_0, x_1, z_1, ...) taken from dense conjugation."""
    spec = GateSpec(kind, (0,) if kind == "H" else (0, 1))
    table = conjugation_table(spec)
    k = spec.arity
    m = np.zeros((2 * k, 2 * k), dtype=np.uint8)
    for q in range(k):
        for comp, letter in ((0, "X"), (1, "Z")):
            label = ["I"] * k
            label[q] = letter
            out, _ = table["".join(label)]
            for j, ch in enumerate(out):
                m[2 * j, 2 * q + comp] = ch in "XY"
                m[2 * j + 1, 2 * q + comp] = ch in "ZY"
    return m


SYMPLECTIC = {"H": _symplectic("H"), "XXp90": _symplectic("XXp90")}


@dataclass
class PauliFrame:
    """Pending X/Z errors and erasure flags of one sample, as bit masks."""

    num_qubits: int
    x_mask: int = 0
    z_mask: int = 0
    located_mask: int = 0

    def bits(self, q: int) -> tuple[int, int, int]:
        return (self.x_mask >> q) & 1, (self.z_mask >> q) & 1, (self.located_mask >> q) & 1

    def set(self, q: int, x: int, z: int, loc: int) -> None:
        bit = 1 << q
        self.x_mask = (self.x_mask & ~bit) | (x << q)
        self.z_mask = (self.z_mask & ~bit) | (z << q)
        self.located_mask = (self.located_mask & ~bit) | (loc << q)

    def copy(self) -> PauliFrame:
        return PauliFrame(self.num_qubits, self.x_mask, self.z_mask, self.located_mask)


@dataclass(frozen=True)
class NoiseTables:
    """Level rates per native operation, plus idle and incoming-data noise."""

    prep: Triple
    h: Triple
    xx: Triple
    meas: Triple
    memory: Triple
    data: Triple
    mode: str = "physical"
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("prep", "h", "xx", "meas", "memory", "data"):
            t = getattr(self, name)
            if len(t) != 3 or any(not 0 <= p <= 1 for p in t):
                raise ValueError(f"{name} rates must be three probabilities, got {t}")

    def for_kind(self, kind: str) -> Triple:
        return {"Prep0": self.prep, "H": self.h, "XXp90": self.xx, "MeasZ": self.meas}[kind]

    def scaled(self, factor: float) -> NoiseTables:
        def sc(t):
            return tuple(min(1.0, factor * p) for p in t)

        return NoiseTables(sc(self.prep), sc(self.h), sc(self.xx), sc(self.meas), sc(self.memory), sc(self.data), self.mode)

    @classmethod
    def from_physical(cls, noise: PhysicalNoise) -> NoiseTables:
        r = all_rates(noise)
        # H is built from X90 Z90 X90, so it inherits the Z90 rates
        return cls(
            prep=r[OpKind.SOURCE_PREP].as_tuple(),
            h=r[OpKind.Z90].as_tuple(),
            xx=r[OpKind.XX90].as_tuple(),
            meas=r[OpKind.MEASUREMENT].as_tuple(),
            memory=r[OpKind.MEMORY].as_tuple(),
            data=r[OpKind.XX90].as_tuple(),
            mode="physical",
        )

    @classmethod
    def uniform(cls, rates: Triple) -> NoiseTables:
        t = tuple(float(p) for p in rates)
        return cls(t, t, t, t, t, t, mode="abstract")

    @classmethod
    def zero(cls) -> NoiseTables:
        return cls.uniform((0.0, 0.0, 0.0))


def _inject(frame: PauliFrame, q: int, rates: Triple, rng: np.random.Generator) -> None:
    loc_p, x_p, z_p = rates
    x, z, loc = frame.bits(q)
    x ^= int(rng.random() < x_p)
    z ^= int(rng.random() < z_p)
    if rng.random() < loc_p:
        loc = 1
        x ^= int(rng.random() < 0.5)
        z ^= int(rng.random() < 0.5)
    frame.set(q, x, z, loc)


def conjugate(frame: PauliFrame, gate: Gate) -> PauliFrame:
    """Push the frame through a Clifford gate without adding noise."""
    out = frame.copy()
    if gate.kind not in SYMPLECTIC:
        return out
    m = SYMPLECTIC[gate.kind]
    vec = []
    for q in gate.qubits:
        x, z, _ = frame.bits(q)
        vec += [x, z]
    new = (m.astype(int) @ np.array(vec)) % 2
    loc = max(frame.bits(q)[2] for q in gate.qubits)
    for j, q in enumerate(gate.qubits):
        # an erased input may have spread onto its partner, so both are flagged
        out.set(q, int(new[2 * j]), int(new[2 * j + 1]), loc if gate.kind == "XXp90" else frame.bits(q)[2])
    return out


def propagate(frame: PauliFrame, gate: Gate, noise: NoiseTables, rng: np.random.Generator) -> PauliFrame:
    """Conjugate the frame through ``gate`` and inject that gate's noise.

    Preparation resets the qubit; measurement noise is injected before the
    read-out so it shows in the recorded bit.  Each output of an XX'90 gets
    independent noise.
    """
    if gate.kind == "Prep0":
        out = frame.copy()
        out.set(gate.qubits[0], 0, 0, 0)
    else:
        out = conjugate(frame, gate)
    rates = noise.for_kind(gate.kind)
    for q in gate.qubits:
        _inject(out, q, rates, rng)
    return out
