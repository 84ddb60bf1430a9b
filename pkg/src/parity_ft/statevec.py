"""Dense state-vector oracle for parity-encoded linear-optical circuits.

Qubit 0 is the most significant bit of the basis index, so ``|q0 q1 ... >``
reads left to right.  Fusion gates are modelled as the qubit-level
measurements they implement; photon loss is not represented here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 14
NORM_TOL = 1e-12
CODE_SPACE_TOL = 1e-9

SQRT2 = np.sqrt(2.0)

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / SQRT2

PAULI_MATRICES = {"I": _I, "X": _X, "Y": _Y, "Z": _Z}


class StateSizeError(ValueError):
    """Register size outside what the dense simulator supports."""


class CodeSpaceError(ValueError):
    """A block that should be parity-encoded has weight outside the code space."""


class UnsupportedGateError(ValueError):
    pass


class ResourceMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class PureState:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.num_qubits < 0 or self.num_qubits > MAX_QUBITS:
            raise StateSizeError(f"{self.num_qubits} qubits exceeds the dense limit of {MAX_QUBITS}")
        if amps.shape[0] != 2**self.num_qubits:
            raise StateSizeError("amplitude vector length does not match qubit count")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self, other: PureState) -> PureState:
        return PureState(self.num_qubits + other.num_qubits, np.kron(self.amplitudes, other.amplitudes))

    def normalized(self) -> PureState:
        return PureState(self.num_qubits, self.amplitudes / self.norm)

    def permuted(self, order: Sequence[int]) -> PureState:
        """Reorder qubits so that new qubit ``k`` is old qubit ``order[k]``."""
        t = self.amplitudes.reshape([2] * self.num_qubits)
        return PureState(self.num_qubits, np.transpose(t, order).reshape(-1))


def basis_state(bits: str) -> PureState:
    amps = np.zeros(2 ** len(bits), dtype=complex)
    amps[int(bits, 2) if bits else 0] = 1.0
    return PureState(len(bits), amps)


def product_state(*states: PureState) -> PureState:
    out = PureState(0, np.ones(1, dtype=complex))
    for s in states:
        out = out.tensor(s)
    return out


def fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>|^2 for normalized inputs; global phase is ignored."""
    if a.num_qubits != b.num_qubits:
        return 0.0
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-10) -> bool:
    """Phase-aligned comparison of two vectors or matrices."""
    a = np.asarray(a, dtype=complex).reshape(-1)
    b = np.asarray(b, dtype=complex).reshape(-1)
    if a.shape != b.shape:
        return False
    k = int(np.argmax(np.abs(b)))
    if abs(b[k]) < atol:
        return bool(np.allclose(a, b, atol=atol))
    if abs(a[k]) < atol:
        return False
    phase = a[k] / b[k]
    phase /= abs(phase)
    return bool(np.max(np.abs(a - phase * b)) < atol)


# ----------------------------------------------------------------------
# Parity code
# ----------------------------------------------------------------------


def make_parity_state(n: int, logical: int) -> PureState:
    """|0>^(n) or |1>^(n): equal superposition of even (odd) parity strings."""
    if not 1 <= n <= MAX_QUBITS:
        raise StateSizeError(f"parity state size must be in [1, {MAX_QUBITS}], got {n}")
    if logical not in (0, 1):
        raise ValueError("logical must be 0 or 1")
    idx = np.arange(2**n)
    parity = np.array([bin(i).count("1") & 1 for i in idx])
    amps = np.where(parity == logical, 2.0 ** (-(n - 1) / 2), 0.0).astype(complex)
    return PureState(n, amps)


def encode_parity(alpha: complex, beta: complex, n: int) -> PureState:
    amps = alpha * make_parity_state(n, 0).amplitudes + beta * make_parity_state(n, 1).amplitudes
    return PureState(n, amps)


def encode_blocks(logical: np.ndarray, sizes: Sequence[int]) -> PureState:
    """Encode a k-qubit logical vector into k parity blocks of the given sizes."""
    logical = np.asarray(logical, dtype=complex).reshape(-1)
    k = len(sizes)
    if logical.shape[0] != 2**k:
        raise StateSizeError("logical vector length does not match the number of blocks")
    if sum(sizes) > MAX_QUBITS:
        raise StateSizeError("encoded register exceeds the dense limit")
    amps = np.zeros(2 ** sum(sizes), dtype=complex)
    for idx, bits in enumerate(itertools.product((0, 1), repeat=k)):
        if logical[idx] == 0:
            continue
        term = np.ones(1, dtype=complex)
        for b, n in zip(bits, sizes):
            term = np.kron(term, make_parity_state(n, b).amplitudes)
        amps += logical[idx] * term
    return PureState(sum(sizes), amps)


def logical_amplitudes(state: PureState, sizes: Sequence[int]) -> np.ndarray:
    """Project consecutive parity blocks onto the logical basis.

    Raises CodeSpaceError if more than ``CODE_SPACE_TOL`` of the weight lies
    outside the tensor product of the block code spaces.
    """
    if sum(sizes) != state.num_qubits:
        raise StateSizeError("block sizes do not cover the register")
    k = len(sizes)
    out = np.zeros(2**k, dtype=complex)
    for idx, bits in enumerate(itertools.product((0, 1), repeat=k)):
        term = np.ones(1, dtype=complex)
        for b, n in zip(bits, sizes):
            term = np.kron(term, make_parity_state(n, b).amplitudes)
        out[idx] = np.vdot(term, state.amplitudes)
    residual = state.norm**2 - float(np.sum(np.abs(out) ** 2))
    if residual > CODE_SPACE_TOL:
        raise CodeSpaceError(f"weight {residual:.3e} outside the parity code space")
    return out


def logical_readout(state: PureState) -> tuple[complex, complex]:
    amps = logical_amplitudes(state, [state.num_qubits])
    return complex(amps[0]), complex(amps[1])


# ----------------------------------------------------------------------
# Gates
# ----------------------------------------------------------------------

_ARITY = {
    "X_theta": 1, "Z_theta": 1, "H": 1, "PauliX": 1, "PauliY": 1, "PauliZ": 1,
    "XX90": 2, "XXp90": 2, "CNOT": 2, "CZ": 2,
}


@dataclass(frozen=True)
class GateSpec:
    kind: str
    targets: tuple[int, ...]
    theta: float | None = None

    def __post_init__(self):
        if self.kind not in _ARITY:
            raise UnsupportedGateError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if len(self.targets) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind} acts on {_ARITY[self.kind]} qubit(s), got {len(self.targets)}")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError("gate targets must be distinct")
        if self.kind in ("X_theta", "Z_theta") and self.theta is None:
            raise ValueError(f"{self.kind} needs an angle")

    @property
    def arity(self) -> int:
        return _ARITY[self.kind]


def x_rotation(theta: float) -> np.ndarray:
    """X_theta = cos(theta/2) I + i sin(theta/2) X."""
    return np.cos(theta / 2) * _I + 1j * np.sin(theta / 2) * _X


def z_rotation(theta: float) -> np.ndarray:
    return np.cos(theta / 2) * _I + 1j * np.sin(theta / 2) * _Z


XX90_MATRIX = (np.eye(4) - 1j * np.kron(_X, _X)) / SQRT2
XXP90_MATRIX = np.kron(x_rotation(-np.pi / 2), x_rotation(-np.pi / 2)) @ XX90_MATRIX
CNOT_MATRIX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CZ_MATRIX = np.diag([1, 1, 1, -1]).astype(complex)


def gate_matrix(gate: GateSpec) -> np.ndarray:
    kind = gate.kind
    if kind == "X_theta":
        return x_rotation(gate.theta)
    if kind == "Z_theta":
        return z_rotation(gate.theta)
    return {
        "H": _H, "PauliX": _X, "PauliY": _Y, "PauliZ": _Z,
        "XX90": XX90_MATRIX, "XXp90": XXP90_MATRIX, "CNOT": CNOT_MATRIX, "CZ": CZ_MATRIX,
    }[kind]


def apply_matrix(state: PureState, matrix: np.ndarray, targets: Sequence[int]) -> PureState:
    n = state.num_qubits
    targets = list(targets)
    for t in targets:
        if not 0 <= t < n:
            raise IndexError(f"qubit {t} out of range for {n}-qubit state")
    k = len(targets)
    tensor = state.amplitudes.reshape([2] * n)
    u = np.asarray(matrix, dtype=complex).reshape([2] * (2 * k))
    tensor = np.tensordot(u, tensor, axes=(list(range(k, 2 * k)), targets))
    tensor = np.moveaxis(tensor, list(range(k)), targets)
    return PureState(n, tensor.reshape(-1))


def apply_gate(state: PureState, gate: GateSpec) -> PureState:
    return apply_matrix(state, gate_matrix(gate), gate.targets)


def apply_paulis(state: PureState, paulis: dict[int, str]) -> PureState:
    for q, p in sorted(paulis.items()):
        if p != "I":
            state = apply_matrix(state, PAULI_MATRICES[p], [q])
    return state


def apply_h(state: PureState, qubits: Iterable[int]) -> PureState:
    for q in qubits:
        state = apply_matrix(state, _H, [q])
    return state


# ----------------------------------------------------------------------
# Measurements and fusion gates
# ----------------------------------------------------------------------


class FusionOutcome(str, Enum):
    SUCCESS_PLUS = "SuccessPlus"
    SUCCESS_MINUS = "SuccessMinus"
    FAILURE_A = "FailureA"  # measured |01>
    FAILURE_B = "FailureB"  # measured |10>

    @property
    def success(self) -> bool:
        return self in (FusionOutcome.SUCCESS_PLUS, FusionOutcome.SUCCESS_MINUS)


@dataclass
class FusionResult:
    """One measurement branch of a fusion gate.

    ``post_state`` is unnormalized-then-normalized (norm 1); ``probability``
    carries the branch weight.  ``pauli_byproduct`` maps post-state qubit
    indices to the Pauli that brings this branch onto the canonical one
    (SuccessPlus for successes, both-zero for failures); it is only filled
    when the caller supplies the parity blocks of the fused qubits.
    """

    outcome: FusionOutcome
    probability: float
    post_state: PureState | None
    pauli_byproduct: dict[int, str] = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return self.outcome.success

    def corrected_state(self) -> PureState | None:
        if self.post_state is None:
            return None
        return apply_paulis(self.post_state, self.pauli_byproduct)


def _remaining_index(old: int, removed: Sequence[int]) -> int:
    return old - sum(1 for r in removed if r < old)


def _project_pair(state: PureState, q1: int, q2: int, bra: np.ndarray, keep: np.ndarray | None = None) -> np.ndarray:
    """Contract qubits (q1, q2) against a two-qubit bra.

    With ``keep`` given (a 2x4 map), the pair is replaced by a single qubit at
    the position of q1 instead of being removed.
    """
    n = state.num_qubits
    t = np.moveaxis(state.amplitudes.reshape([2] * n), [q1, q2], [0, 1]).reshape(4, -1)
    if keep is None:
        return (np.conj(bra) @ t).reshape(-1)
    out = (keep @ t).reshape([2] + [2] * (n - 2))
    pos = q1 - (1 if q2 < q1 else 0)
    return np.moveaxis(out, 0, pos).reshape(-1)


def _check_pair(state: PureState, q1: int, q2: int) -> None:
    if q1 == q2:
        raise ValueError("fusion needs two distinct qubits")
    for q in (q1, q2):
        if not 0 <= q < state.num_qubits:
            raise IndexError(f"qubit {q} out of range for {state.num_qubits}-qubit state")


def _branch(outcome: FusionOutcome, vec: np.ndarray, n_out: int, byproduct: dict[int, str]) -> FusionResult:
    prob = float(np.sum(np.abs(vec) ** 2))
    post = PureState(n_out, vec / np.sqrt(prob)) if prob > 1e-15 else None
    return FusionResult(outcome, prob, post, byproduct)


def _failure_byproducts(blocks, q1, q2, removed, pauli: str, transversal: bool) -> dict[FusionOutcome, dict[int, str]]:
    out: dict[FusionOutcome, dict[int, str]] = {FusionOutcome.FAILURE_A: {}, FusionOutcome.FAILURE_B: {}}
    if blocks is None:
        return out
    rest1 = [q for q in blocks[0] if q != q1]
    rest2 = [q for q in blocks[1] if q != q2]
    for outcome, rest in ((FusionOutcome.FAILURE_A, rest2), (FusionOutcome.FAILURE_B, rest1)):
        targets = rest if transversal else rest[:1]
        out[outcome] = {_remaining_index(q, removed): pauli for q in targets}
    return out


def fuse_type2(state: PureState, q1: int, q2: int, blocks: tuple[Sequence[int], Sequence[int]] | None = None) -> list[FusionResult]:
    """Destructive measurement of (q1, q2) in {|00>+|11>, |00>-|11>, |01>, |10>}.

    ``blocks`` optionally names the parity blocks (pre-fusion indices) that
    contain q1 and q2, enabling byproduct bookkeeping: SuccessMinus needs a
    logical Z (transversal Z on the rest of q2's block) and a failure needs a
    logical X on whichever block measured 1.
    """
    _check_pair(state, q1, q2)
    removed = [q1, q2]
    n_out = state.num_qubits - 2
    minus_fix: dict[int, str] = {}
    if blocks is not None:
        minus_fix = {_remaining_index(q, removed): "Z" for q in blocks[1] if q != q2}
    fail_fix = _failure_byproducts(blocks, q1, q2, removed, "X", transversal=False)
    bras = {
        FusionOutcome.SUCCESS_PLUS: np.array([1, 0, 0, 1]) / SQRT2,
        FusionOutcome.SUCCESS_MINUS: np.array([1, 0, 0, -1]) / SQRT2,
        FusionOutcome.FAILURE_A: np.array([0, 1, 0, 0]),
        FusionOutcome.FAILURE_B: np.array([0, 0, 1, 0]),
    }
    fixes = {FusionOutcome.SUCCESS_PLUS: {}, FusionOutcome.SUCCESS_MINUS: minus_fix, **fail_fix}
    return [_branch(o, _project_pair(state, q1, q2, bra), n_out, fixes[o]) for o, bra in bras.items()]


def fuse_type1(state: PureState, q1: int, q2: int, blocks: tuple[Sequence[int], Sequence[int]] | None = None) -> list[FusionResult]:
    """Partial Bell measurement: |0><00| +- |1><11| on success, else {|01>,|10>}.

    The surviving qubit of a success sits where q1 was.  Failure byproducts
    assume the Hadamard-dressed join (qubits rotated before fusion), where a
    measured 1 leaves the rest of that block in |->^k; the fix is transversal Z.
    """
    _check_pair(state, q1, q2)
    n_out_s = state.num_qubits - 1
    merged = q1 - (1 if q2 < q1 else 0)
    keep_plus = np.array([[1, 0, 0, 0], [0, 0, 0, 1]], dtype=complex)
    keep_minus = np.array([[1, 0, 0, 0], [0, 0, 0, -1]], dtype=complex)
    fail_fix = _failure_byproducts(blocks, q1, q2, [q1, q2], "Z", transversal=True)
    return [
        _branch(FusionOutcome.SUCCESS_PLUS, _project_pair(state, q1, q2, None, keep_plus) / SQRT2, n_out_s, {}),
        _branch(FusionOutcome.SUCCESS_MINUS, _project_pair(state, q1, q2, None, keep_minus) / SQRT2, n_out_s, {merged: "Z"}),
        _branch(FusionOutcome.FAILURE_A, _project_pair(state, q1, q2, np.array([0, 1, 0, 0])), state.num_qubits - 2, fail_fix[FusionOutcome.FAILURE_A]),
        _branch(FusionOutcome.FAILURE_B, _project_pair(state, q1, q2, np.array([0, 0, 1, 0])), state.num_qubits - 2, fail_fix[FusionOutcome.FAILURE_B]),
    ]


def join_type1(state: PureState, q1: int, q2: int, blocks=None) -> list[FusionResult]:
    """Hadamard-dressed type-I join: H on q1, q2, fuse, then H on the survivor.

    On success-minus the byproduct Z on the survivor becomes X after the final
    Hadamard, so it is rewritten accordingly.
    """
    dressed = apply_h(state, [q1, q2])
    results = fuse_type1(dressed, q1, q2, blocks)
    merged = q1 - (1 if q2 < q1 else 0)
    for r in results:
        if r.success and r.post_state is not None:
            r.post_state = apply_h(r.post_state, [merged])
            r.pauli_byproduct = {merged: "X"} if r.outcome is FusionOutcome.SUCCESS_MINUS else {}
    return results


def measure_z(state: PureState, q: int) -> list[tuple[int, float, PureState | None]]:
    """Computational-basis measurement of one qubit; the qubit is removed."""
    if not 0 <= q < state.num_qubits:
        raise IndexError(f"qubit {q} out of range")
    t = np.moveaxis(state.amplitudes.reshape([2] * state.num_qubits), q, 0).reshape(2, -1)
    out = []
    for bit in (0, 1):
        vec = t[bit].reshape(-1)
        p = float(np.sum(np.abs(vec) ** 2))
        out.append((bit, p, PureState(state.num_qubits - 1, vec / np.sqrt(p)) if p > 1e-15 else None))
    return out


def measure_z_many(state: PureState, qubits: Sequence[int]) -> list[tuple[tuple[int, ...], float, PureState | None]]:
    """Measure several qubits in the computational basis; all are removed."""
    qubits = list(qubits)
    n = state.num_qubits
    t = np.moveaxis(state.amplitudes.reshape([2] * n), qubits, list(range(len(qubits))))
    t = t.reshape(2 ** len(qubits), -1)
    out = []
    for idx, bits in enumerate(itertools.product((0, 1), repeat=len(qubits))):
        vec = t[idx]
        p = float(np.sum(np.abs(vec) ** 2))
        out.append((bits, p, PureState(n - len(qubits), vec / np.sqrt(p)) if p > 1e-15 else None))
    return out


def factor_out(state: PureState, keep: Sequence[int], tol: float = 1e-10) -> PureState:
    """Return the factor on ``keep`` of a product state (keep) x (rest)."""
    keep = list(keep)
    rest = [q for q in range(state.num_qubits) if q not in keep]
    t = np.transpose(state.amplitudes.reshape([2] * state.num_qubits), keep + rest)
    m = t.reshape(2 ** len(keep), -1)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if len(s) > 1 and s[1] > tol:
        raise ValueError("requested subsystem is entangled with the rest")
    return PureState(len(keep), u[:, 0] * s[0])


# ----------------------------------------------------------------------
# R_XX resource and gate teleportation
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ResourceRecipe:
    """Fusion schedule that grows an R_XX resource from small parity states.

    ``pieces`` lists the starting states: "bell" is |0>^(2), "z3" is |0>^(3)
    and "x3" is |0>^(3) with a transversal Hadamard.  Each fusion is a
    type-II fusion between two labelled qubits, post-selected on success.
    ``outputs`` lists the surviving labels in resource order and
    ``hadamards`` the output positions that get a final Hadamard.
    """

    pieces: tuple[str, ...]
    fusions: tuple[tuple[tuple[int, int], tuple[int, int]], ...]
    outputs: tuple[tuple[int, int], ...]
    hadamards: tuple[int, ...]

    @property
    def bell_pairs(self) -> int:
        return sum(1 if p == "bell" else 2 for p in self.pieces)

    @property
    def fusion_count(self) -> int:
        """All fusions, including the type-I joins that grow each 3-qubit piece."""
        return len(self.fusions) + sum(1 for p in self.pieces if p != "bell")


RXX_RECIPES = {
    False: ResourceRecipe(
        pieces=("bell", "x3", "z3", "bell"),
        fusions=(((0, 0), (1, 0)), ((0, 1), (2, 0)), ((1, 1), (3, 0))),
        outputs=((1, 2), (3, 1), (2, 1), (2, 2)),
        hadamards=(0, 1),
    ),
    True: ResourceRecipe(
        pieces=("x3", "x3", "z3", "z3"),
        fusions=(((0, 0), (1, 0)), ((0, 1), (2, 0)), ((2, 1), (3, 0))),
        outputs=((0, 2), (1, 1), (1, 2), (2, 2), (3, 1), (3, 2)),
        hadamards=(0, 1, 2),
    ),
}


def rxx_target(long_ends: bool = False) -> PureState:
    """Closed form of the resource: 1/2[|++>(|00>+|11>) + |-->(|01>+|10>)].

    With long ends the first and fourth qubits become two-qubit parity blocks,
    giving qubit order (1a, 1b, 2, 3, 4a, 4b).
    """
    plus = np.array([1, 1]) / SQRT2
    minus = np.array([1, -1]) / SQRT2
    phi = np.array([1, 0, 0, 1]) / SQRT2
    psi = np.array([0, 1, 1, 0]) / SQRT2
    amps = (np.kron(np.kron(plus, plus), phi) + np.kron(np.kron(minus, minus), psi)) / SQRT2
    state = PureState(4, amps)
    if long_ends:
        state = _parity_encode_qubit(_parity_encode_qubit(state, 3), 0)
    return state


def _parity_encode_qubit(state: PureState, q: int) -> PureState:
    """Replace qubit q by a length-2 parity block at (q, q+1)."""
    n = state.num_qubits
    t = state.amplitudes.reshape([2] * n)
    new = np.zeros([2] * (n + 1), dtype=complex)
    for b in (0, 1):
        for c in (0, 1):
            old_idx = [slice(None)] * n
            old_idx[q] = b
            new_idx = [slice(None)] * (n + 1)
            new_idx[q] = c
            new_idx[q + 1] = c ^ b
            new[tuple(new_idx)] = t[tuple(old_idx)] / SQRT2
    return PureState(n + 1, new.reshape(-1))


def three_qubit_parity_from_bells() -> tuple[PureState, int, int]:
    """|0>^(3) grown from two Bell pairs by one Hadamard-dressed type-I join."""
    bells = product_state(make_parity_state(2, 0), make_parity_state(2, 0))
    branch = next(r for r in join_type1(bells, 1, 2, blocks=([0, 1], [2, 3])) if r.outcome is FusionOutcome.SUCCESS_PLUS)
    return branch.post_state, 2, 1


def build_rxx(long_ends: bool = False) -> PureState:
    """Grow R_XX by fusion, post-selected on every fusion succeeding."""
    recipe = RXX_RECIPES[long_ends]
    grown, _, _ = three_qubit_parity_from_bells()
    piece_states = {"bell": make_parity_state(2, 0), "z3": grown, "x3": apply_h(grown, range(3))}
    state = product_state(*(piece_states[p] for p in recipe.pieces))
    labels = [(k, i) for k, p in enumerate(recipe.pieces) for i in range(piece_states[p].num_qubits)]
    for left, right in recipe.fusions:
        branch = fuse_type2(state, labels.index(left), labels.index(right))[0]
        state = branch.post_state
        labels = [lab for lab in labels if lab not in (left, right)]
    state = state.permuted([labels.index(w) for w in recipe.outputs])
    return apply_h(state, recipe.hadamards).normalized()


@dataclass
class TeleportBranch:
    """One outcome pattern of the teleported XX'90, byproducts already corrected."""

    outcomes: tuple[FusionOutcome, FusionOutcome]
    measured: tuple[int, ...]
    probability: float
    post_state: PureState | None
    block_sizes: tuple[int, ...]

    @property
    def gate_applied(self) -> bool:
        return self.outcomes[0].success and self.outcomes[1].success


# resource-local (end qubit 1, end qubit 2, outputs joining block 1, outputs joining block 2)
_RXX_LAYOUT = {4: (0, 3, (1,), (2,)), 6: (0, 4, (1, 2), (3, 5))}
_PROBE_SEED = 20240611
_CORRECTIONS: dict[tuple, tuple[tuple[str, ...], int, tuple[str, str]]] = {}


def _logical_pauli(state: PureState, blocks: Sequence[Sequence[int]], labels: Sequence[str]) -> PureState:
    """Physical implementation of logical Paulis: X on one qubit, Z transversally."""
    for block, lab in zip(blocks, labels):
        if lab in ("X", "Y"):
            state = apply_matrix(state, _X, [block[0]])
        if lab in ("Z", "Y"):
            for q in block:
                state = apply_matrix(state, _Z, [q])
    return state


def _raw_teleport(state, n1, n2, resource, o1, o2, bases):
    """Unnormalized fusion branch, before any byproduct correction.

    Returns (bits, prob, post, sizes, physical) tuples where ``physical``
    lists post-state positions of adopted resource qubits.
    """
    end1, end2, out1, out2 = _RXX_LAYOUT[resource.num_qubits]
    off = n1 + n2
    full = state.tensor(resource)
    a, b, r1, r2 = n1 - 1, n1 + n2 - 1, off + end1, off + end2
    rem1 = list(range(n1 - 1))
    rem2 = list(range(n1, n1 + n2 - 1))
    ex1 = [off + e for e in out1]
    ex2 = [off + e for e in out2]
    n = full.num_qubits
    vec = _fusion_vec(full, a, r1, o1)
    labels = [q for q in range(n) if q not in (a, r1)]
    vec = _fusion_vec(PureState(n - 2, vec), labels.index(b), labels.index(r2), o2)
    labels = [q for q in labels if q not in (b, r2)]
    prob = float(np.sum(np.abs(vec) ** 2))
    if prob < 1e-15:
        return []
    post = PureState(len(labels), vec / np.sqrt(prob))
    if o1.success and o2.success:
        block1, block2 = rem1 + ex1, rem2 + ex2
        order = block1 + block2
        out = post.permuted([labels.index(q) for q in order])
        physical = [order.index(q) for q in ex1 + ex2]
        return [((), prob, out, (len(block1), len(block2)), physical)]
    if not o1.success and not o2.success:
        keep = rem1 + rem2
        if not rem1 or not rem2:
            return [((), prob, None, (len(rem1), len(rem2)), [])]
        out = factor_out(post, [labels.index(q) for q in keep]).normalized()
        return [((), prob, out, (len(rem1), len(rem2)), [])]
    if o1.success:
        adopt, discard, order = ex1, ex2, rem1 + ex1 + rem2
        sizes = (len(rem1) + len(ex1), len(rem2))
    else:
        adopt, discard, order = ex2, ex1, rem1 + rem2 + ex2
        sizes = (len(rem1), len(rem2) + len(ex2))
    rotated = apply_h(post, [labels.index(q) for q, basis in zip(discard, bases) if basis == "X"])
    results = []
    for bits, p, reduced in measure_z_many(rotated, [labels.index(q) for q in discard]):
        if reduced is None:
            continue
        if 0 in sizes:
            results.append((bits, prob * p, None, sizes, []))
            continue
        left = [q for q in labels if q not in discard]
        out = reduced.permuted([left.index(q) for q in order])
        results.append((bits, prob * p, out, sizes, [order.index(q) for q in adopt]))
    return results


def _find_correction(post: PureState, sizes, physical, target) -> tuple[int, tuple[str, str]] | None:
    """(Z mask over adopted resource qubits, logical Pauli per block) mapping post onto target."""
    blocks = [list(range(sizes[0])), list(range(sizes[0], sizes[0] + sizes[1]))]
    for zmask in range(2 ** len(physical)):
        trial = post
        for k, q in enumerate(physical):
            if zmask >> k & 1:
                trial = apply_matrix(trial, _Z, [q])
        try:
            amps = logical_amplitudes(trial, sizes)
        except CodeSpaceError:
            continue
        for l1 in _PAULI_LABELS:
            for l2 in _PAULI_LABELS:
                m = np.kron(PAULI_MATRICES[l1], PAULI_MATRICES[l2])
                if equal_up_to_phase(m @ amps, target, atol=1e-9):
                    return zmask, (l1, l2)
    return None


def _teleport_corrections(n1: int, n2: int, resource: PureState, o1, o2):
    """Derive discard bases and byproduct corrections once, from a fixed probe input.

    Corrections depend only on the classical outcomes, so a table built from
    one generic logical state must hold for every input.
    """
    key = (n1, n2, resource.num_qubits, o1, o2)
    if key in _CORRECTIONS:
        return _CORRECTIONS[key]
    rng = np.random.default_rng(_PROBE_SEED)
    probe = rng.normal(size=4) + 1j * rng.normal(size=4)
    probe /= np.linalg.norm(probe)
    target = XXP90_MATRIX @ probe if (o1.success and o2.success) else probe
    n_discard = 0 if o1.success == o2.success else len(_RXX_LAYOUT[resource.num_qubits][3 if o1.success else 2])
    inp = encode_blocks(probe, [n1, n2])
    for bases in itertools.product("ZX", repeat=n_discard):
        table = {}
        for bits, _, post, sizes, physical in _raw_teleport(inp, n1, n2, resource, o1, o2, bases):
            if post is None:
                table[bits] = None
                continue
            fix = _find_correction(post, sizes, physical, target)
            if fix is None:
                break
            table[bits] = fix
        else:
            _CORRECTIONS[key] = (bases, table)
            return _CORRECTIONS[key]
    raise CodeSpaceError("no byproduct correction found for this teleportation branch")


def _fusion_vec(state, q1, q2, outcome):
    bra = {
        FusionOutcome.SUCCESS_PLUS: np.array([1, 0, 0, 1]) / SQRT2,
        FusionOutcome.SUCCESS_MINUS: np.array([1, 0, 0, -1]) / SQRT2,
        FusionOutcome.FAILURE_A: np.array([0, 1, 0, 0]),
        FusionOutcome.FAILURE_B: np.array([0, 0, 1, 0]),
    }[outcome]
    return _project_pair(state, q1, q2, bra)


def teleport_xx(state: PureState, n1: int, n2: int, resource: PureState) -> list[TeleportBranch]:
    """Teleport an encoded XX'90 through R_XX using two type-II fusions.

    ``state`` holds two consecutive parity blocks of sizes n1 and n2.  The
    last physical qubit of each block is fused with an end qubit of the
    resource.  Byproducts are corrected from the fusion outcomes alone, so:

    * both succeed: each block swaps its fused qubit for the resource outputs
      on its side and the pair carries XX'90 of the logical input;
    * both fail: blocks shrink to (n1-1, n2-1), logical input intact;
    * one fails: the failed block shrinks by one, the other adopts the
      resource outputs on its side (the rest are measured out), and the
      logical input is intact so the gate can be re-attempted.

    Branches where a block is used up carry ``post_state=None``.
    """
    if state.num_qubits != n1 + n2:
        raise StateSizeError("block sizes do not match the input register")
    if resource.num_qubits not in _RXX_LAYOUT or fidelity(resource.normalized(), rxx_target(resource.num_qubits == 6)) < 1 - 1e-10:
        raise ResourceMismatchError("resource is not an R_XX state")
    if n1 + n2 + resource.num_qubits > MAX_QUBITS:
        raise StateSizeError("input plus resource exceeds the dense limit")
    branches = []
    for o1 in FusionOutcome:
        for o2 in FusionOutcome:
            bases, table = _teleport_corrections(n1, n2, resource, o1, o2)
            for bits, prob, post, sizes, physical in _raw_teleport(state, n1, n2, resource, o1, o2, bases):
                fix = table.get(bits)
                if post is not None and fix is not None:
                    zmask, labels = fix
                    for k, q in enumerate(physical):
                        if zmask >> k & 1:
                            post = apply_matrix(post, _Z, [q])
                    blocks = [list(range(sizes[0])), list(range(sizes[0], sum(sizes)))]
                    post = _logical_pauli(post, blocks, labels)
                elif post is not None:
                    post = None
                branches.append(TeleportBranch((o1, o2), bits, prob, post, sizes))
    return branches


_PAULI_LABELS = ("I", "X", "Y", "Z")


# ----------------------------------------------------------------------
# Re-encoding and the encoded Z90 gate
# ----------------------------------------------------------------------


@dataclass
class ReencodeBranch:
    fusion_outcome: FusionOutcome
    measured: tuple[int, ...]
    probability: float
    post_state: PureState
    correction: str  # logical correction applied: "I", "X", "Y" or "Z"


def reencode_z90(state: PureState, ancilla: PureState | None = None, apply_z90: bool = True) -> list[ReencodeBranch]:
    """Re-encode a parity block onto a fresh |0>^(n+1) ancilla.

    The last qubit of the block is the fusion input.  With ``apply_z90`` the
    un-encoded Z90 acts on it first, so successful branches carry logical
    Z90 of the input.  Successful branches measure the other n-1 input
    qubits; odd parity needs a logical X (plain) or Y (Z90) correction,
    which is applied here.  Failed fusions return the input block shortened
    by one, with the logical X of a measured 1 already corrected.
    """
    n = state.num_qubits
    if n < 1:
        raise StateSizeError("input block must hold at least one qubit")
    if ancilla is None:
        ancilla = make_parity_state(n + 1, 0)
    if ancilla.num_qubits != n + 1:
        raise StateSizeError("ancilla must be a size n+1 parity state")
    if 2 * n + 1 > MAX_QUBITS:
        raise StateSizeError("input plus ancilla exceeds the dense limit")
    qi = n - 1
    inp = apply_matrix(state, z_rotation(np.pi / 2), [qi]) if apply_z90 else state
    full = inp.tensor(ancilla)
    out_block = list(range(n))
    branches = []
    for res in fuse_type2(full, qi, n, blocks=(range(n), range(n, 2 * n + 1))):
        if res.post_state is None:
            continue
        post = res.corrected_state()
        if res.success:
            meas = measure_z_many(post, range(n - 1)) if n > 1 else [((), 1.0, post)]
            for bits, p, out in meas:
                if out is None:
                    continue
                fix = ("Y" if apply_z90 else "X") if sum(bits) & 1 else "I"
                out = _logical_pauli(out, [out_block], [fix])
                branches.append(ReencodeBranch(res.outcome, bits, res.probability * p, out, fix))
        elif n > 1:
            # the shortened ancilla is discarded; it is not entangled with the input
            reduced = factor_out(post, range(n - 1)).normalized()
            # corrected_state already undid the logical X of a measured 1
            fix = "X" if res.outcome is FusionOutcome.FAILURE_B else "I"
            branches.append(ReencodeBranch(res.outcome, (), res.probability, reduced, fix))
    return branches


# ----------------------------------------------------------------------
# Clifford conjugation tables
# ----------------------------------------------------------------------


def _pauli_string_matrix(label: str) -> np.ndarray:
    m = np.ones((1, 1), dtype=complex)
    for ch in label:
        m = np.kron(m, PAULI_MATRICES[ch])
    return m


def conjugation_table(gate: GateSpec) -> dict[str, tuple[str, complex]]:
    """Map each Pauli P on the gate's qubits to (P', phase) with U P U^dag = phase P'.

    Computed by dense conjugation; raises UnsupportedGateError for gates that
    do not map Paulis to Paulis.
    """
    u = gate_matrix(gate)
    k = gate.arity
    labels = ["".join(p) for p in itertools.product(_PAULI_LABELS, repeat=k)]
    mats = {lab: _pauli_string_matrix(lab) for lab in labels}
    table = {}
    for lab in labels:
        conj = u @ mats[lab] @ u.conj().T
        for cand in labels:
            phase = np.trace(mats[cand].conj().T @ conj) / 2**k
            if abs(abs(phase) - 1) < 1e-9:
                phase = complex(np.round(phase.real) + 1j * np.round(phase.imag))
                table[lab] = (cand, phase)
                break
        else:
            raise UnsupportedGateError(f"{gate.kind} is not Clifford")
    return table


def clifford_gate(kind: str, targets: Sequence[int], theta: float | None = None) -> GateSpec:
    return GateSpec(kind, tuple(targets), theta)
