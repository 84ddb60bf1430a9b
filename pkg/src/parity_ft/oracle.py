"""Dense state-vector self-checks of the fusion, resource and gate identities.

Each check returns the largest deviation it saw; a check passes when that
stays within ``ATOL``.
"""

from __future__ import annotations

import time
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .statevec import (
    CNOT_MATRIX,
    PAULI_MATRICES,
    XX90_MATRIX,
    XXP90_MATRIX,
    GateSpec,
    build_rxx,
    conjugation_table,
    encode_blocks,
    encode_parity,
    fidelity,
    fuse_type2,
    gate_matrix,
    join_type1,
    logical_amplitudes,
    logical_readout,
    make_parity_state,
    measure_z,
    reencode_z90,
    rxx_target,
    teleport_xx,
    x_rotation,
    z_rotation,
)

ATOL = 1e-10
_H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


@dataclass(frozen=True)
class OracleCheck:
    name: str
    passed: bool
    worst: float
    cases: int
    seconds: float


def _random_vec(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def _phase_gap(got, want) -> float:
    """1 - |<got|want>|^2 for unit vectors."""
    got = np.asarray(got)
    return abs(1 - abs(np.vdot(got / np.linalg.norm(got), want)) ** 2)


def check_branch_laws(max_block: int = 5, seed: int = 0) -> tuple[float, int]:
    rng = np.random.default_rng(seed)
    worst, cases = 0.0, 0
    for n in range(1, max_block + 1):
        for m in range(1, max_block + 1):
            alpha, beta = _random_vec(rng, 2)
            blocks = (range(n), range(n, n + m))
            res = fuse_type2(encode_parity(alpha, beta, n).tensor(make_parity_state(m, 0)), n - 1, n, blocks=blocks)
            worst = max(worst, abs(sum(r.probability for r in res) - 1))
            for r in res:
                if r.success and r.post_state is not None and m > 1:
                    worst = max(worst, abs(r.probability - 0.25))
                    if n + m > 2:
                        worst = max(worst, _phase_gap(logical_amplitudes(r.corrected_state(), [n + m - 2]), [alpha, beta]))
            zz = make_parity_state(n, 0).tensor(make_parity_state(m, 0))
            res = join_type1(zz, n - 1, n, blocks=blocks)
            worst = max(worst, abs(sum(r.probability for r in res) - 1))
            worst = max(worst, abs(sum(r.probability for r in res if r.success) - 0.5))
            for r in res:
                if r.success:
                    worst = max(worst, 1 - fidelity(r.corrected_state(), make_parity_state(n + m - 1, 0)))
            cases += 1
    return worst, cases


def check_rxx() -> tuple[float, int]:
    plus, minus = np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2)
    want = 0.5 * (np.kron(np.kron(plus, plus), [1, 0, 0, 1]) + np.kron(np.kron(minus, minus), [0, 1, 1, 0]))
    worst = _phase_gap(build_rxx(False).amplitudes, want)
    worst = max(worst, 1 - fidelity(build_rxx(True), rxx_target(True)))
    return worst, 2


def _phase_diff(a, b) -> float:
    """Max entry difference after aligning global phase on the largest entry of b."""
    k = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    return float(np.max(np.abs(a * (b[k] / a[k]) - b)))


def check_gate_identities() -> tuple[float, int]:
    x90, z90, xm90 = x_rotation(np.pi / 2), z_rotation(np.pi / 2), x_rotation(-np.pi / 2)
    hc = np.kron(_H, np.eye(2))
    cnot = np.kron(z90, np.eye(2)) @ np.kron(np.eye(2), x90) @ hc @ XX90_MATRIX @ hc
    worst = max(
        _phase_diff(x90 @ z90 @ x90, _H),
        _phase_diff(np.kron(xm90, xm90) @ XX90_MATRIX, XXP90_MATRIX),
        _phase_diff(cnot, CNOT_MATRIX),
    )
    return worst, 3


def check_conjugation() -> tuple[float, int]:
    """Conjugation tables against dense U P U^dagger for every Pauli."""
    worst, cases = 0.0, 0
    for kind in ("H", "XX90", "XXp90", "CNOT", "CZ"):
        gate = GateSpec(kind, tuple(range(2 if kind != "H" else 1)))
        u = gate_matrix(gate)
        for label, (out, phase) in conjugation_table(gate).items():
            p = q = np.ones((1, 1))
            for a, b in zip(label, out):
                p, q = np.kron(p, PAULI_MATRICES[a]), np.kron(q, PAULI_MATRICES[b])
            worst = max(worst, float(np.max(np.abs(u @ p @ u.conj().T - phase * q))))
            cases += 1
    return worst, cases


def check_measurement_shrink(max_block: int = 8) -> tuple[float, int]:
    """Z readout of one qubit of a parity block leaves a smaller block, flipped by the outcome."""
    worst, cases = 0.0, 0
    for n in range(2, max_block + 1):
        for logical in (0, 1):
            for q in range(n):
                for bit, p, post in measure_z(make_parity_state(n, logical), q):
                    amps = logical_readout(post)
                    worst = max(worst, abs(p - 0.5), abs(abs(amps[logical ^ bit]) - 1))
                    cases += 1
    return worst, cases


def check_teleport(max_block: int = 5, random_states: int = 100, seed: int = 1) -> tuple[float, int]:
    """Random logical inputs through the teleported XX'90, every block-size pair up to max_block."""
    rng = np.random.default_rng(seed)
    worst, cases = 0.0, 0
    resources = (build_rxx(False), build_rxx(True))
    pairs = [(n1, n2) for n1 in range(1, max_block + 1) for n2 in range(1, max_block + 1)]
    for k, (n1, n2) in enumerate(pairs):
        # the smallest blocks get the full set of random states
        count = random_states if k == 0 else 2
        for _ in range(count):
            v = _random_vec(rng, 4)
            for resource in resources:
                if n1 + n2 + resource.num_qubits > 14:
                    continue
                branches = teleport_xx(encode_blocks(v, (n1, n2)), n1, n2, resource)
                worst = max(worst, abs(sum(b.probability for b in branches) - 1))
                worst = max(worst, abs(sum(b.probability for b in branches if b.gate_applied) - 0.25))
                for b in branches:
                    if b.post_state is None:
                        continue
                    want = XXP90_MATRIX @ v if b.gate_applied else v
                    worst = max(worst, _phase_gap(logical_amplitudes(b.post_state, b.block_sizes), want))
                cases += 1
    return worst, cases


def check_reencode(max_block: int = 5, random_states: int = 20, seed: int = 2) -> tuple[float, int]:
    rng = np.random.default_rng(seed)
    worst, cases = 0.0, 0
    z90 = z_rotation(np.pi / 2)
    for n in range(1, max_block + 1):
        for _ in range(random_states):
            v = _random_vec(rng, 2)
            branches = reencode_z90(encode_parity(*v, n))
            total = sum(b.probability for b in branches)
            worst = max(worst, abs(total - (1 if n > 1 else 0.5)))
            for b in branches:
                want = z90 @ v if b.fusion_outcome.success else v
                worst = max(worst, _phase_gap(logical_amplitudes(b.post_state, [b.post_state.num_qubits]), want))
            cases += 1
    return worst, cases


CHECKS: dict[str, Callable[[], tuple[float, int]]] = {
    "fusion branch laws": check_branch_laws,
    "R_XX resource state": check_rxx,
    "measurement shrinks blocks": check_measurement_shrink,
    "gate identities (H, XX'90, CNOT)": check_gate_identities,
    "conjugation tables": check_conjugation,
    "XX'90 teleportation": check_teleport,
    "Z90 re-encoding": check_reencode,
}


def run_oracle_suite(atol: float = ATOL) -> list[OracleCheck]:
    out = []
    for name, fn in CHECKS.items():
        t0 = time.perf_counter()
        worst, cases = fn()
        out.append(OracleCheck(name, bool(worst <= atol), float(worst), cases, time.perf_counter() - t0))
    return out
