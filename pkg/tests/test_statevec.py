import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parity_ft.statevec import (
    CNOT_MATRIX,
    XX90_MATRIX,
    XXP90_MATRIX,
    CodeSpaceError,
    FusionOutcome,
    GateSpec,
    ResourceMismatchError,
    StateSizeError,
    UnsupportedGateError,
    apply_gate,
    apply_h,
    apply_matrix,
    basis_state,
    build_rxx,
    conjugation_table,
    encode_blocks,
    encode_parity,
    equal_up_to_phase,
    fidelity,
    fuse_type1,
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

_H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def random_qubit(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


def random_logical(rng, k):
    v = rng.normal(size=2**k) + 1j * rng.normal(size=2**k)
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------- parity code


def test_parity_state_small_cases():
    assert np.allclose(make_parity_state(1, 0).amplitudes, [1, 0])
    assert np.allclose(make_parity_state(2, 0).amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2))
    odd = make_parity_state(3, 1).amplitudes
    expected = np.zeros(8)
    expected[[0b001, 0b010, 0b100, 0b111]] = 0.5
    assert np.allclose(odd, expected)


def test_parity_state_matches_hadamard_expansion():
    # |0>^(n) = (|+>^n + |->^n)/sqrt2, |1>^(n) = (|+>^n - |->^n)/sqrt2
    plus, minus = np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2)
    for n in range(1, 8):
        p = np.ones(1)
        m = np.ones(1)
        for _ in range(n):
            p, m = np.kron(p, plus), np.kron(m, minus)
        assert np.allclose(make_parity_state(n, 0).amplitudes, (p + m) / np.sqrt(2))
        assert np.allclose(make_parity_state(n, 1).amplitudes, (p - m) / np.sqrt(2))


@pytest.mark.parametrize("n", [0, 15])
def test_parity_state_size_bounds(n):
    with pytest.raises(StateSizeError):
        make_parity_state(n, 0)


def test_logical_readout_examples():
    assert np.allclose(logical_readout(make_parity_state(4, 0)), (1, 0))
    assert np.allclose(logical_readout(make_parity_state(5, 1)), (0, 1))
    with pytest.raises(CodeSpaceError):
        logical_readout(basis_state("0001"))


@given(st.floats(-np.pi, np.pi), st.integers(1, 7), st.integers(0, 6))
@settings(max_examples=40, deadline=None)
def test_single_qubit_x_rotation_is_logical(theta, n, q):
    q = q % n
    out = apply_matrix(make_parity_state(n, 0), x_rotation(theta), [q])
    a, b = logical_readout(out)
    assert np.isclose(a, np.cos(theta / 2), atol=1e-12)
    assert np.isclose(b, 1j * np.sin(theta / 2), atol=1e-12)
    assert abs(out.norm - 1) < 1e-12


@pytest.mark.parametrize("n", range(2, 9))
@pytest.mark.parametrize("logical", [0, 1])
def test_measuring_one_qubit_shrinks_code(n, logical):
    for q in (0, n - 1):
        for bit, p, post in measure_z(make_parity_state(n, logical), q):
            assert p == pytest.approx(0.5, abs=1e-12)
            a, b = logical_readout(post)
            want = logical ^ bit
            assert abs((a, b)[want]) == pytest.approx(1, abs=1e-12)
            assert post.num_qubits == n - 1


# ---------------------------------------------------------------- gates


def test_apply_gate_examples():
    plus = apply_gate(basis_state("0"), GateSpec("H", (0,)))
    assert np.allclose(plus.amplitudes, np.array([1, 1]) / np.sqrt(2))
    out = apply_gate(basis_state("00"), GateSpec("XX90", (0, 1)))
    assert np.allclose(out.amplitudes, np.array([1, 0, 0, -1j]) / np.sqrt(2))


def test_gate_spec_validation():
    with pytest.raises(UnsupportedGateError):
        GateSpec("T", (0,))
    with pytest.raises(ValueError):
        GateSpec("CNOT", (0,))
    with pytest.raises(ValueError):
        GateSpec("X_theta", (0,))
    with pytest.raises(IndexError):
        apply_gate(basis_state("0"), GateSpec("CNOT", (0, 1)))


def test_hadamard_from_rotations():
    x90, z90 = x_rotation(np.pi / 2), z_rotation(np.pi / 2)
    assert equal_up_to_phase(x90 @ z90 @ x90, _H)


def test_primed_gate_relation():
    xm90 = x_rotation(-np.pi / 2)
    assert equal_up_to_phase(XXP90_MATRIX, np.kron(xm90, xm90) @ XX90_MATRIX)


def test_primed_gate_is_conjugated_cz():
    hh = np.kron(_H, _H)
    xx = np.kron([[0, 1], [1, 0]], [[0, 1], [1, 0]])
    cz = np.diag([1, 1, 1, -1])
    assert equal_up_to_phase(XXP90_MATRIX, xx @ hh @ cz @ hh) or equal_up_to_phase(XXP90_MATRIX, hh @ cz @ hh @ xx)


def test_cnot_from_one_xx90():
    # CNOT = exp(i pi/4 (I-Z_c)(I-X_t)); the ZX term is XX90 conjugated by H on the control
    hc = np.kron(_H, np.eye(2))
    zc = np.kron(z_rotation(np.pi / 2), np.eye(2))
    xt = np.kron(np.eye(2), x_rotation(np.pi / 2))
    built = zc @ xt @ hc @ XX90_MATRIX @ hc
    assert equal_up_to_phase(built, CNOT_MATRIX)


# ---------------------------------------------------------------- conjugation


def test_conjugation_examples():
    h = conjugation_table(GateSpec("H", (0,)))
    assert h["X"][0] == "Z" and h["Z"][0] == "X"
    cnot = conjugation_table(GateSpec("CNOT", (0, 1)))
    assert cnot["XI"] == ("XX", 1)
    xx = conjugation_table(GateSpec("XX90", (0, 1)))
    label, _ = xx["ZI"]
    # a Z on the first input leaves an X component on the second output
    assert label[1] in "XY" and label[0] in "ZY"


@pytest.mark.parametrize(
    "gate",
    [
        GateSpec("H", (0,)),
        GateSpec("PauliY", (0,)),
        GateSpec("X_theta", (0,), np.pi / 2),
        GateSpec("Z_theta", (0,), -np.pi / 2),
        GateSpec("XX90", (0, 1)),
        GateSpec("XXp90", (0, 1)),
        GateSpec("CNOT", (0, 1)),
        GateSpec("CZ", (0, 1)),
    ],
)
def test_conjugation_matches_dense(gate):
    paulis = {"I": np.eye(2), "X": [[0, 1], [1, 0]], "Y": [[0, -1j], [1j, 0]], "Z": [[1, 0], [0, -1]]}
    u = gate_matrix(gate)
    table = conjugation_table(gate)
    assert len(table) == 4**gate.arity
    for label, (out, phase) in table.items():
        p = np.ones((1, 1))
        q = np.ones((1, 1))
        for a, b in zip(label, out):
            p, q = np.kron(p, paulis[a]), np.kron(q, paulis[b])
        assert np.allclose(u @ p @ u.conj().T, phase * q)
        assert phase in (1, -1, 1j, -1j)


def test_conjugation_rejects_non_clifford():
    with pytest.raises(UnsupportedGateError):
        conjugation_table(GateSpec("X_theta", (0,), 0.3))


# ---------------------------------------------------------------- fusions


def test_fuse_type2_examples():
    bells = make_parity_state(2, 0).tensor(make_parity_state(2, 0))
    res = fuse_type2(bells, 1, 2)
    assert sum(r.probability for r in res if r.success) == pytest.approx(0.5)
    ok = next(r for r in res if r.outcome is FusionOutcome.SUCCESS_PLUS)
    assert fidelity(ok.post_state, make_parity_state(2, 0)) == pytest.approx(1)

    res = fuse_type2(basis_state("01"), 0, 1)
    probs = {r.outcome: r.probability for r in res}
    assert probs[FusionOutcome.FAILURE_A] == pytest.approx(1)
    assert probs[FusionOutcome.SUCCESS_PLUS] + probs[FusionOutcome.SUCCESS_MINUS] == 0


def test_fuse_type2_reencode_example():
    state = encode_parity(0.6, 0.8, 3).tensor(make_parity_state(4, 0))
    for r in fuse_type2(state, 2, 3, blocks=(range(3), range(3, 7))):
        if r.success:
            a, b = logical_readout(r.corrected_state())
            assert np.allclose((a, b), (0.6, 0.8), atol=1e-12)


@pytest.mark.parametrize("n,m", [(n, m) for n in range(1, 6) for m in range(1, 6)])
def test_join_laws(n, m):
    rng = np.random.default_rng(100 * n + m)
    alpha, beta = random_qubit(rng)
    blocks = (range(n), range(n, n + m))
    # type-II: an arbitrary block fused into a |0> block keeps its logical value
    state = encode_parity(alpha, beta, n).tensor(make_parity_state(m, 0))
    res = fuse_type2(state, n - 1, n, blocks=blocks)
    assert sum(r.probability for r in res) == pytest.approx(1, abs=1e-12)
    for r in res:
        if r.post_state is None:
            continue
        if r.success and m > 1:
            # a fused qubit of a |0> block with m > 1 is maximally mixed
            assert r.probability == pytest.approx(0.25, abs=1e-12)
            if n + m > 2:
                got = logical_amplitudes(r.corrected_state(), [n + m - 2])
                assert equal_up_to_phase(got, [alpha, beta])
        elif r.outcome is FusionOutcome.FAILURE_A and n > 1:
            # |01>: q1 read 0, so block 1 keeps its content, block 2 is flipped then fixed
            got = logical_amplitudes(r.corrected_state(), [n - 1, m - 1]) if m > 1 else None
            if got is not None:
                assert equal_up_to_phase(got, np.kron([alpha, beta], [1, 0]))
    # H-dressed type-I join of two |0> blocks
    zz = make_parity_state(n, 0).tensor(make_parity_state(m, 0))
    res = join_type1(zz, n - 1, n, blocks=blocks)
    assert sum(r.probability for r in res) == pytest.approx(1, abs=1e-12)
    assert sum(r.probability for r in res if r.success) == pytest.approx(0.5, abs=1e-12)
    for r in res:
        if r.success:
            assert fidelity(r.corrected_state(), make_parity_state(n + m - 1, 0)) == pytest.approx(1, abs=1e-10)
        elif r.post_state is not None:
            # failure leaves |+>^(n-1)|->^(m-1) up to local Z: a basis state after H on all
            flat = apply_h(r.post_state, range(n + m - 2)).amplitudes
            assert np.isclose(np.max(np.abs(flat)), 1, atol=1e-12)


def test_fuse_type1_success_projector():
    rng = np.random.default_rng(7)
    v = random_logical(rng, 3)
    from parity_ft.statevec import PureState

    state = PureState(3, v)
    res = fuse_type1(state, 0, 1)
    assert sum(r.probability for r in res) == pytest.approx(1, abs=1e-12)
    plus = next(r for r in res if r.outcome is FusionOutcome.SUCCESS_PLUS)
    t = v.reshape(2, 2, 2)
    want = np.stack([t[0, 0], t[1, 1]]).reshape(-1) / np.sqrt(2)
    assert np.allclose(plus.post_state.amplitudes * np.sqrt(plus.probability), want)


@given(st.integers(2, 8), st.integers(0, 2**31 - 1))
@settings(max_examples=25, deadline=None)
def test_fusion_branch_completeness(n, seed):
    rng = np.random.default_rng(seed)
    from parity_ft.statevec import PureState

    state = PureState(n, random_logical(rng, n))
    q1, q2 = rng.choice(n, size=2, replace=False)
    for fuse in (fuse_type1, fuse_type2, join_type1):
        res = fuse(state, int(q1), int(q2))
        assert sum(r.probability for r in res) == pytest.approx(1, abs=1e-12)
        for r in res:
            if r.post_state is not None:
                assert abs(r.post_state.norm - 1) < 1e-12


def test_fusion_rejects_same_qubit():
    with pytest.raises(ValueError):
        fuse_type2(basis_state("00"), 1, 1)


# ---------------------------------------------------------------- resource


def test_rxx_four_qubit_amplitudes():
    plus, minus = np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2)
    phi = np.array([1, 0, 0, 1])
    psi = np.array([0, 1, 1, 0])
    want = 0.5 * (np.kron(np.kron(plus, plus), phi) + np.kron(np.kron(minus, minus), psi))
    got = build_rxx(False)
    assert got.num_qubits == 4
    assert equal_up_to_phase(got.amplitudes, want)


def test_rxx_symmetric_under_xx_on_last_pair():
    r = build_rxx(False)
    x = np.array([[0, 1], [1, 0]])
    assert equal_up_to_phase(apply_matrix(r, np.kron(x, x), [2, 3]).amplitudes, r.amplitudes)


def test_long_ends_rxx_projects_to_short():
    long = build_rxx(True)
    assert long.num_qubits == 6
    assert fidelity(long, rxx_target(True)) == pytest.approx(1, abs=1e-10)
    # read ends (0,1) and (4,5) in the size-2 parity basis
    t = long.amplitudes.reshape([2] * 6)
    t = np.transpose(t, (0, 1, 4, 5, 2, 3)).reshape(4, 4, 4)
    enc = np.stack([make_parity_state(2, 0).amplitudes, make_parity_state(2, 1).amplitudes])
    short = np.einsum("ia,jb,abk->ijk", enc.conj(), enc.conj(), t).reshape(2, 2, 2, 2)
    short = np.transpose(short, (0, 2, 3, 1)).reshape(-1)
    assert equal_up_to_phase(short, build_rxx(False).amplitudes)


# ---------------------------------------------------------------- teleportation


def test_teleport_basis_input():
    res = teleport_xx(basis_state("00"), 1, 1, build_rxx(False))
    want = XXP90_MATRIX @ np.array([1, 0, 0, 0])
    for b in res:
        if b.gate_applied and b.post_state is not None:
            assert equal_up_to_phase(logical_amplitudes(b.post_state, b.block_sizes), want)


@pytest.mark.parametrize("long_ends", [False, True])
@pytest.mark.parametrize("sizes", [(1, 1), (2, 3), (3, 2)])
def test_teleport_random_states(long_ends, sizes):
    rng = np.random.default_rng(sizes[0] * 10 + sizes[1] + long_ends)
    resource = build_rxx(long_ends)
    n1, n2 = sizes
    for _ in range(100 if sizes == (1, 1) else 10):
        v = random_logical(rng, 2)
        branches = teleport_xx(encode_blocks(v, sizes), n1, n2, resource)
        assert sum(b.probability for b in branches) == pytest.approx(1, abs=1e-10)
        p_gate = sum(b.probability for b in branches if b.gate_applied)
        assert p_gate == pytest.approx(0.25, abs=1e-10)
        for b in branches:
            if b.post_state is None:
                continue
            want = XXP90_MATRIX @ v if b.gate_applied else v
            got = logical_amplitudes(b.post_state, b.block_sizes)
            assert abs(abs(np.vdot(got, want)) ** 2 - 1) < 1e-10


@pytest.mark.parametrize("long_ends", [False, True])
def test_teleport_block_sizes(long_ends):
    extra = 1 if long_ends else 0
    res = teleport_xx(encode_blocks([1, 0, 0, 0], (3, 3)), 3, 3, build_rxx(long_ends))
    for b in res:
        s1, s2 = b.outcomes[0].success, b.outcomes[1].success
        if s1 and s2:
            assert b.block_sizes == (3 + extra, 3 + extra)
        elif not s1 and not s2:
            assert b.block_sizes == (2, 2)
        elif s1:
            assert b.block_sizes == (3 + extra, 2)
        else:
            assert b.block_sizes == (2, 3 + extra)


def test_teleport_rejects_wrong_resource():
    with pytest.raises(ResourceMismatchError):
        teleport_xx(basis_state("00"), 1, 1, make_parity_state(4, 0))


# ---------------------------------------------------------------- re-encoding


def test_reencode_z90_on_zero():
    for b in reencode_z90(make_parity_state(2, 0)):
        if b.fusion_outcome.success:
            assert equal_up_to_phase(logical_amplitudes(b.post_state, [2]), [1, 0])


@pytest.mark.parametrize("n", range(1, 6))
@pytest.mark.parametrize("with_z90", [True, False])
def test_reencode_all_branches(n, with_z90):
    rng = np.random.default_rng(n + 10 * with_z90)
    for _ in range(20):
        v = random_qubit(rng)
        branches = reencode_z90(encode_parity(*v, n), apply_z90=with_z90)
        total = sum(b.probability for b in branches)
        # with n=1 a failed fusion consumes the only qubit
        assert total == pytest.approx(1 if n > 1 else 0.5, abs=1e-12)
        assert sum(b.probability for b in branches if b.fusion_outcome.success) == pytest.approx(0.5, abs=1e-12)
        for b in branches:
            want = (z_rotation(np.pi / 2) @ v) if (with_z90 and b.fusion_outcome.success) else v
            got = logical_amplitudes(b.post_state, [b.post_state.num_qubits])
            assert abs(abs(np.vdot(got, want)) ** 2 - 1) < 1e-10
            if b.fusion_outcome.success:
                assert b.post_state.num_qubits == n
                odd = sum(b.measured) & 1
                assert b.correction == (("Y" if with_z90 else "X") if odd else "I")


def test_reencode_rejects_bad_ancilla():
    with pytest.raises(StateSizeError):
        reencode_z90(make_parity_state(3, 0), ancilla=make_parity_state(3, 0))


# ---------------------------------------------------------------- GHZ check


def test_ghz_from_parity_state():
    # H on every qubit of |0>^(3) gives the GHZ state
    ghz = apply_h(make_parity_state(3, 0), range(3))
    assert equal_up_to_phase(ghz.amplitudes, np.array([1, 0, 0, 0, 0, 0, 0, 1]) / np.sqrt(2))


def test_all_two_qubit_paulis_covered():
    for gate in (GateSpec("XX90", (0, 1)), GateSpec("CZ", (1, 0))):
        table = conjugation_table(gate)
        assert set(table) == {"".join(p) for p in itertools.product("IXYZ", repeat=2)}
