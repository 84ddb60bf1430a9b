"""Vectorised Pauli-frame Monte Carlo of one telecorrection round.

Samples are packed along the last axis of boolean frame arrays.  Every
chunk of ``CHUNK`` samples draws from its own generator seeded by
(master_seed, chunk index), so counts do not depend on how chunks are
spread over workers.

A run is classified after ideal decoding of the output block:

* rejected: a verification block saw an error (resource discarded);
* located: a Bell-measurement decode or the output decode is a heralded
  failure;
* X / Z unlocated: the logical Pauli left on the output is nontrivial.

Located errors during resource preparation are known when they happen, so
by default such resources are thrown away before use.  The simulation
conditions on that directly by not drawing located errors in that phase;
the analytic survival probability is reported alongside.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, build_telecorrector
from .codes import CssCode, get_code
from .decoder import DualMembership, parity_array, sector_decoder, syndrome_array
from .frame import SYMPLECTIC, NoiseTables

CHUNK = 8192
SPARSE_BELOW = 0.02


@dataclass
class _Layer:
    t: int
    phase: str
    preps: np.ndarray
    hs: np.ndarray
    xx_a: np.ndarray
    xx_b: np.ndarray
    meas: np.ndarray
    idle: np.ndarray


@dataclass
class Schedule:
    circuit: Circuit
    layers: list[_Layer]
    data_start: int
    meas_slots: dict[str, np.ndarray]  # block -> qubit read out at each coordinate
    output: np.ndarray
    data: np.ndarray


def compile_schedule(circuit: Circuit) -> Schedule:
    if not circuit.is_native():
        raise ValueError("schedule needs a native-gate circuit")
    if tuple(SYMPLECTIC["XXp90"][0]) != (1, 0, 0, 1):
        raise AssertionError("unexpected XX'90 conjugation")
    ts = circuit.timesteps
    depth = circuit.depth
    data = np.array(circuit.blocks["data"])
    output = np.array(circuit.blocks["B"])
    data_start = min((t for t, g in zip(ts, circuit.gates) if g.phase == "data"), default=depth + 1)
    first = {}
    last = {}
    for t, g in zip(ts, circuit.gates):
        for q in g.qubits:
            first.setdefault(q, t)
            last[q] = t
    for q in data:
        first[int(q)] = data_start
    for q in output:
        last[int(q)] = depth
    by_t: dict[int, list] = {t: [] for t in range(1, depth + 1)}
    for t, g in zip(ts, circuit.gates):
        by_t[t].append(g)
    layers = []
    meas_slots: dict[str, list] = {}
    for t in range(1, depth + 1):
        gates = by_t[t]
        busy = {q for g in gates for q in g.qubits}
        idle = [q for q in range(circuit.num_qubits) if q in first and first[q] <= t <= last[q] and q not in busy and first[q] < t]
        phase = "data" if t >= data_start else "anc"
        pick = lambda kind: np.array([g.qubits[0] for g in gates if g.kind == kind], dtype=np.int64)  # noqa: E731
        xx = [g.qubits for g in gates if g.kind == "XXp90"]
        for g in gates:
            if g.kind == "MeasZ":
                meas_slots.setdefault(g.tag, []).append(g.qubits[0])
        layers.append(
            _Layer(
                t,
                phase,
                pick("Prep0"),
                pick("H"),
                np.array([a for a, _ in xx], dtype=np.int64),
                np.array([b for _, b in xx], dtype=np.int64),
                pick("MeasZ"),
                np.array(idle, dtype=np.int64),
            )
        )
    slots = {}
    for tag, qs in meas_slots.items():
        block = circuit.blocks[tag]
        slots[tag] = np.array(sorted(qs, key=block.index), dtype=np.int64)
    return Schedule(circuit, layers, data_start, slots, output, data)


# ----------------------------------------------------------------------
# Noise injection
# ----------------------------------------------------------------------
#
# Frames are four boolean arrays of shape (qubits, samples): the pending X
# and Z errors, and per-sector erasure flags lx / lz marking coordinates whose
# X (or Z) component is unknown to the decoder.


class RandomInjector:
    def __init__(self, rng: np.random.Generator, samples: int):
        self.rng = rng
        self.samples = samples

    def _hits(self, k: int, p: float) -> tuple[np.ndarray, np.ndarray] | None:
        if p <= 0 or k == 0:
            return None
        total = k * self.samples
        if p >= SPARSE_BELOW:
            flat = np.flatnonzero(self.rng.random(total) < p)
        else:
            # gaps of a Bernoulli process are geometric
            est = int(total * p + 6 * math.sqrt(total * p) + 16)
            pos = np.cumsum(self.rng.geometric(p, size=est)) - 1
            while pos[-1] < total:
                more = np.cumsum(self.rng.geometric(p, size=est)) + pos[-1]
                pos = np.concatenate([pos, more])
            flat = pos[pos < total]
        return flat // self.samples, flat % self.samples

    def pauli(self, f, rows, x_p, z_p, phase):
        h = self._hits(rows.size, x_p)
        if h is not None:
            f.x[rows[h[0]], h[1]] ^= True
        h = self._hits(rows.size, z_p)
        if h is not None:
            f.z[rows[h[0]], h[1]] ^= True

    def located(self, f, groups, p, phase):
        """One located event per column of ``groups`` (a tuple of row arrays) erases all its qubits."""
        if f.discard and phase == "anc":
            return
        h = self._hits(groups[0].size, p)
        if h is None:
            return
        for rows in groups:
            r, c = rows[h[0]], h[1]
            f.erase(r, c, self.rng.random(r.size) < 0.5, self.rng.random(r.size) < 0.5)


class CoupledInjector(RandomInjector):
    """Draws one uniform per site, qubit and sample whatever the rate.

    Runs at different rates with the same seed then see nested fault sets,
    which keeps comparisons between nearby noise levels smooth.  Slower than
    the sparse sampler.
    """

    def pauli(self, f, rows, x_p, z_p, phase):
        shape = (rows.size, self.samples)
        f.x[rows] ^= self.rng.random(shape) < x_p
        f.z[rows] ^= self.rng.random(shape) < z_p

    def located(self, f, groups, p, phase):
        if f.discard and phase == "anc":
            return
        shape = (groups[0].size, self.samples)
        hit = self.rng.random(shape) < p
        paulis = [self.rng.integers(0, 4, size=shape, dtype=np.int8) for _ in groups]
        r, c = np.nonzero(hit)
        for rows, pa in zip(groups, paulis):
            v = pa[r, c]
            f.erase(rows[r], c, (v & 1).astype(bool), (v & 2).astype(bool))


class FaultInjector:
    """Places prescribed faults instead of sampling.

    ``faults`` maps a site id to entries (offset, column, bits) where bits is
    (x, z) for a Pauli site and one (x, z) pair per erased qubit for a
    located site.
    """

    def __init__(self, faults: dict[int, list], samples: int):
        self.faults = faults
        self.samples = samples
        self.site = 0
        self.rejected = np.zeros(samples, dtype=bool)
        self.sites: list[tuple[str, int, int, str]] = []  # (kind, events, qubits per event, phase)

    def _next(self, kind, events, width, phase):
        site = self.site
        self.site += 1
        self.sites.append((kind, events, width, phase))
        return self.faults.get(site, ())

    def pauli(self, f, rows, x_p, z_p, phase):
        for off, col, (fx, fz) in self._next("pauli", rows.size, 1, phase):
            f.x[rows[off], col] ^= bool(fx)
            f.z[rows[off], col] ^= bool(fz)

    def located(self, f, groups, p, phase):
        for off, col, bits in self._next("located", groups[0].size, len(groups), phase):
            if f.discard and phase == "anc":
                self.rejected[col] = True
            for rows, (fx, fz) in zip(groups, bits):
                q = np.array([rows[off]])
                f.erase(q, np.array([col]), np.array([bool(fx)]), np.array([bool(fz)]))


class _Frames:
    def __init__(self, qubits: int, samples: int, discard: bool):
        shape = (qubits, samples)
        self.x = np.zeros(shape, dtype=bool)
        self.z = np.zeros(shape, dtype=bool)
        self.lx = np.zeros(shape, dtype=bool)
        self.lz = np.zeros(shape, dtype=bool)
        self.discard = discard

    def erase(self, rows, cols, rx, rz):
        self.lx[rows, cols] = True
        self.lz[rows, cols] = True
        self.x[rows, cols] ^= rx
        self.z[rows, cols] ^= rz


def _noise(injector, f, rows, rates, phase):
    if rows.size == 0:
        return
    loc_p, x_p, z_p = rates
    injector.pauli(f, rows, x_p, z_p, phase)
    injector.located(f, (rows,), loc_p, phase)


# ----------------------------------------------------------------------
# Frame evolution
# ----------------------------------------------------------------------


def run_frames(sched: Schedule, tables: NoiseTables, samples: int, injector, discard_located: bool = True) -> dict:
    """Push Pauli frames through the schedule; returns packed measurement and output words."""
    f = _Frames(sched.circuit.num_qubits, samples, discard_located)
    x, z, lx, lz = f.x, f.z, f.lx, f.lz
    flips: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for layer in sched.layers:
        ph = layer.phase
        if layer.t == sched.data_start:
            _noise(injector, f, sched.data, tables.data, "data")
        if layer.preps.size:
            r = layer.preps
            x[r] = z[r] = lx[r] = lz[r] = False
            _noise(injector, f, r, tables.prep, ph)
        if layer.hs.size:
            r = layer.hs
            x[r], z[r] = z[r], x[r]
            lx[r], lz[r] = lz[r], lx[r]
            _noise(injector, f, r, tables.h, ph)
        if layer.xx_a.size:
            a, b = layer.xx_a, layer.xx_b
            # a Z on either input leaves an X on the other output
            za, zb = z[a], z[b]
            x[b] ^= za
            x[a] ^= zb
            la, lb = lz[a], lz[b]
            lx[b] |= la
            lx[a] |= lb
            loc_p, x_p, z_p = tables.xx
            both = np.concatenate([a, b])
            injector.pauli(f, both, x_p, z_p, ph)
            # a failed gate is one event that erases both of its outputs
            injector.located(f, (a, b), loc_p, ph)
        if layer.meas.size:
            r = layer.meas
            _noise(injector, f, r, tables.meas, ph)
            for q in r.tolist():
                flips[q] = (x[q].copy(), lx[q].copy())
        if layer.idle.size:
            _noise(injector, f, layer.idle, tables.memory, ph)
    out = {}
    for tag, qs in sched.meas_slots.items():
        rows = [flips[int(k)] for k in qs]
        out[tag] = (_pack(np.stack([w for w, _ in rows])), _pack(np.stack([e for _, e in rows])))
    b = sched.output
    out["B"] = (_pack(x[b]), _pack(z[b]), _pack(lx[b]), _pack(lz[b]))
    return out


def _pack(bits: np.ndarray) -> np.ndarray:
    weights = (np.int64(1) << np.arange(bits.shape[0], dtype=np.int64))[:, None]
    return (bits.astype(np.int64) * weights).sum(axis=0)


@dataclass
class Outcome:
    accepted: np.ndarray
    located: np.ndarray
    x_error: np.ndarray
    z_error: np.ndarray


def classify(code: CssCode, frames: dict) -> Outcome:
    dec = sector_decoder(code)
    dual = _dual(code)
    acc = dual.accepts(*frames["C"]) & dual.accepts(*frames["D"])

    def measured(word, erased):
        word = word & ~erased
        fail, corr = dec.batch(syndrome_array(word, code.check_masks), erased)
        return fail, parity_array(word & code.logical).astype(np.int64) ^ corr

    fail_d, flip_d = measured(*frames["data"])
    fail_a, flip_a = measured(*frames["A"])
    bx, bz, ex, ez = frames["B"]
    fail_bx, flip_bx = measured(bx, ex)
    fail_bz, flip_bz = measured(bz, ez)
    located = fail_d | fail_a | fail_bx | fail_bz
    x_err = (flip_d ^ flip_bx).astype(bool) & ~located
    z_err = (flip_a ^ flip_bz).astype(bool) & ~located
    return Outcome(acc, located, x_err, z_err)


_DUAL: dict[str, DualMembership] = {}


def _dual(code: CssCode) -> DualMembership:
    d = _DUAL.get(code.name)
    if d is None:
        d = _DUAL[code.name] = DualMembership(code)
    return d


# ----------------------------------------------------------------------
# Monte Carlo driver
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Level2Rates:
    located: float
    x_unlocated: float
    z_unlocated: float
    samples: int  # accepted runs
    total: int  # all runs including rejected resources
    stderr_located: float
    stderr_x: float
    stderr_z: float
    acceptance: float  # verification pass rate
    resource_survival: float  # chance a resource sees no located error
    counts: tuple[int, int, int, int] = field(default=(0, 0, 0, 0))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.located, self.x_unlocated, self.z_unlocated)


_SCHEDULES: dict[str, Schedule] = {}


def schedule_for(code: CssCode) -> Schedule:
    s = _SCHEDULES.get(code.name)
    if s is None:
        s = _SCHEDULES[code.name] = compile_schedule(build_telecorrector(code))
    return s


def _run_chunk(args) -> tuple[int, int, int, int, int]:
    code_name, tables, seed, chunk, size, discard, coupled = args
    code = get_code(code_name)
    sched = schedule_for(code)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))
    injector = (CoupledInjector if coupled else RandomInjector)(rng, size)
    frames = run_frames(sched, tables, size, injector, discard)
    o = classify(code, frames)
    acc = o.accepted
    return (
        size,
        int(acc.sum()),
        int((o.located & acc).sum()),
        int((o.x_error & acc).sum()),
        int((o.z_error & acc).sum()),
    )


def resource_survival(code: CssCode, tables: NoiseTables) -> float:
    """Probability that resource preparation sees no located error at all."""
    sched = schedule_for(code)
    log_ok = 0.0
    for layer in sched.layers:
        if layer.phase != "anc":
            continue
        for rows, rates in ((layer.preps, tables.prep), (layer.hs, tables.h), (layer.meas, tables.meas), (layer.idle, tables.memory)):
            log_ok += rows.size * math.log1p(-min(rates[0], 1 - 1e-300))
        log_ok += layer.xx_a.size * math.log1p(-min(tables.xx[0], 1 - 1e-300))
    return math.exp(log_ok)


def simulate_telecorrection(
    code: CssCode,
    noise: NoiseTables,
    samples: int,
    master_seed: int,
    workers: int = 1,
    discard_located: bool = True,
    count_rejections_as_located: bool = False,
    coupled: bool = False,
) -> Level2Rates:
    """Estimate level-2 rates of one telecorrection round by Monte Carlo.

    Args:
        code: Steane or Golay code.
        noise: per-operation rate triples.
        samples: number of runs.
        master_seed: results depend only on this and ``samples``.
        workers: processes to spread the chunks over.
        discard_located: condition on no located error while preparing the
            resource (it would be thrown away and rebuilt offline).
        count_rejections_as_located: report failed verifications as located
            errors instead of dropping them from the denominator.
        coupled: use the common-random-number sampler.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    sizes = [min(CHUNK, samples - k * CHUNK) for k in range(math.ceil(samples / CHUNK))]
    jobs = [(code.name, noise, master_seed, k, s, discard_located, coupled) for k, s in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(j) for j in jobs]
    total, acc, n_loc, n_x, n_z = (sum(p[i] for p in parts) for i in range(5))
    if count_rejections_as_located:
        denom = total
        n_loc += total - acc
    else:
        denom = acc
    denom_safe = max(denom, 1)

    def se(k):
        p = k / denom_safe
        return math.sqrt(p * (1 - p) / denom_safe)

    survival = resource_survival(code, noise) if discard_located else 1.0
    return Level2Rates(
        located=n_loc / denom_safe,
        x_unlocated=n_x / denom_safe,
        z_unlocated=n_z / denom_safe,
        samples=denom,
        total=total,
        stderr_located=se(n_loc),
        stderr_x=se(n_x),
        stderr_z=se(n_z),
        acceptance=acc / total,
        resource_survival=survival,
        counts=(denom, n_loc, n_x, n_z),
    )


# ----------------------------------------------------------------------
# Single-fault enumeration
# ----------------------------------------------------------------------


def fault_sites(code: CssCode, discard_located: bool = True) -> list[tuple[str, int, int, str]]:
    """(kind, events, qubits per event, phase) of every injection site, in simulation order."""
    probe = FaultInjector({}, 1)
    run_frames(schedule_for(code), NoiseTables.zero(), 1, probe, discard_located)
    return probe.sites


PAULIS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}


def single_fault_outcomes(code: CssCode, discard_located: bool = True) -> tuple[list[tuple[int, int, str]], Outcome, np.ndarray]:
    """Run every single fault once with the rest of the circuit noise-free.

    Pauli sites get X, Z and Y on each qubit; located sites get an erasure
    event with every combination of Paulis on the erased qubits.  Returns
    (site, offset, label) per column, the outcome, and which columns were
    rejected outright as located errors during resource preparation.
    """
    faults: dict[int, list] = {}
    labels = []
    col = 0
    for s, (kind, events, width, _) in enumerate(fault_sites(code, discard_located)):
        if kind == "pauli":
            options = [(name, bits) for name, bits in PAULIS.items() if name != "I"]
        else:
            options = [("L" + "".join(combo), tuple(PAULIS[c] for c in combo)) for combo in itertools.product(PAULIS, repeat=width)]
        for off in range(events):
            for name, bits in options:
                faults.setdefault(s, []).append((off, col, bits))
                labels.append((s, off, name))
                col += 1
    inj = FaultInjector(faults, col)
    frames = run_frames(schedule_for(code), NoiseTables.zero(), col, inj, discard_located)
    return labels, classify(code, frames), inj.rejected


# ----------------------------------------------------------------------
# Fault-pair enumeration
# ----------------------------------------------------------------------

#: variable index of each fault atom: 0 located, 1 X, 2 Z
_LOCATED, _X, _Z = 0, 1, 2


def _atoms(code: CssCode, discard_located: bool) -> list[tuple[int, list, float]]:
    """Independent elementary faults under uniform noise: (variable, variants, weight per variant)."""
    atoms = []
    for s, (kind, events, width, phase) in enumerate(fault_sites(code, discard_located)):
        for off in range(events):
            if kind == "pauli":
                atoms.append((_X, [(s, off, (1, 0))], 1.0))
                atoms.append((_Z, [(s, off, (0, 1))], 1.0))
            elif not (discard_located and phase == "anc"):
                combos = [tuple(PAULIS[c] for c in combo) for combo in itertools.product(PAULIS, repeat=width)]
                atoms.append((_LOCATED, [(s, off, bits) for bits in combos], 1.0 / len(combos)))
    return atoms


def pair_coefficients(code: CssCode, discard_located: bool = True) -> np.ndarray:
    """Exact second-order coefficients of the level-2 rates under uniform noise.

    Every site fails independently with the uniform triple (l, x, z): each
    qubit of a Pauli site takes X with probability x and Z with probability
    z, and a located event erases its qubits with uniformly random Paulis.
    Runs every pair of elementary faults once, so the result carries no
    sampling noise.  Returns a (3, 6) array in the order of
    ``threshold.monomials(2, 2)``: l*l, l*x, l*z, x*x, x*z, z*z.

    Only sensible for distance-3 codes; the pair count grows quadratically
    with the circuit and Golay has no failing pairs at all.
    """
    atoms = _atoms(code, discard_located)
    term = {(0, 0): 0, (0, 1): 1, (0, 2): 2, (1, 1): 3, (1, 2): 4, (2, 2): 5}
    faults: dict[int, list] = {}
    cols_term, cols_weight = [], []
    col = 0
    for i, j in itertools.combinations(range(len(atoms)), 2):
        vi, li, wi = atoms[i]
        vj, lj, wj = atoms[j]
        for s1, o1, b1 in li:
            for s2, o2, b2 in lj:
                faults.setdefault(s1, []).append((o1, col, b1))
                faults.setdefault(s2, []).append((o2, col, b2))
                cols_term.append(term[(min(vi, vj), max(vi, vj))])
                cols_weight.append(wi * wj)
                col += 1
    inj = FaultInjector(faults, col)
    o = classify(code, run_frames(schedule_for(code), NoiseTables.zero(), col, inj, discard_located))
    acc = o.accepted & ~inj.rejected
    coef = np.zeros((3, 6))
    t = np.array(cols_term)
    w = np.array(cols_weight)
    for k, hit in enumerate((acc & o.located, acc & o.x_error, acc & o.z_error)):
        np.add.at(coef[k], t, hit * w)
    return coef
