"""Closed-form level-1 error rates of parity-encoded gates.

Every gate on a parity block is summarised by three probabilities: a
located (heralded) error, and unlocated X and Z errors.  Physical noise is a
per-qubit, per-timestep loss rate ``gamma`` and Pauli rate ``eta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable

import numpy as np

TAIL_TOL = 1e-9

# Location counts for each encoded operation.  Each value is the exponent k
# of a survival factor (1-p)^k; they are taken as given, not re-derived.
EXPONENTS = {
    "source_x": 41,  # optical locations seen by a freshly made 7-qubit state
    "source_loss": 21,  # qubit-timesteps exposed to loss while growing it
    "z90_x": 69,  # unlocated X exposure during the re-encoding Z90
    "z90_z": 10,  # unlocated Z exposure during the re-encoding Z90
    "xx90_x": 28,  # unlocated X exposure per input of the teleported XX90
    "xx90_z": 4,  # unlocated Z exposure per input of the teleported XX90
    "xx90_loss": 40,  # walk_steps * (n + 3) with n = 7
    "memory_x": 28,  # memory matches the slowest encoded gate
    "memory_z": 4,
    "memory_loss": 28,
    "measure": 7,  # one readout per physical qubit of the block
}

CODE_SIZE = 7
WALK_STEPS = 4  # mean number of walk steps per teleported gate


class OpKind(str, Enum):
    SOURCE_PREP = "SourcePrep"
    Z90 = "Z90"
    XX90 = "XX90"
    MEMORY = "Memory"
    MEASUREMENT = "Measurement"


class PrecisionError(ValueError):
    pass


@dataclass(frozen=True)
class PhysicalNoise:
    gamma: float
    eta: float

    def __post_init__(self):
        if not 0 <= self.gamma < 1:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        if not 0 <= self.eta < 1:
            raise ValueError(f"eta must lie in [0, 1), got {self.eta}")

    @property
    def eta_x(self) -> float:
        return 2 * self.eta / 3

    @property
    def eta_z(self) -> float:
        return 2 * self.eta / 3


@dataclass(frozen=True)
class Level1Rates:
    located: float
    x_unlocated: float
    z_unlocated: float
    op_kind: OpKind

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.located, self.x_unlocated, self.z_unlocated)


def _exposure(p: float, k: int) -> float:
    """1 - (1-p)^k without cancellation for small p."""
    return -math.expm1(k * math.log1p(-p)) if p > 0 else 0.0


# ----------------------------------------------------------------------
# Random walk of the teleported XX90
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class WalkSpec:
    """Walk started at size ``n``; ``truncation`` caps the series (None picks it)."""

    n: int
    truncation: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("walk start n must be at least 1")
        if self.truncation is not None and self.truncation < self.n:
            raise ValueError("truncation must be at least n")


def walk_paths(n: int, t: int) -> int:
    """Number of +-1 paths of length t that end n steps below the start."""
    if n < 1 or t < n:
        raise ValueError("need t >= n >= 1")
    if (t - n) % 2:
        return 0
    return math.comb(t, (t + n) // 2)


def first_passage_term(n: int, t: int) -> Fraction:
    """F(n, t) / 2^t as an exact rational."""
    paths = walk_paths(n, t)
    if paths == 0:
        return Fraction(0)
    return Fraction(n, t) * Fraction(paths, 2 ** (t + (t - n) // 2))


def _ratio_certified(n: int, t: int) -> bool:
    # term(t+2)/term(t) = t(t+1) / (2((t+2)^2 - n^2)), which is <= 1/2 once n^2 <= 3t + 4
    return n * n <= 3 * t + 4


@dataclass(frozen=True)
class WalkSeries:
    failure: Fraction
    tail_bound: float
    last_t: int

    @property
    def success(self) -> float:
        return float(1 - self.failure)


def walk_series(spec: WalkSpec) -> WalkSeries:
    """Truncated first-passage series with a certified bound on the rest.

    Past the point where the term ratio is at most 1/2, the omitted tail is
    bounded by the last included term.
    """
    n = spec.n
    total = Fraction(0)
    t = n
    while True:
        term = first_passage_term(n, t)
        total += term
        certified = _ratio_certified(n, t)
        bound = float(term) if certified else math.inf
        if spec.truncation is None:
            if certified and bound < TAIL_TOL:
                return WalkSeries(total, bound, t)
        elif t + 2 > spec.truncation:
            if bound >= TAIL_TOL:
                raise PrecisionError(f"truncation {spec.truncation} leaves tail bound {bound:.3g} >= {TAIL_TOL}")
            return WalkSeries(total, bound, t)
        t += 2


def walk_success(spec: WalkSpec | int) -> float:
    """Probability that the XX90 walk reaches success before the block is used up."""
    if isinstance(spec, int):
        spec = WalkSpec(spec)
    return walk_series(spec).success


def simulate_walk(n: int, trials: int, rng: np.random.Generator, max_steps: int = 100_000) -> float:
    """Monte Carlo of the walk: down 1/2 (fusion failure), up 1/4, succeed 1/4."""
    pos = np.full(trials, n, dtype=np.int32)
    alive = np.arange(trials)
    failed = 0
    for _ in range(max_steps):
        if alive.size == 0:
            break
        u = rng.random(alive.size)
        step = np.where(u < 0.5, -1, 1)
        done = u >= 0.75
        pos[alive] += step
        lost = (pos[alive] <= 0) & ~done
        failed += int(np.count_nonzero(lost))
        alive = alive[~(done | lost)]
    return 1 - failed / trials


# ----------------------------------------------------------------------
# Per-operation rates
# ----------------------------------------------------------------------


def rates_source_prep(noise: PhysicalNoise) -> Level1Rates:
    # no Z rate is given for state production; it is left at zero
    return Level1Rates(
        located=_exposure(noise.gamma, EXPONENTS["source_loss"]),
        x_unlocated=_exposure(noise.eta_x, EXPONENTS["source_x"]),
        z_unlocated=0.0,
        op_kind=OpKind.SOURCE_PREP,
    )


def z90_located(gamma: float, n: int = CODE_SIZE) -> float:
    """Located rate of the re-encoding Z90 on a size-n block.

    Attempt j succeeds with probability 2^-j; survival depends on how many
    qubits remain and how long they have waited.
    """
    q = 1 - gamma
    ok = sum(2.0**-j * q ** (j * (1 + j) / 2) * q ** (3 * j + (1 + j) * (n - j)) for j in range(1, n + 1))
    return 1 - ok


def rates_z90(noise: PhysicalNoise) -> Level1Rates:
    return Level1Rates(
        located=z90_located(noise.gamma),
        x_unlocated=_exposure(noise.eta_x, EXPONENTS["z90_x"]),
        z_unlocated=_exposure(noise.eta_z, EXPONENTS["z90_z"]),
        op_kind=OpKind.Z90,
    )


def xx90_located(gamma: float, n: int = CODE_SIZE, steps: int = WALK_STEPS) -> float:
    """1 - P_S(n) (1-gamma)^(steps (n+3)) for one encoded input."""
    survive = 1.0 - _exposure(gamma, steps * (n + 3))
    return 1 - walk_success(WalkSpec(n)) * survive


def rates_xx90(noise: PhysicalNoise) -> Level1Rates:
    return Level1Rates(
        located=xx90_located(noise.gamma),
        x_unlocated=_exposure(noise.eta_x, EXPONENTS["xx90_x"]),
        z_unlocated=_exposure(noise.eta_z, EXPONENTS["xx90_z"]),
        op_kind=OpKind.XX90,
    )


def rates_memory(noise: PhysicalNoise) -> Level1Rates:
    return Level1Rates(
        located=_exposure(noise.gamma, EXPONENTS["memory_loss"]),
        x_unlocated=_exposure(noise.eta_x, EXPONENTS["memory_x"]),
        z_unlocated=_exposure(noise.eta_z, EXPONENTS["memory_z"]),
        op_kind=OpKind.MEMORY,
    )


def rates_measurement(noise: PhysicalNoise) -> Level1Rates:
    # Z errors do not change a computational-basis readout
    return Level1Rates(
        located=_exposure(noise.gamma, EXPONENTS["measure"]),
        x_unlocated=_exposure(noise.eta_x, EXPONENTS["measure"]),
        z_unlocated=0.0,
        op_kind=OpKind.MEASUREMENT,
    )


RATE_FUNCTIONS = {
    OpKind.SOURCE_PREP: rates_source_prep,
    OpKind.Z90: rates_z90,
    OpKind.XX90: rates_xx90,
    OpKind.MEMORY: rates_memory,
    OpKind.MEASUREMENT: rates_measurement,
}


def all_rates(noise: PhysicalNoise) -> dict[OpKind, Level1Rates]:
    return {kind: fn(noise) for kind, fn in RATE_FUNCTIONS.items()}


def optimal_code_size(noise: PhysicalNoise, n_range: Iterable[int] = range(1, 26)) -> int:
    """Block size minimising the XX90 located rate; ties go to the smaller n."""
    sizes = sorted(set(n_range))
    if not sizes:
        raise ValueError("n_range is empty")
    if sizes[0] < 1 or sizes[-1] > 25:
        raise ValueError("n_range must lie within [1, 25]")
    best = min(sizes, key=lambda n: (xx90_located(noise.gamma, n), n))
    return best
