"""Steane and Golay CSS codes over GF(2), with bit-mask helpers.

Binary matrices are numpy uint8 arrays; single vectors are often packed into
Python ints with bit ``i`` standing for coordinate ``i``.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class CodeConstructionError(RuntimeError):
    pass


def rref(m: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2); returns (matrix, pivot columns)."""
    a = np.array(m, dtype=np.uint8) % 2
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hit = np.nonzero(a[r:, c])[0]
        if hit.size == 0:
            continue
        p = r + hit[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        for k in np.nonzero(a[:, c])[0]:
            if k != r:
                a[k] ^= a[r]
        pivots.append(c)
        r += 1
    return a[:r], pivots


def rank(m: np.ndarray) -> int:
    if np.size(m) == 0:
        return 0
    return len(rref(m)[1])


def nullspace(m: np.ndarray) -> np.ndarray:
    """Basis (as rows) of {v : m v = 0} over GF(2)."""
    m = np.atleast_2d(np.array(m, dtype=np.uint8))
    n = m.shape[1]
    red, pivots = rref(m) if m.shape[0] else (np.zeros((0, n), np.uint8), [])
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for row, p in zip(red, pivots):
            basis[k, p] = row[f]
    return basis


def to_mask(bits) -> int:
    return int(sum(1 << i for i, b in enumerate(np.asarray(bits).reshape(-1)) if b))


def from_mask(mask: int, n: int) -> np.ndarray:
    return np.array([(mask >> i) & 1 for i in range(n)], dtype=np.uint8)


def popcount(x: int) -> int:
    return bin(x).count("1")


def parity(x: int) -> int:
    return popcount(x) & 1


@dataclass(frozen=True)
class CssCode:
    """CSS code with identical X and Z check matrices (C-perp inside C).

    ``checks`` is the parity-check matrix of the classical code C; both
    stabilizer types are its rows.  The logical operators act on the
    all-ones vector.
    """

    name: str
    n: int
    checks: np.ndarray
    distance: int
    logical: int = field(default=0)

    def __post_init__(self):
        if self.logical == 0:
            object.__setattr__(self, "logical", (1 << self.n) - 1)

    @property
    def num_checks(self) -> int:
        return self.checks.shape[0]

    # X-type and Z-type generators coincide
    @property
    def hx(self) -> np.ndarray:
        return self.checks

    @property
    def hz(self) -> np.ndarray:
        return self.checks

    @cached_property
    def check_masks(self) -> tuple[int, ...]:
        return tuple(to_mask(row) for row in self.checks)

    @cached_property
    def generator(self) -> np.ndarray:
        """Rows spanning C = ker(checks); the all-ones word is among them."""
        return nullspace(self.checks)

    @cached_property
    def generator_masks(self) -> tuple[int, ...]:
        return tuple(to_mask(row) for row in self.generator)

    @cached_property
    def check_columns(self) -> np.ndarray:
        """Syndrome of a unit error on each coordinate, as ints."""
        return np.array([to_mask(self.checks[:, i]) for i in range(self.n)], dtype=np.int64)

    def syndrome(self, error: int) -> int:
        s = 0
        for i, row in enumerate(self.check_masks):
            s |= parity(row & error) << i
        return s

    def logical_parity(self, word: int) -> int:
        return parity(word & self.logical)

    def in_dual(self, word: int) -> bool:
        """True when ``word`` lies in C-perp, the row space of the checks."""
        return all(parity(g & word) == 0 for g in self.generator_masks)


def _verify(code: CssCode) -> None:
    h = code.checks.astype(np.int64)
    if np.any((h @ h.T) % 2):
        raise CodeConstructionError(f"{code.name}: checks are not self-orthogonal")
    if rank(code.checks) != code.num_checks:
        raise CodeConstructionError(f"{code.name}: checks are not independent")
    if code.syndrome(code.logical) != 0:
        raise CodeConstructionError(f"{code.name}: logical operator fails a check")
    if code.in_dual(code.logical):
        raise CodeConstructionError(f"{code.name}: logical operator is a stabilizer")
    if logical_distance(code) != code.distance:
        raise CodeConstructionError(f"{code.name}: distance check failed")


def logical_distance(code: CssCode) -> int:
    """Minimum weight over words of C that are not in C-perp."""
    gens = code.generator_masks
    best = code.n
    for coeffs in itertools.product((0, 1), repeat=len(gens)):
        w = 0
        for c, g in zip(coeffs, gens):
            if c:
                w ^= g
        if w and not code.in_dual(w):
            best = min(best, popcount(w))
    return best


def steane_code() -> CssCode:
    # columns are 1..7 in binary, the [7,4,3] Hamming check matrix
    h = np.array([[(c >> b) & 1 for c in range(1, 8)] for b in range(3)], dtype=np.uint8)
    code = CssCode("Steane7", 7, h, 3)
    _verify(code)
    return code


GOLAY_POLY = 0b110001110101  # x^11 + x^10 + x^6 + x^5 + x^4 + x^2 + 1


def golay_code() -> CssCode:
    """[[23,1,7]] code from the cyclic [23,12,7] binary Golay code."""
    g = np.zeros((12, 23), dtype=np.uint8)
    poly = [(GOLAY_POLY >> k) & 1 for k in range(12)]
    for r in range(12):
        g[r, r : r + 12] = poly
    h = nullspace(g)
    h, _ = rref(h)
    code = CssCode("Golay23", 23, h, 7)
    _verify(code)
    return code


CODES = {"steane": steane_code, "golay": golay_code}
_ALIASES = {"steane7": "steane", "golay23": "golay"}


@functools.lru_cache(maxsize=None)
def _build(key: str) -> CssCode:
    return CODES[key]()


def get_code(name: str) -> CssCode:
    key = _ALIASES.get(name.lower(), name.lower())
    if key not in CODES:
        raise ValueError(f"unknown code {name!r}; choose from {sorted(CODES)}")
    return _build(key)
