"""Erasure-aware minimum-weight decoding for the CSS codes.

One sector (X or Z errors) is decoded at a time.  Unknown values on erased
coordinates are solved exactly over GF(2); the rest of the error is the
minimum-weight pattern consistent with the syndrome.  Whenever the logical
value of the correction is not pinned down the result is a heralded failure.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .codes import CssCode, nullspace, parity, popcount

_PAR16 = np.array([bin(i).count("1") & 1 for i in range(1 << 16)], dtype=np.uint8)


def parity_array(x: np.ndarray) -> np.ndarray:
    """Bit parity of non-negative int64 values below 2^32."""
    x = np.asarray(x, dtype=np.int64)
    return _PAR16[x & 0xFFFF] ^ _PAR16[(x >> 16) & 0xFFFF]


def syndrome_array(words: np.ndarray, rows: tuple[int, ...]) -> np.ndarray:
    s = np.zeros(np.shape(words), dtype=np.int64)
    for i, m in enumerate(rows):
        s |= parity_array(words & m).astype(np.int64) << i
    return s


@dataclass(frozen=True)
class DecodeResult:
    correction: int  # error estimate; applying it returns the word to C
    logical: int  # logical parity of the correction


@dataclass(frozen=True)
class HeraldedFailure:
    reason: str


@dataclass(frozen=True)
class Corrections:
    x: int
    z: int


def _mask_bits(mask: int, n: int) -> list[int]:
    return [i for i in range(n) if mask >> i & 1]


def _left_null(cols: list[int], r: int) -> list[int]:
    """Rows p (as r-bit ints) with p . c = 0 for every column c."""
    if not cols:
        return [1 << i for i in range(r)]
    m = np.array([[(c >> i) & 1 for i in range(r)] for c in cols], dtype=np.uint8)
    return [int(sum(int(b) << i for i, b in enumerate(row))) for row in nullspace(m)]


def _solve(cols: list[int], r: int, target: int) -> int | None:
    """Find x with sum_k x_k cols[k] = target; returns x as a bit mask over cols."""
    basis: list[tuple[int, int]] = []  # (vector, combination)
    for k, c in enumerate(cols):
        comb = 1 << k
        for v, cb in basis:
            if c ^ v < c:
                c, comb = c ^ v, comb ^ cb
        if c:
            basis.append((c, comb))
            basis.sort(key=lambda t: -t[0])
    out = 0
    for v, cb in basis:
        if target ^ v < target:
            target, out = target ^ v, out ^ cb
    return out if target == 0 else None


class SectorDecoder:
    """Decoder for one error type of a CSS code with checks ``rows``.

    Results are cached on (erasure mask, syndrome).
    """

    def __init__(self, code: CssCode, rows: tuple[int, ...] | None = None):
        self.code = code
        self.n = code.n
        self.rows = rows if rows is not None else code.check_masks
        self.r = len(self.rows)
        # syndrome of a unit error on each coordinate
        self.cols = [sum(((row >> i) & 1) << k for k, row in enumerate(self.rows)) for i in range(self.n)]
        self.radius = self._covering_radius()
        pats = [0]
        for w in range(1, self.radius + 1):
            pats += [sum(1 << i for i in c) for c in combinations(range(self.n), w)]
        self.patterns = np.array(pats, dtype=np.int64)
        self.weights = np.array([popcount(p) for p in pats], dtype=np.int64)
        self.pattern_syndromes = syndrome_array(self.patterns, self.rows)
        self.pattern_logical = parity_array(self.patterns & code.logical).astype(np.int64)
        self._cache: dict[tuple[int, int], DecodeResult | HeraldedFailure] = {}
        self._erasure_cache: dict[int, tuple[list[int], int | None, list[int]]] = {}

    def _covering_radius(self) -> int:
        seen = {0}
        w = 0
        while len(seen) < 2**self.r:
            w += 1
            for c in combinations(range(self.n), w):
                s = 0
                for i in c:
                    s ^= self.cols[i]
                seen.add(s)
        return w

    def _erasure_info(self, erased: int):
        info = self._erasure_cache.get(erased)
        if info is None:
            bits = _mask_bits(erased, self.n)
            ecols = [self.cols[i] for i in bits]
            null = _left_null(ecols, self.r)
            # logical restricted to the erasure as a combination of checks: L_E = w H_E
            lbits = [(self.code.logical >> i) & 1 for i in bits]
            w = _solve(list(self.rows_restricted(bits)), len(bits), sum(b << k for k, b in enumerate(lbits))) if bits else 0
            info = (null, w, bits)
            self._erasure_cache[erased] = info
        return info

    def rows_restricted(self, bits: list[int]):
        for row in self.rows:
            yield sum(((row >> i) & 1) << k for k, i in enumerate(bits))

    def decode(self, syndrome: int, erased: int = 0) -> DecodeResult | HeraldedFailure:
        key = (erased, syndrome)
        hit = self._cache.get(key)
        if hit is None:
            hit = self._decode(syndrome, erased)
            self._cache[key] = hit
        return hit

    def _decode(self, syndrome: int, erased: int) -> DecodeResult | HeraldedFailure:
        null, w, bits = self._erasure_info(erased)
        free = (self.patterns & erased) == 0
        t = syndrome ^ self.pattern_syndromes[free]
        ok = np.ones(t.shape, dtype=bool)
        for p in null:
            ok &= parity_array(t & p) == 0
        if not ok.any():
            return HeraldedFailure("inconsistent")
        if w is None:
            return HeraldedFailure("logical operator inside erasure")
        idx = np.nonzero(free)[0][ok]
        tt = t[ok]
        wts = self.weights[idx]
        best = wts == wts.min()
        # the correction's logical parity is L_N . v_N + w . (H_E v_E), w selecting check rows
        lvals = self.pattern_logical[idx[best]] ^ parity_array(tt[best] & w)
        if lvals.min() != lvals.max():
            return HeraldedFailure("ambiguous")
        k = int(idx[best][0])
        v = int(self.patterns[k])
        target = int(tt[best][0])
        if bits:
            sol = _solve([self.cols[i] for i in bits], self.r, target)
            v |= sum(1 << bits[j] for j in range(len(bits)) if sol >> j & 1)
        return DecodeResult(v, int(lvals[0]))

    def batch(self, syndromes: np.ndarray, erased: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorised decode; returns (failed, logical parity of correction)."""
        keys = (np.asarray(erased, dtype=np.int64) << self.r) | np.asarray(syndromes, dtype=np.int64)
        uniq, inv = np.unique(keys, return_inverse=True)
        fail = np.zeros(uniq.shape, dtype=bool)
        logical = np.zeros(uniq.shape, dtype=np.int64)
        mask = (1 << self.r) - 1
        for j, key in enumerate(uniq.tolist()):
            res = self.decode(key & mask, key >> self.r)
            if isinstance(res, HeraldedFailure):
                fail[j] = True
            else:
                logical[j] = res.logical
        return fail[inv], logical[inv]


class DualMembership:
    """Tests whether a word with erasures can be completed into C-perp."""

    def __init__(self, code: CssCode):
        self.gen = code.generator_masks
        self.r = len(self.gen)
        self.n = code.n
        self.cols = [sum(((g >> i) & 1) << k for k, g in enumerate(self.gen)) for i in range(self.n)]
        self._null: dict[int, np.ndarray] = {}

    def _null_rows(self, erased: int) -> np.ndarray:
        rows = self._null.get(erased)
        if rows is None:
            ecols = [self.cols[i] for i in _mask_bits(erased, self.n)]
            rows = np.array(_left_null(ecols, self.r), dtype=np.int64)
            self._null[erased] = rows
        return rows

    def accepts(self, words: np.ndarray, erased: np.ndarray) -> np.ndarray:
        words = np.asarray(words, dtype=np.int64) & ~np.asarray(erased, dtype=np.int64)
        synd = syndrome_array(words, self.gen)
        out = np.ones(words.shape, dtype=bool)
        erased = np.asarray(erased, dtype=np.int64)
        for e in np.unique(erased).tolist():
            sel = erased == e
            s = synd[sel]
            ok = np.ones(s.shape, dtype=bool)
            for p in self._null_rows(e).tolist():
                ok &= parity_array(s & p) == 0
            out[sel] = ok
        return out


_DECODERS: dict[str, SectorDecoder] = {}


def sector_decoder(code: CssCode) -> SectorDecoder:
    dec = _DECODERS.get(code.name)
    if dec is None:
        dec = SectorDecoder(code)
        _DECODERS[code.name] = dec
    return dec


def decode(code: CssCode, x_syndrome: int, z_syndrome: int, erasure_mask: int = 0) -> Corrections | HeraldedFailure:
    """Correct X and Z errors given both syndromes and the erased positions.

    Syndromes are computed with erased coordinates zeroed.  Returns the X and
    Z corrections, or HeraldedFailure when either sector cannot fix the
    logical value.
    """
    limit = 1 << code.num_checks
    for s in (x_syndrome, z_syndrome):
        if not 0 <= s < limit:
            raise ValueError(f"syndrome {s} does not fit {code.num_checks} checks")
    if not 0 <= erasure_mask < 1 << code.n:
        raise ValueError("erasure mask has bits outside the block")
    dec = sector_decoder(code)
    rx = dec.decode(x_syndrome, erasure_mask)
    if isinstance(rx, HeraldedFailure):
        return rx
    rz = dec.decode(z_syndrome, erasure_mask)
    if isinstance(rz, HeraldedFailure):
        return rz
    return Corrections(rx.correction, rz.correction)


def residual_logical(code: CssCode, error: int, erased: int = 0) -> int | HeraldedFailure:
    """Logical flip left after ideally decoding ``error`` (one sector)."""
    error &= ~erased
    res = sector_decoder(code).decode(code.syndrome(error), erased)
    if isinstance(res, HeraldedFailure):
        return res
    return parity((error ^ res.correction) & code.logical)
