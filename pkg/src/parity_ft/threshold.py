"""Polynomial level-to-level maps, their iteration and threshold curves.

A RateMap sends one (located, X, Z) triple to the triple one level of
concatenation up.  It is a least-squares polynomial fit without constant term
to abstract-noise Monte Carlo data, reused at every level above the second.
The first step is simulated directly from the physical noise at (gamma, eta).
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

PROVENANCE = ("analytic-level1", "simulated-level2", "iterated-levelK")


class FitError(ValueError):
    pass


class BudgetExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class RatePoint:
    located: float
    x_unlocated: float
    z_unlocated: float
    provenance: str = "simulated-level2"

    def __post_init__(self):
        for name in ("located", "x_unlocated", "z_unlocated"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0) or math.isnan(v):
                raise ValueError(f"{name}={v} is not a probability")
        if self.provenance not in PROVENANCE:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.located, self.x_unlocated, self.z_unlocated])

    @classmethod
    def from_array(cls, v, provenance: str = "iterated-levelK") -> RatePoint:
        v = np.clip(np.asarray(v, dtype=float), 0.0, 1.0)
        return cls(float(v[0]), float(v[1]), float(v[2]), provenance)


def monomials(degree: int, lowest: int = 1) -> tuple[tuple[int, ...], ...]:
    """Variable-index tuples of every monomial of total degree lowest..degree in three variables."""
    out = []
    for d in range(lowest, degree + 1):
        out += list(itertools.combinations_with_replacement(range(3), d))
    return tuple(out)


def _design(inputs: np.ndarray, terms) -> np.ndarray:
    return np.stack([np.prod(inputs[:, list(t)], axis=1) for t in terms], axis=1)


@dataclass(frozen=True)
class RateMap:
    degree: int
    coefficients: np.ndarray  # (3 outputs, monomials)
    residual_rms: tuple[float, float, float]
    mean_output: tuple[float, float, float]
    samples: int = 0
    terms: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        if not self.terms:
            object.__setattr__(self, "terms", monomials(self.degree, min(2, self.degree)))
        if self.coefficients.shape != (3, len(self.terms)):
            raise ValueError("coefficient tensor does not match the monomial basis")

    def evaluate(self, inputs: np.ndarray) -> np.ndarray:
        """Raw polynomial values for an (N, 3) array, clamped to [0, 1]."""
        x = np.atleast_2d(np.asarray(inputs, dtype=float))
        return np.clip(_design(x, self.terms) @ self.coefficients.T, 0.0, 1.0)

    def __call__(self, point: RatePoint) -> RatePoint:
        return RatePoint.from_array(self.evaluate(point.as_array())[0])

    def to_json(self) -> str:
        return json.dumps(
            {
                "degree": self.degree,
                "terms": [list(t) for t in self.terms],
                "coefficients": self.coefficients.tolist(),
                "residual_rms": list(self.residual_rms),
                "mean_output": list(self.mean_output),
                "samples": self.samples,
            },
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str) -> RateMap:
        d = json.loads(text)
        return cls(
            d["degree"],
            np.array(d["coefficients"], dtype=float),
            tuple(d["residual_rms"]),
            tuple(d["mean_output"]),
            d["samples"],
            tuple(tuple(t) for t in d["terms"]),
        )

    def describe(self) -> str:
        names = ("l", "x", "z")
        lines = []
        for k, out in enumerate(("located", "x_unlocated", "z_unlocated")):
            parts = [f"{c:+.4g}*{'*'.join(names[i] for i in t)}" for c, t in zip(self.coefficients[k], self.terms)]
            lines.append(f"{out} = {' '.join(parts)}  (rms {self.residual_rms[k]:.3g})")
        return "\n".join(lines)


def fit_map(
    samples: Sequence[tuple[RatePoint, RatePoint]],
    degree: int = 2,
    weights: Sequence[float] | None = None,
    linear: bool = False,
) -> RateMap:
    """Least-squares fit of each output component as a polynomial without constant term.

    Args:
        samples: (input, output) pairs.
        degree: total degree; 2 gives squares and cross terms.
        weights: optional per-sample weights (e.g. inverse standard errors).
        linear: also fit linear terms.  They vanish for a telecorrector that
            survives every single fault, so by default they are left out
            rather than fitted to noise.

    Raises:
        FitError: too few samples (fewer than three per coefficient) or a
            rank-deficient design matrix.
    """
    terms = monomials(degree, 1 if linear else min(2, degree))
    if len(samples) < 3 * len(terms):
        raise FitError(f"need at least {3 * len(terms)} samples for {len(terms)} coefficients, got {len(samples)}")
    x = np.array([p.as_array() for p, _ in samples])
    y = np.array([q.as_array() for _, q in samples])
    a = _design(x, terms)
    scale = np.linalg.norm(a, axis=0)
    if np.any(scale == 0):
        raise FitError("design matrix has an all-zero column")
    a_n = a / scale
    if np.linalg.matrix_rank(a_n) < len(terms):
        raise FitError("design matrix is rank deficient; vary the input components independently")
    w = np.ones(len(samples)) if weights is None else np.asarray(weights, dtype=float)
    coef = np.zeros((3, len(terms)))
    for k in range(3):
        sol, *_ = np.linalg.lstsq(a_n * w[:, None], y[:, k] * w, rcond=None)
        coef[k] = sol / scale
    resid = a @ coef.T - y
    rms = tuple(float(v) for v in np.sqrt(np.mean(resid**2, axis=0)))
    mean = tuple(float(v) for v in y.mean(axis=0))
    return RateMap(degree, coef, rms, mean, len(samples), terms)


@dataclass(frozen=True)
class Iteration:
    points: list[RatePoint]
    status: str  # "converged", "diverged" or "undecided"

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def levels(self) -> int:
        return len(self.points) - 1


def iterate_map(
    rate_map: Callable[[RatePoint], RatePoint],
    start: RatePoint,
    levels: int = 60,
    growth_levels: int = 3,
    floor: float = 1e-12,
) -> Iteration:
    """Apply the map repeatedly.

    Converged once every component is below ``floor``.  Diverged once some
    component has stayed above the largest starting component for
    ``growth_levels`` levels in a row; measuring growth against the largest
    component keeps a small rate that is briefly fed by a large one (or one
    that starts at zero) from being read as divergence.
    """
    if levels < 1:
        raise ValueError("levels must be at least 1")
    top = float(start.as_array().max())
    points = [start]
    grown = 0
    p = start
    for _ in range(levels):
        if np.all(p.as_array() < floor):
            return Iteration(points, "converged")
        p = rate_map(p)
        points.append(p)
        grown = grown + 1 if p.as_array().max() > top else 0
        if grown >= growth_levels:
            return Iteration(points, "diverged")
    if np.all(p.as_array() < floor):
        return Iteration(points, "converged")
    return Iteration(points, "undecided")


# ----------------------------------------------------------------------
# Threshold curves
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class CurvePoint:
    gamma: float
    eta: float
    tol: float
    converged_levels: int
    status: str = "ok"  # "ok" or "partial"
    direction: tuple[float, float] = (0.0, 0.0)
    bracket: tuple[float, float] = (0.0, 0.0)  # scale factors along the ray


@dataclass
class ThresholdCurve:
    code: str
    points: list[CurvePoint]
    rate_map: RateMap | None = None

    def __post_init__(self):
        self.points = sorted(self.points, key=lambda p: (p.gamma, -p.eta))

    def is_monotone(self, rtol: float = 0.0) -> bool:
        """True when eta never increases with gamma (up to the bisection tolerances)."""
        for a, b in zip(self.points, self.points[1:]):
            slack = rtol + max(a.tol, b.tol)
            if b.eta > a.eta * (1 + slack) and b.eta > 0:
                return False
        return True

    @property
    def complete(self) -> bool:
        return all(p.status == "ok" for p in self.points)

    def intercept(self, axis: str) -> float | None:
        for p in self.points:
            if axis == "gamma" and p.eta == 0:
                return p.gamma
            if axis == "eta" and p.gamma == 0:
                return p.eta
        return None

    def to_csv(self, status: bool = False) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        head = ["gamma", "eta", "tol", "converged_levels"] + (["status"] if status else [])
        w.writerow(head)
        for p in self.points:
            row = [f"{p.gamma:.6e}", f"{p.eta:.6e}", f"{p.tol:g}", p.converged_levels]
            w.writerow(row + ([p.status] if status else []))
        return buf.getvalue()


def ray_directions(count: int, gamma_scale: float = 1e-3, eta_scale: float = 1e-5) -> list[tuple[float, float]]:
    """``count`` rays from the eta axis to the gamma axis, evenly spaced in angle after scaling."""
    if count < 2:
        raise ValueError("need at least the two axis rays")
    out = []
    for k in range(count):
        th = 0.5 * math.pi * k / (count - 1)
        g, e = math.sin(th) * gamma_scale, math.cos(th) * eta_scale
        out.append((0.0 if k == 0 else g, 0.0 if k == count - 1 else e))
    return out


@dataclass
class Budget:
    """Cap on the number of level-2 evaluations (each one Monte Carlo run)."""

    max_evaluations: int = 400
    used: int = 0

    def spend(self) -> None:
        if self.used >= self.max_evaluations:
            raise BudgetExhausted(f"used all {self.max_evaluations} evaluations")
        self.used += 1


def bisect_ray(
    evaluate: Callable[[float, float], RatePoint],
    rate_map: Callable[[RatePoint], RatePoint],
    direction: tuple[float, float],
    tol: float,
    budget: Budget,
    levels: int = 60,
    max_expand: int = 20,
) -> CurvePoint:
    """Find the largest scale s with (s*dg, s*de) below threshold, to relative ``tol``.

    The lower bracket always has a converging iteration and the upper one a
    non-converging one.
    """
    dg, de = direction

    def below(s: float) -> Iteration:
        budget.spend()
        return iterate_map(rate_map, evaluate(s * dg, s * de), levels)

    lo, hi = 0.0, 1.0
    lo_levels = 0
    try:
        it = below(hi)
        k = 0
        while it.converged:
            lo, lo_levels = hi, it.levels
            hi *= 2.0
            k += 1
            if k > max_expand or max(hi * dg, hi * de) >= 1.0:
                raise BudgetExhausted("no divergent point found along the ray within the physical range")
            it = below(hi)
        if lo == 0.0:
            # shrink until something converges
            while True:
                mid = hi / 2.0
                it = below(mid)
                if it.converged:
                    lo, lo_levels = mid, it.levels
                    break
                hi = mid
                if hi < 1e-9:
                    raise BudgetExhausted("no convergent point found along the ray")
        while (hi - lo) > tol * hi:
            mid = 0.5 * (lo + hi)
            it = below(mid)
            if it.converged:
                lo, lo_levels = mid, it.levels
            else:
                hi = mid
        status = "ok"
    except BudgetExhausted:
        status = "partial"
    s = lo if lo > 0 else 0.0
    rel = (hi - lo) / hi if hi > 0 else 1.0
    return CurvePoint(s * dg, s * de, round(rel, 6), lo_levels, status, direction, (lo, hi))


def trace_threshold(
    code: str,
    evaluate: Callable[[float, float], RatePoint],
    rate_map: Callable[[RatePoint], RatePoint],
    directions: Sequence[tuple[float, float]],
    tol: float = 0.05,
    budget: Budget | None = None,
    levels: int = 60,
) -> ThresholdCurve:
    """Bisect along each ray; ``evaluate`` gives the level-2 rates at a physical (gamma, eta)."""
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    for d in directions:
        if d[0] < 0 or d[1] < 0 or d == (0.0, 0.0):
            raise ValueError(f"direction {d} is not a ray into the (gamma, eta) quadrant")
    budget = budget or Budget()
    pts = [bisect_ray(evaluate, rate_map, d, tol, budget, levels) for d in directions]
    return ThresholdCurve(code, pts, rate_map if isinstance(rate_map, RateMap) else None)
