"""Monte Carlo driven fitting and threshold tracing for one code."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .rates import PhysicalNoise
from .telecorrect.codes import get_code
from .telecorrect.frame import NoiseTables
from .telecorrect.simulate import Level2Rates, pair_coefficients, simulate_telecorrection
from .threshold import Budget, RateMap, RatePoint, ThresholdCurve, fit_map, ray_directions, trace_threshold

FRACTIONS = (0.0, 0.5, 1.0, 1.5)


@dataclass(frozen=True)
class McSettings:
    samples: int = 100_000
    seed: int = 1
    workers: int = 1
    coupled: bool = True  # common random numbers across noise levels


def to_point(r: Level2Rates) -> RatePoint:
    return RatePoint(r.located, r.x_unlocated, r.z_unlocated, "simulated-level2")


def level2_rates(code: str, gamma: float, eta: float, mc: McSettings) -> Level2Rates:
    tables = NoiseTables.from_physical(PhysicalNoise(gamma, eta))
    return simulate_telecorrection(get_code(code), tables, mc.samples, mc.seed, mc.workers, coupled=mc.coupled)


def abstract_rates(code: str, triple, mc: McSettings) -> Level2Rates:
    return simulate_telecorrection(get_code(code), NoiseTables.uniform(triple), mc.samples, mc.seed, mc.workers, coupled=mc.coupled)


def fixed_point(code: str, axis: str, mc: McSettings, lo: float = 1e-6, hi: float = 0.5, rtol: float = 0.05) -> float:
    """Rate p where one uniform-noise round maps p to itself along one axis.

    ``axis`` is "located" (only located errors) or "unlocated" (equal X and Z
    rates, compared on their sum).  Bisection is geometric.
    """
    if axis == "located":

        def grows(p):
            return abstract_rates(code, (p, 0.0, 0.0), mc).located > p

    elif axis == "unlocated":

        def grows(p):
            r = abstract_rates(code, (0.0, p, p), mc)
            return r.x_unlocated + r.z_unlocated > 2 * p

    else:
        raise ValueError(f"axis must be 'located' or 'unlocated', got {axis!r}")
    while hi / lo > 1 + rtol:
        mid = math.sqrt(lo * hi)
        if grows(mid):
            hi = mid
        else:
            lo = mid
    return math.sqrt(lo * hi)


def abstract_grid(located_scale: float, unlocated_scale: float, fractions=FRACTIONS) -> list[tuple[float, float, float]]:
    """Grid of uniform input triples; X and Z vary independently so the fit has full rank."""
    pts = []
    for fl, fx, fz in itertools.product(fractions, repeat=3):
        if fl == fx == fz == 0:
            continue
        pts.append((fl * located_scale, fx * unlocated_scale, fz * unlocated_scale))
    return pts


@dataclass
class MapFit:
    rate_map: RateMap
    inputs: list[RatePoint]
    outputs: list[Level2Rates]
    located_scale: float
    unlocated_scale: float

    def residuals(self) -> np.ndarray:
        x = np.array([p.as_array() for p in self.inputs])
        y = np.array([r.as_tuple() for r in self.outputs])
        return self.rate_map.evaluate(x) - y


def fit_abstract_map(code: str, mc: McSettings, located_scale: float | None = None, unlocated_scale: float | None = None) -> MapFit:
    """Fit the level-to-level map from uniform-noise runs on a grid around the fixed points."""
    coarse = McSettings(max(mc.samples // 4, 1000), mc.seed, mc.workers, mc.coupled)
    if located_scale is None:
        located_scale = fixed_point(code, "located", coarse, lo=1e-3, hi=0.5)
    if unlocated_scale is None:
        unlocated_scale = fixed_point(code, "unlocated", coarse, lo=1e-6, hi=0.1)
    grid = abstract_grid(located_scale, unlocated_scale)
    inputs, outputs = [], []
    for t in grid:
        inputs.append(RatePoint(*t, provenance="analytic-level1"))
        outputs.append(abstract_rates(code, t, mc))
    # weight each sample by the inverse of its largest standard error, floored
    floor = 1.0 / mc.samples
    weights = [1.0 / max(r.stderr_located, r.stderr_x, r.stderr_z, floor) for r in outputs]
    fitted = fit_map([(p, to_point(r)) for p, r in zip(inputs, outputs)], degree=2, weights=weights)
    return MapFit(fitted, inputs, outputs, located_scale, unlocated_scale)


def second_order_map(code: str) -> RateMap:
    """Level-to-level map from exhaustive fault-pair counting instead of a fit.

    Exact as the rates go to zero, but blind to third-order effects such as
    three erasures in one block, so it cannot show a loss-only threshold.
    Used to cross-check the fitted map near the origin.
    """
    return RateMap(2, pair_coefficients(get_code(code)), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0))


def run_threshold(
    code: str,
    mc: McSettings,
    rays: int = 7,
    tol: float = 0.05,
    max_evaluations: int = 400,
    rate_map: RateMap | None = None,
    gamma_scale: float = 1e-3,
    eta_scale: float = 1e-5,
) -> tuple[ThresholdCurve, MapFit | None]:
    """Full pipeline: fit the map, then bisect each ray using direct level-2 simulations."""
    fit = None
    if rate_map is None:
        fit = fit_abstract_map(code, mc)
        rate_map = fit.rate_map
    cache: dict[tuple[float, float], RatePoint] = {}

    def evaluate(gamma: float, eta: float) -> RatePoint:
        key = (gamma, eta)
        if key not in cache:
            cache[key] = to_point(level2_rates(code, gamma, eta, mc))
        return cache[key]

    curve = trace_threshold(
        code,
        evaluate,
        rate_map,
        ray_directions(rays, gamma_scale, eta_scale),
        tol,
        Budget(max_evaluations),
    )
    curve.rate_map = rate_map
    return curve, fit
