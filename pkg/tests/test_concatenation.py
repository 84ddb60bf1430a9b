import numpy as np
import pytest

from parity_ft.concatenation import (
    FRACTIONS,
    McSettings,
    abstract_grid,
    abstract_rates,
    fit_abstract_map,
    fixed_point,
    level2_rates,
    run_threshold,
    to_point,
)
from parity_ft.rates import PhysicalNoise, rates_xx90
from parity_ft.threshold import RatePoint, fit_map, iterate_map


def test_grid_shape():
    pts = abstract_grid(0.1, 1e-4)
    assert len(pts) == len(FRACTIONS) ** 3 - 1 == 63
    assert (0.0, 0.0, 0.0) not in pts
    assert max(p[0] for p in pts) == pytest.approx(0.15)
    assert max(p[2] for p in pts) == pytest.approx(1.5e-4)


def test_abstract_rates_zero_noise():
    r = abstract_rates("steane", (0.0, 0.0, 0.0), McSettings(2000))
    assert r.as_tuple() == (0.0, 0.0, 0.0)


def test_level2_rates_use_physical_tables():
    mc = McSettings(20000, seed=2)
    a = level2_rates("steane", 1e-3, 1e-5, mc)
    b = level2_rates("steane", 1e-3, 1e-5, mc)
    assert a == b
    # still below the level-1 located rate of the XX90 gate at the same point
    assert 0 < a.located < rates_xx90(PhysicalNoise(1e-3, 1e-5)).located


def test_fixed_point_axis_check():
    with pytest.raises(ValueError):
        fixed_point("steane", "diagonal", McSettings(1000))


def test_located_fixed_point_is_crossing():
    mc = McSettings(20000, seed=3)
    p = fixed_point("steane", "located", mc, lo=1e-3, hi=0.5, rtol=0.1)
    below = abstract_rates("steane", (p / 2, 0.0, 0.0), mc).located
    above = abstract_rates("steane", (min(2 * p, 0.9), 0.0, 0.0), mc).located
    assert below < p / 2
    assert above > min(2 * p, 0.9)


def test_small_fit_and_curve():
    mc = McSettings(4000, seed=5)
    fit = fit_abstract_map("steane", mc, located_scale=0.06, unlocated_scale=1.2e-4)
    assert len(fit.inputs) == 63
    assert fit.rate_map.coefficients.shape == (3, 6)
    resid = fit.residuals()
    assert resid.shape == (63, 3) and np.all(np.isfinite(resid))
    curve, _ = run_threshold("steane", mc, rays=3, tol=0.2, rate_map=fit.rate_map)
    assert len(curve.points) == 3
    assert curve.intercept("gamma") > 0 and curve.intercept("eta") > 0


@pytest.fixture(scope="module")
def physical_grid_fit():
    mc = McSettings(100_000, seed=7)
    pairs = []
    for g in np.linspace(0, 2e-3, 5):
        for e in np.linspace(0, 1e-5, 5):
            l1 = rates_xx90(PhysicalNoise(g, e))
            inp = RatePoint(*l1.as_tuple(), "analytic-level1")
            pairs.append((inp, to_point(level2_rates("steane", g, e, mc))))
    return pairs, fit_map(pairs)


def test_level1_to_level2_grid_fit(physical_grid_fit):
    _, m = physical_grid_fit
    assert m.samples == 25
    for rms, mean in zip(m.residual_rms, m.mean_output):
        assert rms < 0.1 * mean


def test_fit_reproduces_samples_within_three_rms(physical_grid_fit):
    pairs, m = physical_grid_fit
    for inp, out in pairs:
        diff = np.abs(m(inp).as_array() - out.as_array())
        assert np.all(diff <= 3 * np.array(m.residual_rms))


def test_half_threshold_converges_quickly():
    mc = McSettings(20000, seed=5)
    fit = fit_abstract_map("steane", mc, located_scale=0.06, unlocated_scale=1.2e-4)
    curve, _ = run_threshold("steane", mc, rays=3, tol=0.1, rate_map=fit.rate_map)
    for p in curve.points:
        it = iterate_map(fit.rate_map, to_point(level2_rates("steane", p.gamma / 2, p.eta / 2, mc)))
        assert it.converged and it.levels <= 10


@pytest.mark.slow
def test_golay_curve_not_inside_steane():
    mc = McSettings(20000, seed=9)
    steane, _ = run_threshold("steane", mc, rays=3, tol=0.1)
    golay, _ = run_threshold("golay", mc, rays=3, tol=0.1)
    assert golay.complete and steane.complete
    # encloses or crosses: on some ray the Golay threshold lies clearly further out
    ratios = [g.bracket[0] / s.bracket[1] for s, g in zip(steane.points, golay.points)]
    assert max(ratios) > 1.0
    assert golay.intercept("gamma") > steane.intercept("gamma")
