from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from parity_ft import resources as res
from parity_ft.rates import walk_success
from parity_ft.statevec import RXX_RECIPES
from parity_ft.telecorrect.circuit import Gate, build_telecorrector
from parity_ft.telecorrect.codes import get_code

PAPER_TELECORRECTOR = 177670


def expected_walk_steps(n, depth=400):
    """Mean steps of the backing-off walk, from its linear recurrence on a truncated chain."""
    a = np.eye(depth)
    for i in range(depth):
        if i > 0:
            a[i, i - 1] -= 0.5
        if i + 1 < depth:
            a[i, i + 1] -= 0.25
    return float(np.linalg.solve(a, np.ones(depth))[n - 1])


# ---------------------------------------------------------------- unit costs


def test_parity_state_costs():
    assert res.parity_state_cost(7).bell_pairs == 448
    assert res.parity_state_cost(8).bell_pairs == 1024
    assert res.parity_state_cost(3).bell_pairs == 12
    # a two-qubit parity state is a Bell pair
    assert res.parity_state_cost(2).bell_pairs == 1
    with pytest.raises(ValueError):
        res.parity_state_cost(1)


def test_parity_cost_increasing():
    vals = [res.parity_state_cost(n).bell_pairs for n in range(3, 20)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_z90_cost():
    z = res.z90_cost()
    assert z.bell_pairs == 2048
    assert z.trace == (8, 8)
    assert res.z90_cost(Fraction(1, 4)).bell_pairs == 4096
    assert float(res.z90_cost(1.0).bell_pairs) == 1024
    with pytest.raises(ValueError):
        res.z90_cost(0.0)


def test_geometric_attempts_mean_two():
    rng = np.random.default_rng(3)
    attempts = rng.geometric(0.5, size=200_000)
    assert attempts.mean() == pytest.approx(2.0, abs=0.02)


def test_rxx_cost_and_audit():
    audit = res.audit_rxx_recipe(True)
    assert (audit.bell_pairs, audit.joins, audit.links, audit.base) == (8, 4, 3, 16)
    assert audit.joins + audit.links == RXX_RECIPES[True].fusion_count
    c = res.rxx_cost()
    assert c.bell_pairs == 128
    assert c.trace == (16, 3)


def test_traces_are_exact():
    for cost in (res.parity_state_cost(5), res.z90_cost(), res.rxx_cost()):
        b, g = cost.trace
        assert cost.bell_pairs == b * 2**g
    with pytest.raises(ValueError):
        res.ResourceCost("bad", Fraction(100), (16, 3))


def test_fusion_probability_fixed():
    with pytest.raises(ValueError):
        res.CostModel(Fraction(2, 3))
    assert res.CostModel().strategy == "parallel-no-recycling"


def test_xx_attempts_match_walk():
    for n in (1, 3, 7, 12):
        # the series for P_S is truncated once its tail bound reaches 1e-9
        assert res.xx_expected_attempts(n) == pytest.approx(expected_walk_steps(n), abs=1e-8)
        assert res.xx_expected_attempts(n) == pytest.approx(4 * walk_success(n), rel=1e-12)
    assert float(res.xxp90_cost().bell_pairs) == pytest.approx(128 * 3.905325, rel=1e-6)


# ---------------------------------------------------------------- circuits


def test_empty_and_single_gate():
    assert res.circuit_cost([]).bell_pairs == 0
    assert res.circuit_cost([Gate("Z90", (0,))]).bell_pairs == 2048
    with pytest.raises(KeyError):
        res.circuit_cost([Gate("Z90", (0,))], costs={"H": res.z90_cost()})


KINDS = ("Prep0", "H", "XXp90", "MeasZ", "Z90")


def gate_list(kinds):
    return [Gate(k, (0, 1) if k == "XXp90" else (0,)) for k in kinds]


@given(st.lists(st.sampled_from(KINDS), max_size=20), st.lists(st.sampled_from(KINDS), max_size=20))
def test_cost_is_additive(a, b):
    whole = res.circuit_cost(gate_list(a + b)).bell_pairs
    parts = res.circuit_cost(gate_list(a)).bell_pairs + res.circuit_cost(gate_list(b)).bell_pairs
    assert float(whole) == pytest.approx(float(parts), rel=1e-12, abs=1e-9)


def test_telecorrector_cost_band():
    cost = res.telecorrector_cost("steane")
    c = build_telecorrector(get_code("steane"))
    # independent count of the resource part
    gates = res.default_gate_costs()
    by_hand = sum(float(gates[k].bell_pairs) * c.count(k, phase="anc") for k in ("Prep0", "H", "XXp90", "MeasZ"))
    assert float(cost.bell_pairs) == pytest.approx(by_hand, rel=1e-12)
    assert 0.5 * PAPER_TELECORRECTOR <= float(cost.bell_pairs) <= 2 * PAPER_TELECORRECTOR
    assert set(cost.breakdown) == {"H", "MeasZ", "Prep0", "XXp90"}
    assert float(cost.bell_pairs) == pytest.approx(127053.25, abs=0.01)


def test_golay_costs_more():
    assert res.telecorrector_cost("golay").bell_pairs > res.telecorrector_cost("steane").bell_pairs


# ---------------------------------------------------------------- table


def test_table_literals():
    rows = res.comparison_table(127053.25, 1.4e-3, 4.8e-6)
    published = {r.scheme: r for r in rows if r.source == "published"}
    assert (published["parity states"].loss_threshold, published["parity states"].depolarizing_threshold, published["parity states"].resources) == (2e-3, 2.4e-5, 1.8e5)
    assert (published["cluster states"].loss_threshold, published["cluster states"].depolarizing_threshold, published["cluster states"].resources) == (4e-3, 8e-5, 1.3e8)
    cat = published["cat states"]
    assert (cat.loss_threshold, cat.resources) == (2e-4, 1e3) and cat.note
    computed = next(r for r in rows if r.source == "computed")
    assert computed.resources == 1.3e5


def test_table_formats():
    rows = res.comparison_table(127053.25)
    text = res.table_csv(rows)
    lines = text.splitlines()
    assert lines[0] == "scheme,loss_threshold,depolarizing_threshold,resources,source,note"
    assert len(lines) == 5 and "\r" not in text
    assert "parity states,0.002,2.4e-05,180000,published," in lines
    plain = res.table_text(rows)
    assert "cluster states" in plain and "footnote" in plain
    assert "total" in res.breakdown_text(res.telecorrector_cost())


def test_round_sig():
    assert res.round_sig(127053.25) == 130000.0
    assert res.round_sig(177670) == 180000.0
