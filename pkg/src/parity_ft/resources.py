"""Expected Bell-pair costs of parity-state resources and circuits.

Resources are grown in parallel without recycling: every fusion succeeds
with probability 1/2, so linking pieces with g fusions needs on average 2^g
times the Bell pairs that go into one attempt.  A cost with a trace (b, g)
equals b * 2^g exactly.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction

from .rates import CODE_SIZE, walk_success
from .statevec import RXX_RECIPES

FUSION_SUCCESS = Fraction(1, 2)


@dataclass(frozen=True)
class CostModel:
    success_probability: Fraction = FUSION_SUCCESS
    strategy: str = "parallel-no-recycling"
    unit: str = "Bell pairs"

    def __post_init__(self):
        if self.success_probability != FUSION_SUCCESS:
            raise ValueError("fusion gates succeed with probability exactly 1/2")


@dataclass(frozen=True)
class ResourceCost:
    item: str
    bell_pairs: Fraction | float
    trace: tuple[int, int] | None = None  # (base Bell pairs b, fusions g)
    breakdown: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.trace is not None:
            b, g = self.trace
            if Fraction(self.bell_pairs) != b * 2**g:
                raise ValueError(f"{self.item}: {self.bell_pairs} is not {b}*2^{g}")

    def __float__(self) -> float:
        return float(self.bell_pairs)


def parity_state_cost(n: int) -> ResourceCost:
    """n Bell pairs linked by n-1 fusions; a 2-qubit parity state is one Bell pair."""
    if n < 2:
        raise ValueError("parity states have at least two qubits")
    if n == 2:
        return ResourceCost("parity_state(2)", Fraction(1), (1, 0))
    return ResourceCost(f"parity_state({n})", Fraction(n * 2 ** (n - 1)), (n, n - 1))


def z90_cost(success_probability: Fraction | float = FUSION_SUCCESS) -> ResourceCost:
    """Re-encoding with an 8-qubit parity state, repeated until it works (geometric attempts)."""
    state = parity_state_cost(CODE_SIZE + 1).bell_pairs
    if success_probability == FUSION_SUCCESS:
        # one extra doubling for the 1/2 chance that the attempt fails
        return ResourceCost("Z90", state * 2, (CODE_SIZE + 1, CODE_SIZE + 1))
    if not 0 < success_probability <= 1:
        raise ValueError("success probability must lie in (0, 1]")
    return ResourceCost("Z90", Fraction(state) / Fraction(success_probability))


@dataclass(frozen=True)
class RecipeAudit:
    bell_pairs: int  # Bell pairs consumed by the whole construction
    joins: int  # fusions that grow the 3-qubit pieces, all in parallel
    links: int  # fusions that link the pieces together
    base: Fraction  # expected Bell pairs to have every piece ready


def audit_rxx_recipe(long_ends: bool = True) -> RecipeAudit:
    recipe = RXX_RECIPES[long_ends]
    pair_cost = {"bell": (1, 0), "x3": (2, 1), "z3": (2, 1)}
    bells = sum(pair_cost[p][0] for p in recipe.pieces)
    joins = sum(pair_cost[p][1] for p in recipe.pieces)
    base = sum(Fraction(b * 2**g) for b, g in (pair_cost[p] for p in recipe.pieces))
    if joins + len(recipe.fusions) != recipe.fusion_count:
        raise AssertionError("recipe fusion count does not add up")
    return RecipeAudit(bells, joins, len(recipe.fusions), base)


def rxx_cost(long_ends: bool = True) -> ResourceCost:
    """R_XX grown from its pieces: each piece is made independently, then linked in turn."""
    audit = audit_rxx_recipe(long_ends)
    b = int(audit.base)
    return ResourceCost("R_XX", Fraction(b * 2**audit.links), (b, audit.links))


def xx_expected_attempts(n: int = CODE_SIZE) -> float:
    """Mean walk length, counting the final step.

    Each step fails outright with probability 1/2, finishes with 1/4, and
    backs off with 1/4; the mean number of steps before the walk stops is
    4 * (1 - (2 - sqrt 2)^n) = 4 * P_S(n).
    """
    return 4.0 * walk_success(n)


def xxp90_cost(n: int = CODE_SIZE) -> ResourceCost:
    """One fresh R_XX per walk step."""
    return ResourceCost("XX'90", float(rxx_cost().bell_pairs) * xx_expected_attempts(n))


def default_gate_costs() -> dict[str, ResourceCost]:
    z90 = z90_cost()
    return {
        "Prep0": parity_state_cost(CODE_SIZE),
        # H = X90 Z90 X90 and the X90 rotations are single-photon operations
        "H": ResourceCost("H", z90.bell_pairs, z90.trace),
        "Z90": z90,
        "XXp90": xxp90_cost(),
        "MeasZ": ResourceCost("MeasZ", Fraction(0), (0, 0)),
    }


def circuit_cost(gates: Iterable, costs: Mapping[str, ResourceCost] | None = None, phase: str | None = None) -> ResourceCost:
    """Sum expected Bell pairs over the gates of a circuit (or any iterable of gates).

    Args:
        gates: a Circuit or gates with ``kind`` and ``phase`` attributes.
        costs: per-kind costs; defaults to :func:`default_gate_costs`.
        phase: count only gates of this phase ("anc" is the resource state).

    Raises:
        KeyError: a gate kind has no cost entry.
    """
    costs = default_gate_costs() if costs is None else costs
    seq = getattr(gates, "gates", gates)
    counts: dict[str, int] = {}
    for g in seq:
        if phase is not None and g.phase != phase:
            continue
        counts[g.kind] = counts.get(g.kind, 0) + 1
    missing = sorted(k for k in counts if k not in costs)
    if missing:
        raise KeyError(f"no cost entry for gate kind(s) {missing}")
    total: Fraction | float = Fraction(0)
    breakdown = {}
    for kind in sorted(counts):
        unit = costs[kind].bell_pairs
        sub = counts[kind] * unit
        breakdown[kind] = (counts[kind], unit, sub)
        total = total + sub
    return ResourceCost("circuit", total, None, breakdown)


def telecorrector_cost(code_name: str = "steane") -> ResourceCost:
    """Bell pairs for the telecorrector resource state (the offline part of the circuit)."""
    from .telecorrect.circuit import build_telecorrector
    from .telecorrect.codes import get_code

    c = circuit_cost(build_telecorrector(get_code(code_name)), phase="anc")
    return ResourceCost(f"telecorrector({code_name})", c.bell_pairs, None, c.breakdown)


# ----------------------------------------------------------------------
# Comparison table
# ----------------------------------------------------------------------

# published values: (scheme, loss threshold, depolarizing threshold, resources)
PUBLISHED = (
    ("cluster states", 4e-3, 8e-5, 1.3e8),
    ("parity states", 2e-3, 2.4e-5, 1.8e5),
)
CAT_STATE_NOTE = ("cat states", 2e-4, None, 1e3)  # cost counted in cat states, not Bell pairs


@dataclass(frozen=True)
class TableRow:
    scheme: str
    loss_threshold: float | None
    depolarizing_threshold: float | None
    resources: float | None
    source: str
    note: str = ""


def round_sig(x: float, digits: int = 2) -> float:
    return float(f"{x:.{digits - 1}e}")


def comparison_table(
    computed_cost: float | None = None,
    loss_threshold: float | None = None,
    depolarizing_threshold: float | None = None,
) -> list[TableRow]:
    if computed_cost is None:
        computed_cost = float(telecorrector_cost("steane").bell_pairs)
    rows = [TableRow(s, g, e, r, "published") for s, g, e, r in PUBLISHED]
    rows.append(TableRow("parity states", loss_threshold, depolarizing_threshold, round_sig(computed_cost), "computed"))
    s, g, e, r = CAT_STATE_NOTE
    rows.append(TableRow(s, g, e, r, "published", "footnote: resource counted in cat states; no depolarizing threshold given"))
    return rows


def _fmt(v: float | None) -> str:
    return "" if v is None else f"{v:g}"


def table_csv(rows: list[TableRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scheme", "loss_threshold", "depolarizing_threshold", "resources", "source", "note"])
    for r in rows:
        w.writerow([r.scheme, _fmt(r.loss_threshold), _fmt(r.depolarizing_threshold), _fmt(r.resources), r.source, r.note])
    return buf.getvalue()


def table_text(rows: list[TableRow]) -> str:
    head = ("scheme", "loss", "depolarizing", "resources", "source")
    body = [(r.scheme, _fmt(r.loss_threshold) or "-", _fmt(r.depolarizing_threshold) or "-", _fmt(r.resources) or "-", r.source) for r in rows]
    widths = [max(len(x[i]) for x in [head, *body]) for i in range(len(head))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in [head, *body]]
    notes = [f"* {r.scheme}: {r.note}" for r in rows if r.note]
    return "\n".join(lines + notes) + "\n"


def breakdown_text(cost: ResourceCost) -> str:
    lines = [f"{'gate':<8}{'count':>7}{'each':>12}{'subtotal':>14}"]
    for kind, (n, unit, sub) in cost.breakdown.items():
        lines.append(f"{kind:<8}{n:>7}{float(unit):>12.1f}{float(sub):>14.1f}")
    lines.append(f"{'total':<8}{'':>7}{'':>12}{float(cost.bell_pairs):>14.1f}")
    return "\n".join(lines) + "\n"
