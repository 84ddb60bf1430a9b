"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 a verification check failed,
3 the simulation budget ran out (partial results are still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from . import resources as res
from .concatenation import McSettings, fit_abstract_map, run_threshold
from .oracle import ATOL, run_oracle_suite
from .rates import CODE_SIZE, PhysicalNoise, all_rates, simulate_walk, walk_success
from .svg import render_curves
from .telecorrect.circuit import build_telecorrector
from .telecorrect.codes import CODES, get_code
from .telecorrect.frame import NoiseTables
from .telecorrect.simulate import simulate_telecorrection
from .threshold import RateMap

EXIT_OK, EXIT_INVALID, EXIT_VERIFY, EXIT_BUDGET = 0, 1, 2, 3


class CliError(Exception):
    """Bad input; reported on stderr with exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(f"{self.prog}: {message}")


# ----------------------------------------------------------------------
# Value parsing
# ----------------------------------------------------------------------


def parse_axis(text: str) -> list[float]:
    """A single value, a comma list, or ``a:b:n`` (n evenly spaced values from a to b)."""
    text = str(text).strip()
    try:
        if ":" in text:
            a, b, n = text.split(":")
            a, b, n = float(a), float(b), int(n)
            if n < 1 or b < a:
                raise ValueError
            return [float(v) for v in np.linspace(a, b, n)] if n > 1 else [a]
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise CliError(f"cannot read {text!r} as a value, list or a:b:n range") from None


def _rate(text: str) -> list[float]:
    vals = parse_axis(text)
    for v in vals:
        if not 0 <= v < 1:
            raise CliError(f"rate {v} is outside [0, 1)")
    return vals


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise CliError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise CliError(f"expected a positive integer, got {v}")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise CliError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise CliError(f"expected a non-negative integer, got {v}")
    return v


def _fraction(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise CliError(f"expected a number, got {text!r}") from None
    if not 0 < v < 1:
        raise CliError(f"expected a value in (0, 1), got {v}")
    return v


def _triple(text: str) -> tuple[float, float, float]:
    vals = parse_axis(text)
    if len(vals) != 3 or any(not 0 <= v <= 1 for v in vals):
        raise CliError(f"expected three probabilities 'located,x,z', got {text!r}")
    return tuple(vals)


def read_config(path: str) -> dict[str, str]:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise CliError(f"cannot read config {path}: {e}") from None
    for k, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{k}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


# ----------------------------------------------------------------------
# Output helpers
# ----------------------------------------------------------------------


def _num(v: float) -> str:
    return repr(float(v))


def _csv(rows: Sequence[Sequence], header: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _points(args) -> list[tuple[float, float]]:
    gammas = args.gamma if args.gamma is not None else (args.grid or [0.0])
    etas = args.eta if args.eta is not None else (args.grid or [0.0])
    return [(g, e) for g in gammas for e in etas]


# ----------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------


def cmd_rates(args) -> int:
    rows = []
    for g, e in _points(args):
        for kind, r in all_rates(PhysicalNoise(g, e)).items():
            rows.append([kind.value, _num(g), _num(e), _num(r.located), _num(r.x_unlocated), _num(r.z_unlocated)])
    _emit(_csv(rows, ["op", "gamma", "eta", "located", "x_unlocated", "z_unlocated"]), args.out)
    return EXIT_OK


def cmd_walk(args) -> int:
    value = walk_success(args.n)
    lines = [f"{value:.6f}"]
    if args.trials:
        mc = simulate_walk(args.n, args.trials, np.random.default_rng(args.seed))
        se = np.sqrt(mc * (1 - mc) / args.trials)
        lines.append(f"monte carlo {mc:.6f} +- {se:.6f} ({args.trials} trials)")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_oracle_verify(args) -> int:
    checks = run_oracle_suite(args.atol)
    lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}: worst {c.worst:.2e} over {c.cases} cases" for c in checks]
    ok = all(c.passed for c in checks)
    lines.append(f"{sum(c.passed for c in checks)}/{len(checks)} checks within {args.atol:g}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if ok else EXIT_VERIFY


SIMULATE_HEADER = [
    "gamma",
    "eta",
    "code",
    "located",
    "x_unlocated",
    "z_unlocated",
    "stderr_located",
    "stderr_x",
    "stderr_z",
    "samples",
    "seed",
]


def cmd_simulate(args) -> int:
    code = get_code(args.code)
    if args.dump_circuit:
        Path(args.dump_circuit).write_text(build_telecorrector(code).dump())
    rows = []
    for g, e in _points(args):
        if args.zero_noise:
            tables = NoiseTables.zero()
        elif args.uniform is not None:
            tables = NoiseTables.uniform(args.uniform)
        else:
            tables = NoiseTables.from_physical(PhysicalNoise(g, e))
        r = simulate_telecorrection(code, tables, args.samples, args.seed, args.workers, coupled=args.coupled)
        rows.append(
            [
                _num(g),
                _num(e),
                args.code,
                _num(r.located),
                _num(r.x_unlocated),
                _num(r.z_unlocated),
                _num(r.stderr_located),
                _num(r.stderr_x),
                _num(r.stderr_z),
                r.total,
                args.seed,
            ]
        )
    _emit(_csv(rows, SIMULATE_HEADER), args.out)
    return EXIT_OK


def _mc(args) -> McSettings:
    return McSettings(args.samples, args.seed, args.workers, coupled=True)


def cmd_fit(args) -> int:
    fit = fit_abstract_map(args.code, _mc(args))
    resid = fit.residuals()
    lines = [
        f"code {args.code}: located fixed point {fit.located_scale:.4g}, unlocated fixed point {fit.unlocated_scale:.4g}",
        fit.rate_map.describe(),
        "max |residual| per output: " + ", ".join(f"{v:.3g}" for v in np.max(np.abs(resid), axis=0)),
    ]
    sys.stderr.write("\n".join(lines) + "\n")
    _emit(fit.rate_map.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_threshold(args) -> int:
    rate_map = None
    if args.map:
        try:
            rate_map = RateMap.from_json(Path(args.map).read_text())
        except (OSError, ValueError, KeyError) as e:
            raise CliError(f"cannot load rate map {args.map}: {e}") from None
    curve, _ = run_threshold(
        args.code, _mc(args), rays=args.rays, tol=args.tol, max_evaluations=args.max_evaluations, rate_map=rate_map
    )
    partial = not curve.complete
    _emit(curve.to_csv(status=partial), args.out)
    if args.svg:
        pts = [(p.gamma, p.eta) for p in curve.points]
        Path(args.svg).write_text(render_curves([(args.code, pts)], f"threshold ({args.code})"))
    if partial:
        sys.stderr.write("simulation budget exhausted; rows marked partial\n")
        return EXIT_BUDGET
    return EXIT_OK


def cmd_resources(args) -> int:
    cost = res.telecorrector_cost(args.code)
    rows = res.comparison_table(float(cost.bell_pairs), args.loss_threshold, args.depolarizing_threshold)
    if args.out:
        _emit(res.table_csv(rows), args.out)
    gates = res.default_gate_costs()
    lines = [
        res.table_text(rows),
        f"per-gate costs: Prep0 {float(gates['Prep0'].bell_pairs):g}, Z90 {float(gates['Z90'].bell_pairs):g}, "
        f"R_XX {float(res.rxx_cost().bell_pairs):g}, XX'90 {float(gates['XXp90'].bell_pairs):.2f}",
        f"{args.code} telecorrector resource: {float(cost.bell_pairs):.1f} Bell pairs",
        res.breakdown_text(cost),
    ]
    sys.stdout.write("\n".join(lines))
    return EXIT_OK


# ----------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, noise=True, mc=True) -> None:
    if noise:
        p.add_argument("--gamma", type=_rate, default=None, help="loss rate: value, list or a:b:n (default 0)")
        p.add_argument("--eta", type=_rate, default=None, help="depolarizing-related rate: value, list or a:b:n (default 0)")
        p.add_argument("--grid", type=_rate, default=None, help="a:b:n used for both gamma and eta when not given")
    if mc:
        p.add_argument("--code", choices=sorted(CODES), default="steane", help="inner code (default steane)")
        p.add_argument("--samples", type=_positive_int, default=100_000, help="Monte Carlo runs per point (default 100000)")
        p.add_argument("--workers", type=_positive_int, default=1, help="worker processes (default 1)")
    p.add_argument("--seed", type=_nonneg_int, default=1, help="master seed (default 1)")
    p.add_argument("--out", default=None, help="write the main output here instead of stdout")
    p.add_argument("--config", default=None, help="key=value file; flags on the command line win")


def build_parser() -> _Parser:
    parser = _Parser(prog="parity-ft", description="Fault-tolerance thresholds for parity-encoded linear optics.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("rates", help="level-1 rates of the five operation kinds")
    _common(p, mc=False)
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("walk", help="success probability of the teleported XX90 walk")
    p.add_argument("--n", type=_positive_int, default=CODE_SIZE, help=f"block size (default {CODE_SIZE})")
    p.add_argument("--trials", type=_nonneg_int, default=0, help="also run a Monte Carlo walk with this many trials")
    _common(p, noise=False, mc=False)
    p.set_defaults(func=cmd_walk)

    p = sub.add_parser("oracle-verify", help="run the dense state-vector checks")
    p.add_argument("--atol", type=float, default=ATOL, help=f"tolerance (default {ATOL:g})")
    _common(p, noise=False, mc=False)
    p.set_defaults(func=cmd_oracle_verify)

    p = sub.add_parser("simulate", help="level-2 rates of one telecorrection round")
    _common(p)
    p.add_argument("--uniform", type=_triple, default=None, help="same 'located,x,z' rates on every operation")
    p.add_argument("--zero-noise", action="store_true", help="use all-zero noise tables")
    p.add_argument("--coupled", action="store_true", help="dense common-random-number sampler")
    p.add_argument("--dump-circuit", default=None, help="also write the native circuit (timestep gate qubits...)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit the level-to-level rate map; writes it as JSON")
    _common(p, noise=False)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("threshold", help="trace the threshold curve")
    _common(p, noise=False)
    p.add_argument("--map", default=None, help="rate map JSON from 'fit' (fitted afresh when absent)")
    p.add_argument("--rays", type=_positive_int, default=7, help="number of rays, axes included (default 7)")
    p.add_argument("--tol", type=_fraction, default=0.05, help="relative bisection tolerance (default 0.05)")
    p.add_argument("--max-evaluations", type=_positive_int, default=400, help="simulation budget (default 400)")
    p.add_argument("--svg", default=None, help="also render the curve as SVG")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("resources", help="Bell-pair costs and the comparison table")
    p.add_argument("--code", choices=sorted(CODES), default="steane")
    p.add_argument("--loss-threshold", type=float, default=None, help="computed loss threshold for the table")
    p.add_argument("--depolarizing-threshold", type=float, default=None, help="computed depolarizing threshold")
    _common(p, noise=False, mc=False)
    p.set_defaults(func=cmd_resources)
    return parser


def _apply_config(parser: _Parser, argv: Sequence[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction)).choices[args.command]
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in read_config(args.config).items():
        action = actions.get(key)
        if action is None or key in ("config", "help", "func"):
            raise CliError(f"config key {key!r} is not an option of '{args.command}'")
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        elif action.choices is not None and value not in action.choices:
            raise CliError(f"config {key}={value!r}: choose from {sorted(action.choices)}")
        else:
            defaults[key] = action.type(value) if action.type else value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, list(sys.argv[1:] if argv is None else argv))
        return args.func(args)
    except (CliError, ValueError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    raise SystemExit(main())
