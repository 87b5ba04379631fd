"""Command-line front end: ``cpcsim predict|simulate|sweep|race``.

Exit codes: 0 success, 2 usage or parse error, 3 numerical failure,
4 racing-environment failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys

from .distributions import Distribution, DistributionSpecError, parse_distribution
from .monte_carlo import SimConfig, SimResult, simulate, sweep_cores, sweep_erlang_k, sweep_hyper_a
from .order_stats import CurvePoint, MinQuery, QuadratureError, expected_min_details, speedup
from .racer import CommandTask, RaceConfig, RaceError, SyntheticTask, race

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_RACE = 0, 2, 3, 4

CURVE_COLUMNS = ("x", "cv", "analytic_speedup", "mc_speedup", "mc_stderr")
PREDICT_COLUMNS = ("dist", "cores", "cv", "expected_min", "speedup", "method", "abserr")
SIM_COLUMNS = tuple(f.name for f in dataclasses.fields(SimResult))
RACE_COLUMNS = (
    "task", "replicas", "rounds", "seed", "mean_winner_time", "mean_single_time",
    "empirical_speedup", "model_speedup", "overhead_estimate", "discarded_rounds",
)
ROUND_COLUMNS = ("round", "winner", "winner_time", "single_time")


class UsageError(ValueError):
    pass


def format_value(value) -> str:
    """Shortest round-trip text; empty for missing values."""
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def write_records(records, columns, fmt: str, out) -> None:
    if fmt == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(columns)
        for rec in records:
            writer.writerow([format_value(rec.get(c)) for c in columns])
    elif fmt == "json":
        for rec in records:
            out.write(json.dumps({c: _jsonable(rec.get(c)) for c in columns}) + "\n")
    else:
        for i, rec in enumerate(records):
            if i:
                out.write("\n")
            width = max(len(c) for c in columns)
            for c in columns:
                out.write(f"{c:<{width}}  {format_value(rec.get(c))}\n")


def _parse_number(text: str):
    value = float(text)
    return int(value) if text.strip().lstrip("+-").isdigit() else value


def read_curve_csv(source) -> list[CurvePoint]:
    """Parse a sweep CSV back into :class:`CurvePoint` records."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_curve_csv(fh)
    rows = list(csv.DictReader(source))
    return [
        CurvePoint(**{c: (_parse_number(row[c]) if row[c] != "" else None) for c in CURVE_COLUMNS})
        for row in rows
    ]


def parse_range(text: str) -> list:
    """``start..end[:step]`` inclusive; integers unless any part is fractional."""
    body, _, step_text = text.partition(":")
    start_text, sep, end_text = body.partition("..")
    if not sep:
        raise UsageError(f"range must look like start..end[:step], got {text!r}")
    try:
        start, end = _parse_number(start_text), _parse_number(end_text)
        step = _parse_number(step_text) if step_text else 1
    except ValueError:
        raise UsageError(f"bad number in range {text!r}") from None
    if step <= 0 or end < start:
        raise UsageError(f"range {text!r} is empty or has a non-positive step")
    if all(isinstance(v, int) for v in (start, end, step)):
        return list(range(start, end + 1, step))
    count = int(math.floor((end - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def _dist(text: str) -> Distribution:
    try:
        return parse_distribution(text)
    except DistributionSpecError as exc:
        raise UsageError(str(exc)) from None


def _output_format(args) -> str:
    if getattr(args, "json", False):
        return "json"
    if getattr(args, "csv", False):
        return "csv"
    return getattr(args, "format", None) or "text"


def _default_seed() -> int:
    raw = os.environ.get("CPCSIM_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"CPCSIM_SEED must be an integer, got {raw!r}") from None


def cmd_predict(args, out) -> int:
    dist = _dist(args.dist)
    q = MinQuery(dist, args.cores)
    details = expected_min_details(q)
    rec = {
        "dist": dist.spec(), "cores": args.cores, "cv": dist.cv(),
        "expected_min": details.value, "speedup": speedup(q),
        "method": details.method, "abserr": details.abserr,
    }
    write_records([rec], PREDICT_COLUMNS, _output_format(args), out)
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    dist = _dist(args.dist)
    seed = args.seed if args.seed is not None else _default_seed()
    res = simulate(SimConfig(dist, args.cores, args.steps, seed, args.denominator))
    write_records([dataclasses.asdict(res)], SIM_COLUMNS, _output_format(args), out)
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    values = parse_range(args.range)
    seed = args.seed if args.seed is not None else _default_seed()
    sim = None
    if args.mode in ("mc", "both"):
        placeholder = parse_distribution("exp:1")
        sim = SimConfig(placeholder, 1, args.steps, seed, args.denominator)
    if args.family == "cores":
        if args.dist is None:
            raise UsageError("--family cores needs --dist")
        points = sweep_cores(_dist(args.dist), values, sim, workers=args.workers)
    elif args.family == "erlang-k":
        points = sweep_erlang_k(values, args.lam, args.cores, sim, workers=args.workers)
    else:
        points = sweep_hyper_a(values, args.lam, args.cores, sim, workers=args.workers)
    records = [dataclasses.asdict(p) for p in points]
    if args.mode == "mc":
        for rec in records:
            rec["analytic_speedup"] = None
    fmt = args.format
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            write_records(records, CURVE_COLUMNS, fmt, fh)
    else:
        write_records(records, CURVE_COLUMNS, fmt, out)
    return EXIT_OK


def cmd_race(args, out) -> int:
    if (args.dist is None) == (args.cmd is None):
        raise UsageError("race needs exactly one of a distribution spec or --cmd")
    seed = args.seed if args.seed is not None else _default_seed()
    if args.cmd is not None:
        try:
            task = CommandTask.from_template(args.cmd)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        task = SyntheticTask(_dist(args.dist), args.unit_ms)
    cfg = RaceConfig(task, args.replicas, args.rounds, seed, args.cancel_grace, args.pin)
    res = race(cfg)
    fmt = _output_format(args)
    if args.per_round:
        records = [
            {"round": i, "winner": r.winner, "winner_time": r.winner_time, "single_time": r.single_time}
            for i, r in enumerate(res.round_results)
        ]
        write_records(records, ROUND_COLUMNS, fmt, out)
    else:
        write_records([dataclasses.asdict(res)], RACE_COLUMNS, fmt, out)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {value}")
    return value


def _add_format_flags(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--json", action="store_true", help="one JSON object per record")
    g.add_argument("--csv", action="store_true", help="CSV with header")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cpcsim", description="Speedup prediction for first-wins parallel execution.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("predict", help="analytic expected minimum and speedup")
    p.add_argument("dist", help="exp:<lambda> | erlang:<k>:<lambda> | hyper:<a>:<lambda> | uniform:<lo>:<hi>")
    p.add_argument("--cores", type=_positive_int, default=1)
    _add_format_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of the expected minimum")
    p.add_argument("dist")
    p.add_argument("--cores", type=_positive_int, default=1)
    p.add_argument("--steps", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=None, help="default: $CPCSIM_SEED or 0")
    p.add_argument("--denominator", choices=("analytic", "simulated"), default="analytic")
    _add_format_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="speedup curve over cores, Erlang k or hyperexponential a")
    p.add_argument("--family", choices=("cores", "erlang-k", "hyper-a"), required=True)
    p.add_argument("--dist", help="distribution for --family cores")
    p.add_argument("--range", required=True, help="start..end[:step], inclusive")
    p.add_argument("--cores", type=_positive_int, default=100, help="core count for k/a sweeps")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--mode", choices=("analytic", "mc", "both"), default="analytic")
    p.add_argument("--steps", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--denominator", choices=("analytic", "simulated"), default="analytic")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("race", help="measure first-wins speedup with concurrent replicas")
    p.add_argument("dist", nargs="?", help="synthetic task duration law")
    p.add_argument("--cmd", help='external command template; "{i}" becomes the replica index')
    p.add_argument("--replicas", type=_positive_int, default=4)
    p.add_argument("--rounds", type=_positive_int, default=50)
    p.add_argument("--unit-ms", type=float, default=20.0, help="milliseconds per model time unit")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--cancel-grace", type=float, default=1.0, help="seconds")
    p.add_argument("--pin", action="store_true", help="best-effort core pinning")
    p.add_argument("--per-round", action="store_true", help="emit one record per round")
    _add_format_flags(p)
    p.set_defaults(func=cmd_race)
    return parser


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except RaceError as exc:
        print(f"race failed: {exc}", file=sys.stderr)
        return EXIT_RACE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run(argv) -> tuple[int, str]:
    """Invoke the CLI in-process; returns ``(exit code, stdout text)``."""
    buf = io.StringIO()
    code = main(argv, buf)
    return code, buf.getvalue()
