"""Command-line front end.

    burstymac region    --K 2 --M 1 --N 1 --L 1 --traffic independent:0.25
    burstymac threshold --K 2 --M 1 --N 1 --L 1
    burstymac simulate  --K 2 --M 1 --N 1 --L 1 --traffic dependent:0.5 --slots 100000 --seed 3
    burstymac figure fig2 --out fig2.csv

Traffic is ``independent:<p>``, ``dependent:<p>`` or ``file:<path.json>``.
Exit status: 0 on success, 2 on argument errors, 1 on computation errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from . import figures
from .core import (
    ActivityDistribution,
    AntennaConfig,
    load_distribution,
    make_dependent,
    make_independent,
)
from .gains import delta_dof, gain_sweep
from .oracle import DEFAULT_P_GRID, cutset_slope, rank_decode_count, sample_channel
from .region import cut_bound, region, sum_dof, sum_dof_no_relay
from .sim import ActivityTrace, run_trace, sample_trace, simulate
from .threshold import classify, collision_free_threshold

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class Traffic:
    kind: str  # independent | dependent | file
    p: float | None = None
    path: str | None = None

    def law(self, K: int, p: float | None = None) -> ActivityDistribution:
        if self.kind == "file":
            dist = load_distribution(self.path)
            if dist.K != K:
                raise UsageError(f"traffic file has K={dist.K}, config has K={K}")
            return dist
        p = self.p if p is None else p
        if p is None:
            raise UsageError(f"{self.kind} traffic needs a probability, e.g. {self.kind}:0.25")
        return make_independent(p, K) if self.kind == "independent" else make_dependent(p, K)


def parse_traffic(text: str) -> Traffic:
    kind, _, arg = text.partition(":")
    if kind == "file":
        if not arg:
            raise UsageError("file traffic needs a path: file:<path.json>")
        return Traffic("file", path=arg)
    if kind not in ("independent", "dependent"):
        raise UsageError(f"unknown traffic {text!r}")
    if not arg:
        return Traffic(kind)
    try:
        p = float(arg)
    except ValueError:
        raise UsageError(f"bad probability in {text!r}") from None
    if not 0 <= p <= 1:
        raise UsageError(f"probability must lie in [0, 1], got {p}")
    return Traffic(kind, p)


def parse_sweep(text: str) -> list[float]:
    try:
        start, step, end = (float(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"sweep must be start:step:end, got {text!r}") from None
    if step <= 0:
        raise UsageError("sweep step must be positive")
    n = int(np.floor((end - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(n)]


def parse_ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def parse_config(args) -> AntennaConfig:
    for name in ("K", "M", "N", "L"):
        if getattr(args, name) is None:
            raise UsageError(f"--{name} is required")
    M = parse_ints(args.M)
    try:
        return AntennaConfig(args.K, M[0] if len(M) == 1 else M, args.N, args.L)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="burstymac", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_config(p, traffic=False):
        p.add_argument("--K", type=int)
        p.add_argument("--M", help="antennas per user: 2 or 1,2,3")
        p.add_argument("--N", type=int)
        p.add_argument("--L", type=int)
        if traffic:
            p.add_argument("--traffic", type=parse_traffic)
        p.add_argument("--out", help="output file (default: standard output)")
        return p

    with_config(sub.add_parser("region", help="subset constraints as CSV"), traffic=True)
    p = with_config(sub.add_parser("sumdof", help="sum DoF with and without the relay"), traffic=True)
    p.add_argument("--sweep", type=parse_sweep)
    p = with_config(sub.add_parser("gain", help="relaying gains"), traffic=True)
    p.add_argument("--sweep", type=parse_sweep)
    with_config(sub.add_parser("threshold", help="collision-free analysis"))
    p = with_config(sub.add_parser("simulate", help="slot-level simulation"), traffic=True)
    p.add_argument("--trace", help="explicit trace file (one line of 0/1 flags per slot)")
    p.add_argument("--slots", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p = with_config(sub.add_parser("oracle-rank", help="explicit-rank check of the scheme"), traffic=True)
    p.add_argument("--trace")
    p.add_argument("--slots", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--field", choices=["prime", "real"], default="prime")
    p = with_config(sub.add_parser("oracle-slope", help="finite-power cut-set slope"), traffic=True)
    p.add_argument("--P-grid", dest="P_grid", default=",".join(f"{x:g}" for x in DEFAULT_P_GRID))
    p.add_argument("--subset", help="comma-separated users (default: all)")
    p.add_argument("--seed", type=int, default=0)
    p = sub.add_parser("figure", help="regenerate a figure as CSV")
    p.add_argument("name", choices=sorted(figures.FIGURES))
    p.add_argument("--out")
    return parser


def _need_traffic(args) -> Traffic:
    if args.traffic is None:
        raise UsageError("--traffic is required")
    return args.traffic


def _law(traffic: Traffic, K: int, p: float | None = None) -> ActivityDistribution:
    try:
        return traffic.law(K, p)
    except OSError as exc:
        raise UsageError(f"cannot read traffic file: {exc}") from None
    except ValueError as exc:
        raise UsageError(f"bad traffic file: {exc}") from None


def _rows_csv(columns, rows) -> str:
    lines = [",".join(columns)]
    lines += [",".join(figures.fmt(r[c]) for c in columns) for r in rows]
    return "\n".join(lines) + "\n"


def _load_trace(path: str) -> ActivityTrace:
    try:
        return ActivityTrace.load(path)
    except OSError as exc:
        raise UsageError(f"cannot read trace file: {exc}") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_region(args) -> str:
    config = parse_config(args)
    return region(config, _law(_need_traffic(args), config.K)).to_csv()


def cmd_sumdof(args) -> str:
    config = parse_config(args)
    traffic = _need_traffic(args)
    grid = args.sweep if args.sweep is not None else [traffic.p]
    rows = []
    for p in grid:
        law = _law(traffic, config.K, p)
        rows.append({"p": p if p is not None else float("nan"),
                     "sum_dof_with_relay": sum_dof(config, law),
                     "sum_dof_without_relay": sum_dof_no_relay(config, law)})
    return _rows_csv(["p", "sum_dof_with_relay", "sum_dof_without_relay"], rows)


def cmd_gain(args) -> str:
    config = parse_config(args)
    custom = None
    if args.traffic is not None and args.traffic.kind == "file":
        custom = _law(args.traffic, config.K)
    if args.sweep is not None:
        grid = args.sweep
    elif args.traffic is not None and args.traffic.p is not None:
        grid = [args.traffic.p]
    elif custom is not None:
        return _rows_csv(["gain_custom"], [{"gain_custom": delta_dof(config, custom)}])
    else:
        raise UsageError("gain needs --sweep or --traffic independent:<p>|dependent:<p>|file:<path>")
    rows = gain_sweep(config, grid, custom)
    return _rows_csv(list(rows[0]), rows)


def cmd_threshold(args) -> str:
    config = parse_config(args)
    label = classify(config)
    p_star = collision_free_threshold(config)
    shown = "none" if p_star is None else figures.fmt(p_star)
    return f"case={label.case_id} collision_free={str(label.collision_free_possible).lower()} p_star={shown}\n"


def cmd_simulate(args) -> str:
    config = parse_config(args)
    if args.trace:
        report = simulate(config, _load_trace(args.trace))
    else:
        report = simulate(config, _law(_need_traffic(args), config.K), args.slots, args.seed)
    return report.dumps() + "\n"


def cmd_oracle_rank(args) -> str:
    config = parse_config(args)
    if args.trace:
        trace = _load_trace(args.trace)
    else:
        trace = sample_trace(_law(_need_traffic(args), config.K), args.slots, args.seed)
    channel = sample_channel(config, args.field, args.seed)
    rank = rank_decode_count(config, trace, channel)
    final, _ = run_trace(config, trace)
    return json.dumps({"rank": rank, "sim_delivered": final.delivered, "slots": len(trace),
                       "field": args.field, "seed": args.seed}, sort_keys=True) + "\n"


def cmd_oracle_slope(args) -> str:
    config = parse_config(args)
    law = _law(_need_traffic(args), config.K)
    try:
        grid = [float(x) for x in args.P_grid.split(",")]
    except ValueError:
        raise UsageError(f"bad --P-grid {args.P_grid!r}") from None
    subset = parse_ints(args.subset) if args.subset else list(range(1, config.K + 1))
    slope = cutset_slope(config, law, subset, grid, seed=args.seed)
    return json.dumps({"slope": slope, "cut_bound": cut_bound(config, law, subset),
                       "subset": subset, "P_grid": grid, "seed": args.seed}, sort_keys=True) + "\n"


def cmd_figure(args) -> str:
    return figures.figure(args.name)


COMMANDS = {
    "region": cmd_region,
    "sumdof": cmd_sumdof,
    "gain": cmd_gain,
    "threshold": cmd_threshold,
    "simulate": cmd_simulate,
    "oracle-rank": cmd_oracle_rank,
    "oracle-slope": cmd_oracle_slope,
    "figure": cmd_figure,
}


def write_output(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".burstymac-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        text = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"burstymac: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:
        print(f"burstymac: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    write_output(text, args.out)
    return EXIT_OK


def main() -> None:
    sys.exit(run())
