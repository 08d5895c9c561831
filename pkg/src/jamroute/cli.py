"""Command line interface: ``jamroute <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .channel import ChannelParams, sir_threshold
from .errors import ConvergenceError, DomainError, InstanceFormatError, PathOverflowError
from .experiments import (
    PRESETS,
    ExperimentConfig,
    preset,
    run_histograms,
    run_sweep,
    run_throughput_study,
)
from .netgen import GenSpec, generate_instance, instance_to_dict, load_instance
from .routing import ALGORITHMS, route

ALGO_NAMES = {"mer": "MER", "mereq": "MER-EQ", "merap": "MER-AP", "optimal": "OPTIMAL"}


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_gen(args) -> None:
    gamma = sir_threshold(args.rho) if args.rho is not None else args.gamma
    params = ChannelParams(alpha=args.alpha, n0=args.n0, gamma=gamma, q=args.q)
    inst = generate_instance(GenSpec(n=args.n, nj=args.nj, side=args.side, pj=args.pj,
                                     params=params, seed=args.seed))
    _emit(json.dumps(instance_to_dict(inst), indent=2) + "\n", args.out)


def _cmd_route(args) -> None:
    inst = load_instance(args.instance)
    kwargs = {"tighten": not args.no_tighten} if args.algo == "merap" else {}
    plan = route(inst, args.pi, ALGO_NAMES[args.algo], **kwargs)
    _emit(json.dumps(plan.to_dict(), indent=2) + "\n", args.out)


def _cmd_compare(args) -> None:
    inst = load_instance(args.instance)
    algos = [a for a in ALGORITHMS if a != "OPTIMAL" or inst.n <= args.optimal_max_n]
    plans = {a: route(inst, args.pi, a) for a in algos}
    mer = plans["MER"].total_power
    if args.json:
        _emit(json.dumps({a: p.to_dict() for a, p in plans.items()}, indent=2) + "\n",
              args.out)
        return
    lines = [f"{'algorithm':<9} {'hops':>4} {'total_power':>14} {'e2e_outage':>12} "
             f"{'saved_%':>8}  path"]
    for a, p in plans.items():
        saved = 100.0 * (mer - p.total_power) / mer
        lines.append(f"{a:<9} {p.hops:>4} {p.total_power:>14.6g} {p.e2e_outage:>12.9f} "
                     f"{saved:>8.2f}  {'-'.join(map(str, p.nodes))}")
    _emit("\n".join(lines) + "\n", args.out)


def _load_config(args) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_json(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    else:
        raise InstanceFormatError("give --config FILE or --preset NAME")
    if args.seed is not None:
        cfg = replace(cfg, base_seed=args.seed)
    if args.realizations is not None:
        cfg = replace(cfg, realizations=args.realizations)
    return cfg


def _table_out(table, args) -> None:
    _emit(table.to_json() if args.json else table.to_csv(), args.out)


def _cmd_sweep(args) -> None:
    _table_out(run_sweep(_load_config(args)), args)


def _cmd_throughput(args) -> None:
    _table_out(run_throughput_study(_load_config(args)), args)


def _cmd_hist(args) -> None:
    _table_out(run_histograms(_load_config(args)), args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jamroute", description="Minimum-energy routing under jamming.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random instance file")
    g.add_argument("--n", type=int, default=20, help="system nodes")
    g.add_argument("--nj", type=int, default=20, help="jammers")
    g.add_argument("--side", type=float, default=10.0)
    g.add_argument("--pj", type=float, default=1.0, help="jammer power")
    g.add_argument("--alpha", type=float, default=2.0)
    g.add_argument("--n0", type=float, default=1.0)
    g.add_argument("--gamma", type=float, default=1.0)
    g.add_argument("--rho", type=float, default=None, help="throughput; overrides --gamma")
    g.add_argument("--q", type=float, default=1.0, help="jammer ON-probability")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=None)
    g.set_defaults(func=_cmd_gen)

    r = sub.add_parser("route", help="route one instance and print the plan as JSON")
    r.add_argument("--algo", choices=sorted(ALGO_NAMES), default="merap")
    r.add_argument("--pi", type=float, default=0.1, help="end-to-end outage target")
    r.add_argument("--no-tighten", action="store_true", help="skip MER-AP power tightening")
    r.add_argument("--out", default=None)
    r.add_argument("instance")
    r.set_defaults(func=_cmd_route)

    c = sub.add_parser("compare", help="run every algorithm on one instance")
    c.add_argument("--pi", type=float, default=0.1)
    c.add_argument("--optimal-max-n", type=int, default=10)
    c.add_argument("--json", action="store_true")
    c.add_argument("--out", default=None)
    c.add_argument("instance")
    c.set_defaults(func=_cmd_compare)

    for name, func, helptext in (
        ("sweep", _cmd_sweep, "energy-saved sweep"),
        ("throughput", _cmd_throughput, "multi-flow throughput study"),
        ("hist", _cmd_hist, "cost histograms"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", default=None, help="JSON experiment config")
        p.add_argument("--preset", choices=sorted(PRESETS), default=None)
        p.add_argument("--seed", type=int, default=None, help="override base_seed")
        p.add_argument("--realizations", type=int, default=None)
        p.add_argument("--json", action="store_true", help="JSON instead of CSV")
        p.add_argument("--out", default=None)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (InstanceFormatError, DomainError, ConvergenceError, PathOverflowError,
            FileNotFoundError) as exc:
        print(f"jamroute: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
