"""Command line: drkofn {gen,eval,adversary,solve,experiment}.

Orders on the command line are 1-based. Exit status: 0 ok, 1 invariant
failure in an experiment, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Optional, Sequence

from . import adversary, cost, harness, instance_io, solver
from .model import InstanceError, check_order, identity, round_to_grid

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(" ", "").split(",") if x]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.replace(" ", "").split(",") if x]


def _order(text: Optional[str], n: int) -> tuple[int, ...]:
    if text is None:
        return identity(n)
    return check_order([i - 1 for i in _ints(text)], n)


def _emit(payload: dict, fmt: str, rows: Optional[list[dict]] = None, columns=None) -> None:
    if fmt == "csv":
        rows = rows if rows is not None else [payload]
        columns = columns or list(rows[0]) if rows else columns or []
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)
        sys.stdout.write(buf.getvalue())
    else:
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def cmd_gen(args) -> int:
    if args.bad_example:
        inst = harness.gen_bad_example(harness.BadExampleParams(args.n, args.eps))
    else:
        inst = harness.gen_random(args.n, args.k, args.eps, args.seed, unit_costs=args.unit)
    if args.out:
        instance_io.save(inst, args.out)
    else:
        sys.stdout.write(instance_io.dumps(inst) + "\n")
    return EXIT_OK


def cmd_eval(args) -> int:
    inst = instance_io.load(args.instance)
    sigma = _order(args.order, inst.n)
    p = _floats(args.p) if args.p else list(inst.lo)
    if len(p) != inst.n:
        raise InstanceError(f"--p has {len(p)} entries, expected {inst.n}")
    if args.brute:
        payload = {"method": "brute", "total": cost.brute_force_cost(inst, sigma, p)}
        _emit(payload, args.format)
    elif args.mc:
        trials, seed = int(args.mc[0]), int(args.mc[1])
        est, se = cost.monte_carlo_cost(inst, sigma, p, trials, seed)
        _emit({"method": "mc", "total": est, "stderr": se, "trials": trials, "seed": seed}, args.format)
    else:
        br = cost.expected_cost(inst, sigma, p)
        rows = [{"stage": i + 1, "test": sigma[i] + 1, "probability": s.probability,
                 "contribution": s.contribution} for i, s in enumerate(br.per_stage)]
        _emit(br.to_dict(), args.format, rows, ["stage", "test", "probability", "contribution"])
    return EXIT_OK


def cmd_adversary(args) -> int:
    inst = instance_io.load(args.instance)
    if args.round:
        inst = round_to_grid(inst)
    sigma = _order(args.order, inst.n)
    res = adversary.solve_adversary(inst, sigma, args.method, args.d)
    _emit(res.to_dict(), args.format,
          [{"test": i + 1, "p": x} for i, x in enumerate(res.p)] if args.format == "csv" else None)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = instance_io.load(args.instance)
    res = solver.solve(inst, args.method, args.adv)
    payload = res.to_dict()
    _emit(payload, args.format,
          [{"position": i + 1, "test": t} for i, t in enumerate(payload["order"])]
          if args.format == "csv" else None)
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = harness.ExperimentConfig(
        family="appendix-greedy" if args.kind == "greedy" else args.family,
        sizes=args.sizes, trials=args.trials, seed=args.seed, epsilons=args.eps,
        output=args.output)
    if args.kind == "greedy":
        report = harness.run_greedy_ratio_experiment(cfg)
    else:
        report = harness.run_oracle_suite(cfg)
    if args.output:
        harness.write_report(report, args.output)
    if args.format == "csv":
        sys.stdout.write(harness.rows_to_csv(report["csv"]))
    else:
        sys.stdout.write(json.dumps({k: v for k, v in report.items() if k != "csv"}, indent=2) + "\n")
    return EXIT_FAIL if report["failures"] else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="drkofn", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("json", "csv"), default="json")
        return p

    g = common(sub.add_parser("gen", help="generate an instance file"))
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int)
    g.add_argument("--eps", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--unit", action="store_true", help="unit costs")
    g.add_argument("--bad-example", action="store_true",
                   help="greedy bad-example family (n multiple of 20, uses --eps)")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    e = common(sub.add_parser("eval", help="expected cost of an order at a probability vector"))
    e.add_argument("--instance", required=True)
    e.add_argument("--order", help="1-based comma-separated order (default identity)")
    e.add_argument("--p", help="comma-separated pass probabilities (default: lower endpoints)")
    mode = e.add_mutually_exclusive_group()
    mode.add_argument("--brute", action="store_true", help="enumerate all outcomes")
    mode.add_argument("--mc", nargs=2, metavar=("TRIALS", "SEED"), help="Monte-Carlo estimate")
    e.set_defaults(func=cmd_eval)

    a = common(sub.add_parser("adversary", help="worst-case probabilities for an order"))
    a.add_argument("--instance", required=True)
    a.add_argument("--order")
    a.add_argument("--method", choices=adversary.METHODS, default="brute")
    a.add_argument("--d", type=int, help="moment count for qptas")
    a.add_argument("--round", action="store_true",
                   help="widen intervals to the 1/n^3 grid first (required input form for qptas)")
    a.set_defaults(func=cmd_adversary)

    s = common(sub.add_parser("solve", help="robust testing order"))
    s.add_argument("--instance", required=True)
    s.add_argument("--method", choices=("unit", "general", "brute"), default="general")
    s.add_argument("--adv", choices=("auto",) + adversary.METHODS, default="auto",
                   help="adversary used to report the order's value")
    s.set_defaults(func=cmd_solve)

    x = common(sub.add_parser("experiment", help="oracle battery or greedy bad-example table"))
    x.add_argument("--kind", choices=("oracle", "greedy"), default="oracle")
    x.add_argument("--family", choices=harness.FAMILIES[:2], default="epsilon-bounded-random")
    x.add_argument("--sizes", type=_ints, default=[4, 6, 8])
    x.add_argument("--trials", type=int, default=20)
    x.add_argument("--seed", type=int, default=0)
    x.add_argument("--eps", type=_floats, default=[0.2, 0.3])
    x.add_argument("--output", help="write <output>.json and <output>.csv")
    x.set_defaults(func=cmd_experiment)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InstanceError, ValueError, OSError) as exc:
        print(f"drkofn: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
