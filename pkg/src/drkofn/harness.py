"""Instance generators, the greedy bad-example experiment and the oracle battery."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import adversary, cost, solver
from .model import Instance, InstanceError, complement, in_box, make_instance, round_to_grid

CSV_COLUMNS = ("family", "n", "k", "eps", "seed", "method", "value", "ratio")
FAMILIES = ("uniform-random", "epsilon-bounded-random", "appendix-greedy")
GAMMA = 15 / 16


def rng_for(seed: int, *tags: int) -> np.random.Generator:
    """Philox stream keyed by the seed and a tuple of integer tags."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *tags])))


def thread_count() -> int:
    raw = os.environ.get("DRKOFN_THREADS")
    if raw:
        return max(1, int(raw))
    return max(1, min(8, os.cpu_count() or 1))


def parallel_map(fn: Callable, items: Iterable) -> list:
    """Map preserving input order; DRKOFN_THREADS caps the worker count."""
    items = list(items)
    workers = thread_count()
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def gen_random(n: int, k: Optional[int] = None, eps: float = 0.0, seed: int = 0,
               unit_costs: bool = False, rng: Optional[np.random.Generator] = None) -> Instance:
    """Random instance with every interval inside [eps, 1-eps].

    Interval endpoints are the sorted pair of two uniform draws; costs are
    uniform on [0, 1] unless unit_costs. k defaults to a uniform draw from 1..n.
    """
    if n < 1:
        raise InstanceError("n must be positive")
    if not 0.0 <= eps < 0.5:
        raise InstanceError("eps must lie in [0, 1/2)")
    rng = rng_for(seed) if rng is None else rng
    if k is None:
        k = int(rng.integers(1, n + 1))
    ends = np.sort(rng.uniform(eps, 1.0 - eps, size=(n, 2)), axis=1)
    ends = np.clip(ends, eps, 1.0 - eps)
    costs = np.ones(n) if unit_costs else rng.uniform(0.0, 1.0, size=n)
    return make_instance(k, costs.tolist(), ends[:, 0].tolist(), ends[:, 1].tolist())


@dataclass(frozen=True)
class BadExampleParams:
    n: int
    epsilon: float

    def __post_init__(self):
        if self.n <= 0 or self.n % 20:
            raise InstanceError(f"n must be a positive multiple of 20, got {self.n}")
        if not 0 < self.epsilon < 0.5:
            raise InstanceError("epsilon must lie in (0, 1/2)")


def gen_bad_example(params: BadExampleParams) -> Instance:
    """Degenerate instance on which sorting by cost / lower endpoint is poor.

    Tests 0..0.8n-1 are free with pass probability 1/16, the next 0.1n cost 1
    and pass with probability 1/2, the last 0.1n cost 1 and pass with
    probability 1-epsilon. k = n/4.
    """
    n, eps = params.n, params.epsilon
    n1, n2 = 8 * n // 10, n // 10
    n3 = n - n1 - n2
    p = [1.0 - GAMMA] * n1 + [0.5] * n2 + [1.0 - eps] * n3
    c = [0.0] * n1 + [1.0] * (n2 + n3)
    return make_instance(n // 4, c, p, p)


def greedy_ratio_order(inst: Instance) -> tuple[int, ...]:
    """Increasing c_i / lo_i; free tests get ratio 0 and go first."""
    def key(i):
        c, l = inst.costs[i], inst.lo[i]
        if c == 0:
            return (0.0, i)
        return (c / l if l > 0 else math.inf, i)
    return tuple(sorted(range(inst.n), key=key))


@dataclass
class ExperimentConfig:
    family: str = "epsilon-bounded-random"
    sizes: list = field(default_factory=lambda: [4, 6, 8])
    trials: int = 20
    seed: int = 0
    epsilons: list = field(default_factory=lambda: [0.2, 0.3])
    output: Optional[str] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InstanceError(f"unknown family {self.family!r}")
        if any(int(n) <= 0 for n in self.sizes):
            raise InstanceError("sizes must be positive")
        if self.trials < 0:
            raise InstanceError("trials must be non-negative")


def run_greedy_ratio_experiment(cfg: ExperimentConfig) -> dict:
    """Expected cost of the greedy order (I, III, II) versus the order I, II, III.

    Both orders are evaluated exactly at the instance's fixed probabilities.
    """
    points = [(int(n), float(e)) for n in cfg.sizes for e in cfg.epsilons]

    def one(point):
        n, eps = point
        inst = gen_bad_example(BadExampleParams(n, eps))
        grd = cost.expected_cost(inst, greedy_ratio_order(inst), inst.lo).total
        alt = cost.expected_cost(inst, range(n), inst.lo).total
        return {"n": n, "k": inst.k, "eps": eps, "greedy": grd, "alternative": alt,
                "ratio": grd / alt}

    rows = parallel_map(one, points)
    csv_rows = []
    for r in rows:
        for method, value in (("greedy", r["greedy"]), ("alternative", r["alternative"])):
            csv_rows.append({"family": "appendix-greedy", "n": r["n"], "k": r["k"], "eps": r["eps"],
                             "seed": cfg.seed, "method": method, "value": value,
                             "ratio": r["ratio"] if method == "greedy" else 1.0})
    return {"experiment": "greedy-ratio", "rows": rows, "csv": csv_rows, "failures": 0}


# --- oracle battery -------------------------------------------------------

def _instance_for(cfg: ExperimentConfig, rng, n: int, eps: float, unit: bool = False) -> Instance:
    if cfg.family == "uniform-random":
        eps = 0.0
    return gen_random(n, eps=eps, unit_costs=unit, rng=rng)


def _random_in_box(inst: Instance, rng) -> np.ndarray:
    return rng.uniform(np.array(inst.lo), np.array(inst.hi))


class _Tally:
    def __init__(self):
        self.checks: dict[str, list[int]] = {}

    def record(self, name: str, ok: bool):
        passed, failed = self.checks.setdefault(name, [0, 0])
        self.checks[name] = [passed + bool(ok), failed + (not ok)]

    @property
    def failures(self) -> int:
        return sum(f for _, f in self.checks.values())


def _battery_point(args) -> dict:
    cfg, bi, n, eps, t = args
    rng = rng_for(cfg.seed, bi, n, int(round(eps * 1000)), t)
    tally = _Tally()
    csv_rows = []
    ratios: dict[str, list[float]] = {}
    counts: dict[str, int] = {}
    row = lambda method, inst, value, ratio: csv_rows.append(
        {"family": cfg.family, "n": n, "k": inst.k, "eps": eps, "seed": cfg.seed,
         "method": method, "value": value, "ratio": ratio})

    inst = _instance_for(cfg, rng, n, eps)
    sigma = tuple(int(i) for i in rng.permutation(n))
    p = _random_in_box(inst, rng)
    exact = cost.expected_cost(inst, sigma, p).total
    tally.record("cost_vs_enumeration", abs(exact - cost.brute_force_cost(inst, sigma, p)) <= 1e-9)
    flip = complement(inst)
    tally.record("complement_cost", abs(exact - cost.expected_cost(flip, sigma, 1 - p).total) <= 1e-9)

    best = adversary.brute_force_adversary(inst, sigma)
    interior = cost.expected_cost_batch(inst, sigma, [_random_in_box(inst, rng) for _ in range(20)])
    tally.record("extreme_point_optimality", bool(np.all(interior <= best.value + 1e-9)))
    row("adv-brute", inst, best.value, 1.0)

    eps_b = inst.epsilon_bound
    if eps_b > 0:
        # the overlap analysis needs n >= 2/eps; below that a straddling path
        # can be infeasible, which is counted but not treated as a failure
        in_regime = n * eps_b >= 2
        try:
            apx = adversary.approx_adversary(inst, sigma)
        except adversary.StraddlingPathError:
            if in_regime:
                tally.record("approx_straddling_feasible", False)
            else:
                counts["straddling_infeasible_small_n"] = counts.get("straddling_infeasible_small_n", 0) + 1
        else:
            if in_regime:
                tally.record("approx_straddling_feasible", True)
            ratio = apx.value / best.value if best.value > 0 else 1.0
            ratios.setdefault(f"approx_eps_{eps:g}", []).append(ratio)
            tally.record("approx_in_box", in_box(inst, apx.p))
            if eps_b >= 0.2:
                tally.record("approx_ratio_gt_0.05", ratio > 0.05)
            row("adv-approx", inst, apx.value, ratio)

    unit = _instance_for(cfg, rng, n, eps, unit=True)
    u_best = adversary.brute_force_adversary(unit, sigma)
    u_bar = adversary.advbar_adversary(unit, sigma)
    bar = u_bar.extra["advbar_value"]
    tally.record("advbar_sandwich", 0.5 * u_best.value - 1e-9 <= bar <= u_best.value + 1e-9)

    if n <= 7:
        opt = solver.brute_force_drst(unit)
        got = solver.unit_cost_solve(unit, adv="brute")
        r = got.adversary_value / opt.adversary_value
        ratios.setdefault("unit_drst", []).append(r)
        tally.record("unit_drst_ratio_le_2", r <= 2 + 1e-9)
        row("drst-unit", unit, got.adversary_value, r)
        if inst.epsilon_bound > 0:
            g_opt = solver.brute_force_drst(inst)
            g = solver.general_solve(inst, adv="brute")
            r = g.adversary_value / g_opt.adversary_value if g_opt.adversary_value > 0 else 1.0
            ratios.setdefault("general_drst", []).append(r)
            tally.record("general_drst_ratio_le_10", r <= 10)
            row("drst-general", inst, g.adversary_value, r)

    if n <= 10:
        pos = make_instance(inst.k, [c + 0.01 for c in inst.costs], inst.lo, inst.hi)
        grid = round_to_grid(pos)
        q = adversary.qptas_adversary(grid, sigma, d=n)
        b = adversary.brute_force_adversary(grid, sigma)
        tally.record("qptas_exact_at_d_ge_n", abs(q.value - b.value) <= 1e-9)
        row("adv-qptas", grid, q.value, q.value / b.value)
    return {"checks": tally.checks, "csv": csv_rows, "ratios": ratios, "counts": counts}


def run_oracle_suite(cfg: ExperimentConfig) -> dict:
    """Run the invariant battery; report pass/fail counts and measured ratios."""
    eps_list = [float(e) for e in cfg.epsilons] or [0.0]
    points = [(cfg, bi, int(n), e, t)
              for bi, n in enumerate(cfg.sizes) for e in eps_list for t in range(cfg.trials)]
    results = parallel_map(_battery_point, points)
    tally = _Tally()
    csv_rows: list[dict] = []
    ratios: dict[str, list[float]] = {}
    counts: dict[str, int] = {}
    for res in results:
        for name, (passed, failed) in res["checks"].items():
            old = tally.checks.get(name, [0, 0])
            tally.checks[name] = [old[0] + passed, old[1] + failed]
        csv_rows.extend(res["csv"])
        for name, vals in res["ratios"].items():
            ratios.setdefault(name, []).extend(vals)
        for name, c in res["counts"].items():
            counts[name] = counts.get(name, 0) + c
    summary = {name: {"count": len(v), "min": min(v), "median": statistics.median(v), "max": max(v)}
               for name, v in sorted(ratios.items())}
    return {
        "experiment": "oracle-suite",
        "config": asdict(cfg),
        "checks": {name: {"passed": p, "failed": f} for name, (p, f) in sorted(tally.checks.items())},
        "ratios": summary,
        "counts": dict(sorted(counts.items())),
        "failures": tally.failures,
        "csv": csv_rows,
    }


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({c: r[c] for c in CSV_COLUMNS})
    return buf.getvalue()


def write_report(report: dict, path: str) -> None:
    """Write <path>.json (without the row list) and <path>.csv."""
    base = path[:-5] if path.endswith(".json") else path
    body = {k: v for k, v in report.items() if k != "csv"}
    with open(base + ".json", "w") as fh:
        json.dump(body, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(base + ".csv", "w", newline="") as fh:
        fh.write(rows_to_csv(report.get("csv", [])))
