"""Acceptance gate: ten criteria, each at its stated tolerance.

Every test prints one PASS/FAIL line (also repeated in the pytest terminal
summary). Run alone with ``pytest tests/test_acceptance.py -v`` or as a script
with ``python3 tests/test_acceptance.py``.
"""

import math
import statistics
import time

import numpy as np

from drkofn import adversary as adv
from drkofn import pbd, solver
from drkofn.cost import brute_force_cost, expected_cost, monte_carlo_cost
from drkofn.harness import (
    BadExampleParams,
    ExperimentConfig,
    gen_random,
    rng_for,
    run_greedy_ratio_experiment,
)
from drkofn.model import (
    complement_reduce,
    in_box,
    make_instance,
    modified_window,
    non_stopping_window,
    round_to_grid,
)

RESULTS: dict[int, str] = {}


def report(num: int, ok: bool, detail: str) -> None:
    line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[num] = line
    print(line)
    assert ok, line


def _case(rng, n, eps=0.0, unit=False):
    inst = gen_random(n, eps=eps, unit_costs=unit, rng=rng)
    sigma = tuple(int(i) for i in rng.permutation(n))
    return inst, sigma


def test_c01_cost_oracle_equivalence():
    rng = rng_for(1001)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(500):
        inst, sigma = _case(rng, int(rng.integers(1, 13)))
        p = rng.uniform(np.array(inst.lo), np.array(inst.hi))
        worst = max(worst, abs(expected_cost(inst, sigma, p).total - brute_force_cost(inst, sigma, p)))
    elapsed = time.perf_counter() - start
    report(1, worst <= 1e-9 and elapsed < 60,
           f"500 instances, max |DP - enumeration| = {worst:.2e}, {elapsed:.1f}s")


def test_c02_monte_carlo_consistency():
    rng = rng_for(1002)
    bad, worst = 0, 0.0
    for cfg in range(50):
        inst, sigma = _case(rng, int(rng.integers(1, 13)))
        p = rng.uniform(np.array(inst.lo), np.array(inst.hi))
        exact = expected_cost(inst, sigma, p).total
        est, se = monte_carlo_cost(inst, sigma, p, 10 ** 6, seed=cfg)
        z = abs(est - exact) / se if se > 0 else (0.0 if est == exact else math.inf)
        worst = max(worst, z)
        bad += z > 4
    report(2, bad == 0, f"50 configs x 1e6 trials, max |MC - exact|/stderr = {worst:.2f}")


def _pbd_violations(p, eps):
    d = pbd.pmf(p)
    mass, cdf = d.mass, d.cdf()
    nu = len(p)
    m = pbd.moments(p)
    mu, sd = m.mean, m.std
    near = {math.floor(mu), math.ceil(mu)}
    tol = 1e-12
    out = []
    low_median = int(np.argmax(cdf >= 0.5 - tol))
    tail = 1.0 - np.concatenate([[0.0], cdf[:-1]])  # tail[j] = Pr[X >= j]
    high_median = int(np.flatnonzero(tail >= 0.5 - tol)[-1])
    if low_median not in near or high_median not in near:
        out.append("median")
    modes = np.flatnonzero(mass >= mass.max() - tol)
    if not any(j in near for j in modes):
        out.append("mode")
    peak = int(modes[0])
    if np.any(np.diff(mass[:peak + 1]) < -tol) or np.any(np.diff(mass[peak:]) > tol):
        out.append("unimodal")
    j = np.arange(nu + 1)
    phi = np.array([pbd.normal_cdf((x - mu) / sd) for x in j])
    if np.max(np.abs(cdf - phi)) > 0.7915 / sd:
        out.append("normal_cdf")
    dens = np.array([pbd.normal_density(x, mu, sd) for x in j])
    if np.max(np.abs(mass - dens)) > 3.23 / sd ** 2 + 1.35 / sd ** 3 + 0.25 / sd ** 4:
        out.append("local_limit")
    if not math.sqrt(eps * nu / 2) <= sd <= math.sqrt(nu) / 2:
        out.append("variance")
    return out


def test_c03_pbd_distribution_facts():
    rng = rng_for(1003)
    counts: dict[str, int] = {}
    for _ in range(1000):
        nu = int(rng.integers(1, 1001))
        eps = float(rng.uniform(0.01, 0.49))
        p = rng.uniform(eps, 1 - eps, nu)
        for name in _pbd_violations(p, eps):
            counts[name] = counts.get(name, 0) + 1
    report(3, not counts, f"1000 vectors, nu <= 1000, violations {counts or 'none'}")


def test_c04_unit_cost_adversary():
    rng = rng_for(1004)
    dominance = sandwich = 0
    for _ in range(300):
        inst, sigma = _case(rng, int(rng.integers(1, 11)), unit=True)
        res = adv.advbar_adversary(inst, sigma)
        red, flipped = complement_reduce(inst)
        bar = res.extra["advbar_value"]
        lo, hi = np.array(inst.lo), np.array(inst.hi)
        for _ in range(200):
            q = rng.uniform(lo, hi)
            q_red = 1.0 - q if flipped else q
            dominance += adv.advbar_cost(red, sigma, q_red) > bar + 1e-12
        exact = adv.brute_force_adversary(inst, sigma).value
        sandwich += not (0.5 * exact - 1e-12 <= bar <= exact + 1e-12)
    report(4, dominance == 0 and sandwich == 0,
           f"300 unit-cost instances, dominance violations {dominance}, sandwich violations {sandwich}")


def test_c05_unit_cost_drst_ratio():
    rng = rng_for(1005)
    ratios = []
    for _ in range(300):
        inst, _ = _case(rng, int(rng.integers(1, 8)), unit=True)
        got = solver.unit_cost_solve(inst, adv="brute").adversary_value
        ratios.append(got / solver.brute_force_drst(inst).adversary_value)
    bad = sum(r > 2 + 1e-12 for r in ratios)
    report(5, bad == 0, f"300 instances n <= 7, max ratio {max(ratios):.4f}, violations {bad}")


def _prefix_with_sum(rng, nu, total, eps):
    """Uniform draw in [eps, 1-eps]^nu shifted (with clipping) to the given sum."""
    x = rng.uniform(eps, 1 - eps, nu)
    a, b = -1.0, 1.0
    for _ in range(200):
        mid = 0.5 * (a + b)
        if np.clip(x + mid, eps, 1 - eps).sum() < total:
            a = mid
        else:
            b = mid
    return np.clip(x + 0.5 * (a + b), eps, 1 - eps)


def test_c06_alpha_beta_sandwich():
    eps = 0.25
    rng = rng_for(1006)
    bad, low_margin, high_margin = 0, math.inf, math.inf
    for nu in (200, 500, 1000):
        assert nu >= 50 / eps
        done = 0
        while done < 100:
            n = int(rng.integers(nu + 1, 4 * nu + 1))
            k = int(rng.integers(2, n // 2 + 1))
            win = modified_window(nu, n, k)
            lo, hi = max(win.lo, eps * nu), min(win.hi, (1 - eps) * nu)
            if lo > hi:
                continue
            p = _prefix_with_sum(rng, nu, rng.uniform(lo, hi), eps)
            assert p.sum() in win
            prob = pbd.window_mass(pbd.pmf(p), non_stopping_window(nu, n, k))
            ab = adv.alpha_beta(n, k, nu, eps)
            bad += not (ab.alpha <= prob <= ab.beta)
            low_margin = min(low_margin, prob - ab.alpha)
            high_margin = min(high_margin, ab.beta - prob)
            done += 1
    report(6, bad == 0, f"300 prefixes, violations {bad}, min slack below {low_margin:.3f} above {high_margin:.3g}")


def test_c07_approx_adversary():
    rng = rng_for(1007)
    ratios, outside, infeasible = {0.2: [], 0.3: []}, 0, 0
    for t in range(200):
        eps = (0.2, 0.3)[t % 2]
        n = int(rng.integers(math.ceil(2 / eps), 13))
        inst, sigma = _case(rng, n, eps=eps)
        try:
            res = adv.approx_adversary(inst, sigma)
        except adv.StraddlingPathError:
            infeasible += 1
            continue
        outside += not in_box(inst, res.p)
        ratios[eps].append(res.value / adv.brute_force_adversary(inst, sigma).value)
    allr = ratios[0.2] + ratios[0.3]
    dist = "; ".join(f"eps={e}: min {min(v):.4f} median {statistics.median(v):.4f} max {max(v):.4f}"
                     for e, v in ratios.items())
    report(7, outside == 0 and infeasible == 0 and min(allr) > 0.05,
           f"200 instances, outside box {outside}, infeasible {infeasible}, ratio {dist}")


def test_c08_qptas_convergence():
    rng = rng_for(1008)
    start = time.perf_counter()
    exact_miss = slack_miss = 0
    worst_gap = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 11))
        base, sigma = _case(rng, n)
        costs = rng.uniform(1.0, max(n * n, 1), n)  # aspect ratio at most n^2
        inst = round_to_grid(make_instance(base.k, costs, base.lo, base.hi))
        exact = adv.brute_force_adversary(inst, sigma).value
        for d in range(1, n + 2):
            v = adv.qptas_adversary(inst, sigma, d=d).value
            if d >= n:
                worst_gap = max(worst_gap, abs(v - exact))
                exact_miss += abs(v - exact) > 1e-9
            slack_miss += v < exact - n * adv.moment_error(d) * max(inst.costs) - 1e-12
    elapsed = time.perf_counter() - start
    report(8, exact_miss == 0 and slack_miss == 0 and elapsed < 300,
           f"50 instances, d>=n max gap {worst_gap:.2e}, bound violations {slack_miss}, {elapsed:.1f}s")


def test_c09_rounding_loss():
    rng = rng_for(1009)
    tv_bad = cost_bad = 0
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 41))
        inst, sigma = _case(rng, n)
        p = rng.uniform(size=n)
        q = np.clip(p + rng.uniform(-1, 1, n) * (1 - 1e-9) / n ** 3, 0, 1)
        tv = pbd.tv_distance(pbd.pmf(p), pbd.pmf(q))
        worst = max(worst, tv * n * n)
        tv_bad += tv > 1 / n ** 2
        diff = abs(expected_cost(inst, sigma, p).total - expected_cost(inst, sigma, q).total)
        cost_bad += diff > max(inst.costs) / n
    report(9, tv_bad == 0 and cost_bad == 0,
           f"200 pairs, max tv*n^2 = {worst:.3f}, tv violations {tv_bad}, cost violations {cost_bad}")


def test_c10_greedy_bad_example():
    start = time.perf_counter()
    eps_list = [0.1, 0.05, 0.02]
    rep = run_greedy_ratio_experiment(
        ExperimentConfig(family="appendix-greedy", sizes=[2000], epsilons=eps_list))
    ratio = {r["eps"]: r["ratio"] for r in rep["rows"]}
    elapsed = time.perf_counter() - start
    monotone = ratio[0.1] < ratio[0.05] < ratio[0.02]
    growth = ratio[0.02] / ratio[0.1]
    table = ", ".join(f"{e}: {ratio[e]:.3f}" for e in eps_list)
    assert BadExampleParams(2000, 0.02).n == 2000
    report(10, monotone and growth >= 2 and elapsed < 120,
           f"n=2000 ratios {table}; ratio(0.02)/ratio(0.1) = {growth:.3f}, {elapsed:.1f}s")


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_c") and callable(fn):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
