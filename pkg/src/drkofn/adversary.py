"""Worst-case probability vectors for a fixed testing order.

Every solver returns an :class:`AdvResult` whose value is recomputed from the
returned vector with :func:`drkofn.cost.expected_cost`; a search's internal
score is never reported as the value.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import pbd
from .cost import BRUTE_MAX_N, expected_cost, expected_cost_batch
from .model import (
    Instance,
    InstanceError,
    Window,
    WINDOW_TOL,
    check_order,
    complement_reduce,
    expected_value_window,
    grid_numerators,
    modified_window,
)

METHODS = ("brute", "advbar", "approx", "qptas")


class StraddlingPathError(InstanceError):
    """No vector in the box keeps every prefix mean inside the modified windows."""


class StateLimitError(RuntimeError):
    """The compressed DP reached more states than the configured limit."""


@dataclass(frozen=True)
class AdvResult:
    p: tuple[float, ...]
    value: float
    method: str
    case: Optional[str] = None
    extra: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {"method": self.method, "case": self.case, "p": list(self.p), "value": self.value}


@dataclass(frozen=True)
class AlphaBeta:
    alpha: float
    beta: float


def _result(inst, sigma, p, method, case=None, **extra) -> AdvResult:
    p = tuple(float(x) for x in p)
    return AdvResult(p, expected_cost(inst, sigma, p).total, method, case, extra)


def _extreme_points(inst: Instance, masks: np.ndarray) -> np.ndarray:
    lo = np.array(inst.lo)
    hi = np.array(inst.hi)
    bits = ((masks[:, None] >> np.arange(inst.n)) & 1).astype(bool)
    return np.where(bits, hi, lo)


def brute_force_adversary(inst: Instance, sigma: Sequence[int]) -> AdvResult:
    """Exact adversary by enumerating all 2^n vertices of the box.

    Vertex masks set bit i when test i sits at its upper endpoint. Ties go to
    the smallest mask.
    """
    n = inst.n
    if n > BRUTE_MAX_N:
        raise InstanceError(f"brute force limited to n <= {BRUTE_MAX_N}, got {n}")
    check_order(sigma, n)
    best_val, best_mask = -math.inf, 0
    chunk = 1 << 14
    for start in range(0, 1 << n, chunk):
        masks = np.arange(start, min(start + chunk, 1 << n))
        vals = expected_cost_batch(inst, sigma, _extreme_points(inst, masks))
        j = int(np.argmax(vals))
        if vals[j] > best_val:
            best_val, best_mask = float(vals[j]), int(masks[j])
    p = _extreme_points(inst, np.array([best_mask]))[0]
    return _result(inst, sigma, p, "brute", mask=best_mask)


def advbar_horizon(n: int) -> int:
    return (n + 1) // 2


def advbar_cost(inst: Instance, sigma: Sequence[int], p: Sequence[float]) -> float:
    """Expected cost when testing stops at k passes or after ceil(n/2) tests.

    Each stage is charged its cost; with unit costs this is the number of
    tests performed.
    """
    order = check_order(sigma, inst.n)
    horizon = advbar_horizon(inst.n)
    mass = np.ones(1)
    terms = []
    for nu in range(1, horizon + 1):
        terms.append(inst.costs[order[nu - 1]] * pbd.window_mass(mass, Window(0, inst.k - 1)))
        mass = pbd.add_test(mass, float(p[order[nu - 1]]))
    return math.fsum(terms)


def advbar_adversary(inst: Instance, sigma: Sequence[int]) -> AdvResult:
    """Optimum of the truncated problem: every test at its lower endpoint.

    With k > n/2 the problem is solved on the complemented instance, which
    maps back to every test at its upper endpoint.
    """
    red, flipped = complement_reduce(inst)
    p_red = red.lo
    p = tuple(1.0 - x for x in p_red) if flipped else p_red
    res = _result(inst, sigma, p, "advbar")
    bar = advbar_cost(red, sigma, p_red)
    return AdvResult(res.p, res.value, "advbar", None, {"advbar_value": bar, "complemented": flipped})


def window_bounds(inst: Instance, nu: int, epsilon: Optional[float] = None) -> AlphaBeta:
    """Lower/upper bounds on Pr[pass count in N_nu] when the prefix mean lies in the modified window."""
    eps = inst.epsilon_bound if epsilon is None else epsilon
    return alpha_beta(inst.n, inst.k, nu, eps)


def alpha_beta(n: int, k: int, nu: int, epsilon: float) -> AlphaBeta:
    if not 1 <= nu <= n - 1:
        raise InstanceError(f"stage {nu} outside 1..{n - 1}")
    if not epsilon > 0:
        raise InstanceError("window bounds need epsilon > 0")
    w = min(n - nu, k - 1)
    root = math.sqrt(nu)
    alpha = 0.25 if 3 * root <= math.ceil(w / 2) else (w / 4) / (6 * root)
    beta = min(2 * math.sqrt(2) * w / math.sqrt(epsilon * nu), 1.0)
    return AlphaBeta(alpha, beta)


def _last_stage(inst: Instance) -> tuple[Window, Window]:
    e_n = expected_value_window(inst, range(inst.n), inst.n)
    return e_n, modified_window(inst.n, inst.n, inst.k)


def window_case(inst: Instance) -> str:
    """'above', 'below' or 'overlap': position of E_n relative to [k-1, k].

    Depends only on the interval sums, so it is the same for every order.
    Boundary ties count as overlap.
    """
    e_n, nt_n = _last_stage(inst)
    if e_n.lo > nt_n.hi:
        return "above"
    if e_n.hi < nt_n.lo:
        return "below"
    return "overlap"


def straddling_path(inst: Instance, sigma: Sequence[int]) -> tuple[float, ...]:
    """A vector in the box whose prefix means stay inside the modified windows.

    Forward pass: reachable prefix-mean interval at each stage, intersected
    with E_nu and the modified window. Backward pass: start from the midpoint
    of the last reachable interval and peel off each test's probability,
    taking the midpoint of its feasible range. Raises StraddlingPathError when
    a reachable interval is empty.
    """
    order = check_order(sigma, inst.n)
    n, k = inst.n, inst.k
    e_n, nt_n = _last_stage(inst)
    if not e_n.overlaps(nt_n):
        raise StraddlingPathError("not in overlap case")
    reach = [Window(0.0, 0.0)]
    for nu in range(1, n + 1):
        i = order[nu - 1]
        prev = reach[-1]
        step = Window(prev.lo + inst.lo[i], prev.hi + inst.hi[i])
        r = step.intersect(modified_window(nu, n, k))
        if r.lo > r.hi + WINDOW_TOL:
            raise StraddlingPathError(f"no straddling path: stage {nu} unreachable inside window")
        if r.lo > r.hi:
            r = Window(r.lo, r.lo)
        reach.append(r)
    p = [0.0] * n
    target = 0.5 * (reach[n].lo + reach[n].hi)
    for nu in range(n, 0, -1):
        i = order[nu - 1]
        prev = reach[nu - 1]
        a = max(target - prev.hi, inst.lo[i])
        b = min(target - prev.lo, inst.hi[i])
        if a > b:
            # float slack only; the forward pass guarantees a + tol >= b
            a = b = min(max(a, inst.lo[i]), inst.hi[i])
        p[i] = 0.5 * (a + b)
        target -= p[i]
    return tuple(p)


def approx_adversary(inst: Instance, sigma: Sequence[int]) -> AdvResult:
    """Three-case adversary keyed on the last-stage windows.

    above: every test at its lower endpoint; below: at its upper endpoint;
    overlap: a straddling path. Instances with k > n/2 are complemented first.
    """
    red, flipped = complement_reduce(inst)
    case = window_case(red)
    if case == "above":
        q = red.lo
    elif case == "below":
        q = red.hi
    else:
        q = straddling_path(red, sigma)
    p = tuple(1.0 - x for x in q) if flipped else q
    # clamp float drift from the 1 - x round trip
    p = tuple(min(max(x, l), r) for x, l, r in zip(p, inst.lo, inst.hi))
    return _result(inst, sigma, p, "approx", case, complemented=flipped)


def moment_error(d: int) -> float:
    """TV bound between two PBDs (low and high halves combined) sharing d power sums."""
    return 26.0 * (d + 1) ** 0.25 * 2.0 ** (-(d + 1) / 2)


def default_moment_count(inst: Instance, cap: int = 40) -> int:
    c_max = max(inst.costs)
    c_min = min(inst.costs)
    if c_max <= 0 or c_min <= 0:
        return cap
    target = c_min / (inst.n ** 2 * c_max)
    for d in range(1, cap + 1):
        if moment_error(d) <= target:
            return d
    return cap


def qptas_adversary(inst: Instance, sigma: Sequence[int], d: Optional[int] = None,
                    tol: Optional[float] = None, max_states: int = 2_000_000) -> AdvResult:
    """Moment-compressed DP over vertex choices.

    The instance must already be on the 1/n^3 grid (see round_to_grid). States
    after each stage are keyed by the first d power sums of the chosen
    probabilities, split at 1/2 into a low and a high vector and stored as
    exact integers (sum of z^a for p = z/n^3). Each state keeps the pmf of the
    first prefix that reached it; the stage cost of a state is computed from
    that representative.
    """
    n, k = inst.n, inst.k
    order = check_order(sigma, n)
    if min(inst.costs) <= 0:
        raise InstanceError("qptas_adversary requires strictly positive costs")
    if d is None:
        d = default_moment_count(inst)
    if d < 1:
        raise InstanceError("moment count d must be >= 1")
    err_bound = n * moment_error(d) * max(inst.costs)
    if tol is not None and err_bound > tol:
        warnings.warn(f"d={d} only guarantees additive error {err_bound:.3g} > tol={tol:.3g}",
                      stacklevel=2)
    z_lo = grid_numerators(inst.lo, n)
    z_hi = grid_numerators(inst.hi, n)
    half = n ** 3  # p <= 1/2  <=>  2z <= n^3
    powers = range(1, d + 1)

    def step_key(key, z):
        low, high = key
        add = tuple(z ** a for a in powers)
        if 2 * z <= half:
            low = tuple(u + v for u, v in zip(low, add))
        else:
            high = tuple(u + v for u, v in zip(high, add))
        return low, high

    root = (tuple([0] * d), tuple([0] * d))
    layers = [{root: np.ones(1)}]      # key -> representative pmf
    children = []                      # per stage: key -> (child_lo_key, child_hi_key)
    stage_cost = []                    # per stage: key -> c_i * Pr[rep in N_{i-1}]
    total_states = 1
    for i in range(1, n + 1):
        t = order[i - 1]
        c = inst.costs[t]
        w = Window(max(i - 1 - n + k, 0), k - 1)
        layer = layers[-1]
        nxt: dict = {}
        kids = {}
        costs_i = {}
        for key, mass in layer.items():
            costs_i[key] = c * pbd.window_mass(mass, w)
            pair = []
            for z, prob in ((z_lo[t], inst.lo[t]), (z_hi[t], inst.hi[t])):
                ck = step_key(key, z)
                if ck not in nxt:
                    nxt[ck] = pbd.add_test(mass, prob)
                pair.append(ck)
            kids[key] = tuple(pair)
        total_states += len(nxt)
        if total_states > max_states:
            raise StateLimitError(f"compressed DP exceeded {max_states} states at stage {i}")
        children.append(kids)
        stage_cost.append(costs_i)
        layers.append(nxt)

    # values[i][key]: best cost-to-go of stages i+1..n from a state after i tests
    values: list = [None] * (n + 1)
    values[n] = {key: 0.0 for key in layers[n]}
    for i in range(n, 0, -1):
        kids, costs_i, after = children[i - 1], stage_cost[i - 1], values[i]
        values[i - 1] = {key: costs_i[key] + max(after[a], after[b])
                         for key, (a, b) in kids.items()}
    dp_value = values[0][root]

    # replay the argmax choices from the root (ties go to the lower endpoint)
    p = [0.0] * n
    key = root
    for i in range(1, n + 1):
        t = order[i - 1]
        a, b = children[i - 1][key]
        vals = values[i]
        if vals[b] > vals[a]:
            p[t], key = inst.hi[t], b
        else:
            p[t], key = inst.lo[t], a
    return _result(inst, sigma, p, "qptas", d=d, dp_value=dp_value,
                   error_bound=err_bound, states=total_states)


def solve_adversary(inst: Instance, sigma: Sequence[int], method: str = "brute",
                    d: Optional[int] = None) -> AdvResult:
    if method == "brute":
        return brute_force_adversary(inst, sigma)
    if method == "advbar":
        return advbar_adversary(inst, sigma)
    if method == "approx":
        return approx_adversary(inst, sigma)
    if method == "qptas":
        return qptas_adversary(inst, sigma, d)
    raise ValueError(f"unknown adversary method {method!r}; expected one of {METHODS}")
