"""Choosing a testing order that minimises the worst-case expected cost."""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import adversary
from .adversary import AdvResult, window_case
from .cost import continuation_matrix
from .model import Instance, InstanceError, check_order, complement_reduce

BRUTE_DRST_MAX_N = 8


@dataclass(frozen=True)
class SolveResult:
    order: tuple[int, ...]
    adversary_value: float
    method: str
    case: Optional[str] = None
    adversary: Optional[AdvResult] = None

    def to_dict(self, one_based: bool = True) -> dict:
        shift = 1 if one_based else 0
        return {
            "method": self.method,
            "order": [i + shift for i in self.order],
            "adversary_value": self.adversary_value,
            "adversary_method": self.adversary.method if self.adversary else None,
            "case": self.case,
        }


def _pick_adversary(inst: Instance, adv: str) -> str:
    if adv == "auto":
        return "brute" if inst.n <= 16 else "approx"
    return adv


def _finish(inst, order, method, case, adv) -> SolveResult:
    res = adversary.solve_adversary(inst, order, _pick_adversary(inst, adv))
    return SolveResult(tuple(order), res.value, method, case, res)


def unit_cost_solve(inst: Instance, adv: str = "auto") -> SolveResult:
    """Sort by decreasing lower endpoint (k <= n/2) or increasing upper endpoint (k > n/2)."""
    if not inst.unit_costs:
        warnings.warn("unit_cost_solve called on an instance with non-unit costs", stacklevel=2)
    n = inst.n
    if 2 * inst.k <= n:
        order = sorted(range(n), key=lambda i: (-inst.lo[i], i))
    else:
        order = sorted(range(n), key=lambda i: (inst.hi[i], i))
    return _finish(inst, order, "unit", None, adv)


def _ratio(c: float, denom: float) -> float:
    return c / denom if denom > 0 else math.inf


def classical_sst(costs: Sequence[float], p: Sequence[float], k: int) -> tuple[int, ...]:
    """Order for known pass probabilities: round-robin of two ratio lists.

    List A sorts by c/(1-p) (cheap likely failures first), list B by c/p
    (cheap likely passes first). k = n uses A alone, k = 1 uses B alone;
    otherwise emit A, B, A, B, ... skipping tests already emitted.
    """
    n = len(costs)
    if not 1 <= k <= n:
        raise InstanceError(f"k out of range: k={k}, n={n}")
    a = sorted(range(n), key=lambda i: (_ratio(costs[i], 1.0 - p[i]), i))
    b = sorted(range(n), key=lambda i: (_ratio(costs[i], p[i]), i))
    if k == n:
        return tuple(a)
    if k == 1:
        return tuple(b)
    out, seen = [], set()
    ia = ib = 0
    turn_a = True
    while len(out) < n:
        lst = a if turn_a else b
        idx = ia if turn_a else ib
        while lst[idx] in seen:
            idx += 1
        out.append(lst[idx])
        seen.add(lst[idx])
        if turn_a:
            ia = idx + 1
        else:
            ib = idx + 1
        turn_a = not turn_a
    return tuple(out)


def general_solve(inst: Instance, adv: str = "auto") -> SolveResult:
    """Case dispatch on the last-stage windows (independent of the order).

    above: classical order for the lower endpoints; below: for the upper
    endpoints; overlap: increasing cost.
    """
    red, _ = complement_reduce(inst)
    case = window_case(red)
    if case == "above":
        order = classical_sst(red.costs, red.lo, red.k)
    elif case == "below":
        order = classical_sst(red.costs, red.hi, red.k)
    else:
        order = tuple(sorted(range(inst.n), key=lambda i: (inst.costs[i], i)))
    return _finish(inst, order, "general", case, adv)


def brute_force_drst(inst: Instance, tie_tol: float = 1e-12) -> SolveResult:
    """Exact min-max order over all n! orders and all 2^n box vertices.

    Among orders within tie_tol of the minimum, the lexicographically first wins.
    """
    n = inst.n
    if n > BRUTE_DRST_MAX_N:
        raise InstanceError(f"brute-force DRST limited to n <= {BRUTE_DRST_MAX_N}, got {n}")
    masks = np.arange(1 << n)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    vertices = np.where(bits, np.array(inst.hi), np.array(inst.lo))  # (2^n, n)
    costs = np.array(inst.costs)
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    worst = np.empty(len(perms))
    chunk = max(1, 40_000 // len(vertices))
    for s in range(0, len(perms), chunk):
        block = perms[s:s + chunk]
        P = vertices[:, block].transpose(1, 0, 2).reshape(-1, n)  # rows ordered by each perm
        cont = continuation_matrix(P, n, inst.k).reshape(len(block), len(vertices), n)
        vals = np.einsum("bvn,bn->bv", cont, costs[block])
        worst[s:s + len(block)] = vals.max(axis=1)
    best = worst.min()
    j = int(np.flatnonzero(worst <= best + tie_tol)[0])
    order = tuple(int(i) for i in perms[j])
    res = adversary.brute_force_adversary(inst, order)
    return SolveResult(order, res.value, "brute", None, res)


def solve(inst: Instance, method: str = "general", adv: str = "auto") -> SolveResult:
    if method == "unit":
        return unit_cost_solve(inst, adv)
    if method == "general":
        return general_solve(inst, adv)
    if method == "brute":
        return brute_force_drst(inst)
    raise ValueError(f"unknown solve method {method!r}")


def order_value(inst: Instance, order: Sequence[int], adv: str = "brute") -> float:
    return adversary.solve_adversary(inst, check_order(order, inst.n), adv).value
