"""Instances, windows and orders for distributionally robust k-of-n testing.

Test indices are 0-based throughout the library API. The command line and
the instance files are the only places that speak 1-based orders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

WINDOW_TOL = 1e-9
MEMBERSHIP_TOL = 1e-12


class InstanceError(ValueError):
    """An instance, order or probability vector violates its invariants."""


@dataclass(frozen=True)
class Instance:
    """n tests with costs and pass-probability intervals [lo_i, hi_i], threshold k."""

    k: int
    costs: tuple[float, ...]
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "costs", tuple(float(c) for c in self.costs))
        object.__setattr__(self, "lo", tuple(float(x) for x in self.lo))
        object.__setattr__(self, "hi", tuple(float(x) for x in self.hi))
        object.__setattr__(self, "k", int(self.k))

    @property
    def n(self) -> int:
        return len(self.costs)

    @property
    def epsilon_bound(self) -> float:
        return min(min(l, 1.0 - r) for l, r in zip(self.lo, self.hi))

    def is_epsilon_bounded(self, eps: float) -> bool:
        return self.epsilon_bound >= eps

    @property
    def unit_costs(self) -> bool:
        return all(c == 1.0 for c in self.costs)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (np.array(self.costs), np.array(self.lo), np.array(self.hi))


def make_instance(k: int, costs: Iterable[float], lo: Iterable[float],
                  hi: Iterable[float]) -> Instance:
    """Build and validate an instance."""
    inst = Instance(k, tuple(costs), tuple(lo), tuple(hi))
    validate(inst)
    return inst


def validate(inst: Instance) -> None:
    """Raise InstanceError naming the first violated invariant (1-based index)."""
    n = inst.n
    if n < 1:
        raise InstanceError("instance has no tests")
    if len(inst.lo) != n or len(inst.hi) != n:
        raise InstanceError("costs, lo and hi must have equal length")
    if not 1 <= inst.k <= n:
        raise InstanceError(f"k out of range: k={inst.k}, n={n}")
    for i, (c, l, r) in enumerate(zip(inst.costs, inst.lo, inst.hi), start=1):
        if not (math.isfinite(c) and c >= 0.0):
            raise InstanceError(f"negative or non-finite cost at index {i}")
        if not (0.0 <= l <= 1.0) or not (0.0 <= r <= 1.0):
            raise InstanceError(f"probability out of range at index {i}")
        if l > r:
            raise InstanceError(f"interval inverted at index {i}")


def complement_reduce(inst: Instance) -> tuple[Instance, bool]:
    """Swap the roles of passes and fails when k > n/2.

    The returned instance has threshold n-k+1 and intervals [1-hi, 1-lo]; a
    vector p on the original corresponds to 1-p on the result, with equal cost
    for every order.
    """
    if 2 * inst.k <= inst.n:
        return inst, False
    return complement(inst), True


def complement(inst: Instance) -> Instance:
    """Unconditional pass/fail swap (an involution)."""
    return Instance(inst.n - inst.k + 1, inst.costs,
                    tuple(1.0 - r for r in inst.hi),
                    tuple(1.0 - l for l in inst.lo))


def _snap(x: float, scale: int) -> tuple[float, bool]:
    y = x * scale
    z = round(y)
    return y, abs(y - z) < 1e-9


def round_to_grid(inst: Instance) -> Instance:
    """Widen every interval outward to the grid Z/n^3.

    Endpoints within 1e-9 grid units of a grid point count as already on the
    grid, so decimal inputs such as 0.1 with n=10 are left alone.
    """
    scale = inst.n ** 3
    lo, hi = [], []
    for l, r in zip(inst.lo, inst.hi):
        y, on = _snap(l, scale)
        lo.append((round(y) if on else math.floor(y)) / scale)
        y, on = _snap(r, scale)
        hi.append((round(y) if on else math.ceil(y)) / scale)
    return Instance(inst.k, inst.costs, tuple(lo), tuple(hi))


def grid_numerators(values: Sequence[float], n: int) -> list[int]:
    """Integer z with value = z/n^3 for grid values; raise if off-grid."""
    scale = n ** 3
    out = []
    for i, v in enumerate(values, start=1):
        y, on = _snap(v, scale)
        if not on:
            raise InstanceError(f"value {v!r} at index {i} is not on the 1/n^3 grid")
        out.append(int(round(y)))
    return out


@dataclass(frozen=True)
class Window:
    """Closed interval [lo, hi]; empty when lo > hi."""

    lo: float
    hi: float

    @property
    def empty(self) -> bool:
        return self.lo > self.hi

    def __contains__(self, x: float) -> bool:
        return (not self.empty) and self.lo - WINDOW_TOL <= x <= self.hi + WINDOW_TOL

    def intersect(self, other: "Window") -> "Window":
        return Window(max(self.lo, other.lo), min(self.hi, other.hi))

    def overlaps(self, other: "Window") -> bool:
        return (not self.empty and not other.empty
                and self.lo <= other.hi + WINDOW_TOL and other.lo <= self.hi + WINDOW_TOL)

    def width(self) -> float:
        return 0.0 if self.empty else self.hi - self.lo


def non_stopping_window(nu: int, n: int, k: int) -> Window:
    """Pass counts after nu tests for which testing must continue."""
    if not 0 <= nu <= n:
        raise InstanceError(f"stage {nu} outside 0..{n}")
    return Window(max(nu - n + k, 0), k - 1)


def modified_window(nu: int, n: int, k: int) -> Window:
    """Non-stopping window widened by one on each side from stage n/2 on."""
    if not 0 <= nu <= n:
        raise InstanceError(f"stage {nu} outside 0..{n}")
    if 2 * nu < n:
        return Window(0, k - 1)
    return Window(max(nu - n + k - 1, 0), k)


def expected_value_window(inst: Instance, sigma: Sequence[int], nu: int) -> Window:
    """Range of the prefix mean over the first nu tests of sigma."""
    order = check_order(sigma, inst.n)
    head = order[:nu]
    return Window(math.fsum(inst.lo[i] for i in head), math.fsum(inst.hi[i] for i in head))


def expected_value_windows(inst: Instance, sigma: Sequence[int]) -> list[Window]:
    """E_0..E_n as a list (prefix sums accumulated with fsum per stage)."""
    return [expected_value_window(inst, sigma, nu) for nu in range(inst.n + 1)]


def check_order(sigma: Sequence[int], n: int) -> tuple[int, ...]:
    order = tuple(int(i) for i in sigma)
    if len(order) != n or sorted(order) != list(range(n)):
        raise InstanceError(f"order {list(order)} is not a permutation of 0..{n - 1}")
    return order


def identity(n: int) -> tuple[int, ...]:
    return tuple(range(n))


def in_box(inst: Instance, p: Sequence[float], tol: float = MEMBERSHIP_TOL) -> bool:
    """Whether p lies in the uncertainty box of inst."""
    if len(p) != inst.n:
        return False
    return all(l - tol <= x <= r + tol for x, l, r in zip(p, inst.lo, inst.hi))
