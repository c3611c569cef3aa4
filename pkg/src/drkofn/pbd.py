"""Exact Poisson-binomial distributions of prefix pass counts."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import Window


@dataclass(frozen=True, eq=False)
class PrefixPmf:
    """mass[j] = Pr[j passes among the first nu tests]."""

    nu: int
    mass: np.ndarray

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.mass)

    def __len__(self) -> int:
        return len(self.mass)


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


def add_test(mass: np.ndarray, p: float) -> np.ndarray:
    """One step of the pass-count recurrence: convolve with Bernoulli(p)."""
    out = np.zeros(len(mass) + 1)
    out[:-1] = mass * (1.0 - p)
    out[1:] += mass * p
    return out


def prefix_masses(p: Sequence[float]):
    """Yield the pmf rows for prefixes of length 0, 1, ..., len(p)."""
    mass = np.ones(1)
    yield mass
    for x in p:
        mass = add_test(mass, float(x))
        yield mass


def pmf(p: Sequence[float]) -> PrefixPmf:
    """Exact pmf of the number of passes, O(len(p)^2)."""
    mass = np.ones(1)
    for x in p:
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"probability {x!r} outside [0, 1]")
        mass = add_test(mass, float(x))
    return PrefixPmf(len(p), mass)


def window_mass(dist: PrefixPmf | np.ndarray, w: Window) -> float:
    """Probability of a pass count inside the integer points of w."""
    mass = dist.mass if isinstance(dist, PrefixPmf) else dist
    if w.empty:
        return 0.0
    lo = max(math.ceil(w.lo - 1e-9), 0)
    hi = min(math.floor(w.hi + 1e-9), len(mass) - 1)
    if lo > hi:
        return 0.0
    # the DP rows can sum to 1 + O(ulp * nu); a probability is never above 1
    return min(math.fsum(mass[lo:hi + 1]), 1.0)


def moments(p: Sequence[float]) -> Moments:
    return Moments(math.fsum(p), math.fsum(x * (1.0 - x) for x in p))


def tv_distance(a: PrefixPmf | np.ndarray, b: PrefixPmf | np.ndarray) -> float:
    """Total variation distance; the shorter pmf is padded with zeros."""
    x = a.mass if isinstance(a, PrefixPmf) else np.asarray(a)
    y = b.mass if isinstance(b, PrefixPmf) else np.asarray(b)
    m = max(len(x), len(y))
    x = np.pad(x, (0, m - len(x)))
    y = np.pad(y, (0, m - len(y)))
    return 0.5 * math.fsum(np.abs(x - y))


def normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def normal_density(x: float, mu: float, sigma: float) -> float:
    return math.exp(-((x - mu) ** 2) / (2.0 * sigma * sigma)) / (sigma * math.sqrt(2.0 * math.pi))
