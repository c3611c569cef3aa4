"""Expected testing cost of a fixed order: exact DP, outcome enumeration, simulation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import pbd
from .model import Instance, InstanceError, check_order, non_stopping_window

BRUTE_MAX_N = 25
_CHUNK_ROWS = 1 << 15


@dataclass(frozen=True)
class StageTerm:
    probability: float  # Pr[test at this stage is performed]
    contribution: float


@dataclass(frozen=True)
class CostBreakdown:
    total: float
    per_stage: tuple[StageTerm, ...]

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "per_stage": [{"probability": s.probability, "contribution": s.contribution}
                          for s in self.per_stage],
        }


def _ordered(inst: Instance, sigma: Sequence[int], p: Sequence[float]):
    order = check_order(sigma, inst.n)
    if len(p) != inst.n:
        raise InstanceError(f"probability vector has length {len(p)}, expected {inst.n}")
    return order, [float(p[i]) for i in order], [inst.costs[i] for i in order]


def expected_cost(inst: Instance, sigma: Sequence[int], p: Sequence[float]) -> CostBreakdown:
    """Exact expected cost of running the tests in order sigma under pass probabilities p.

    p need not lie inside the instance intervals; any point of [0, 1]^n is accepted.
    """
    _, ps, cs = _ordered(inst, sigma, p)
    n, k = inst.n, inst.k
    terms = []
    mass = np.ones(1)
    for nu in range(1, n + 1):
        prob = pbd.window_mass(mass, non_stopping_window(nu - 1, n, k))
        terms.append(StageTerm(prob, cs[nu - 1] * prob))
        mass = pbd.add_test(mass, ps[nu - 1])
    return CostBreakdown(math.fsum(t.contribution for t in terms), tuple(terms))


def continuation_matrix(P: np.ndarray, n: int, k: int) -> np.ndarray:
    """Continuation probabilities for a batch of already-ordered probability rows.

    P has shape (B, n); entry [b, nu-1] of the result is Pr[stage nu is performed].
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    B = P.shape[0]
    mass = np.zeros((B, n + 1))
    mass[:, 0] = 1.0
    out = np.empty((B, n))
    for nu in range(1, n + 1):
        lo, hi = max(nu - 1 - n + k, 0), k - 1
        out[:, nu - 1] = mass[:, lo:hi + 1].sum(axis=1)
        q = P[:, nu - 1:nu]
        shifted = mass[:, :-1] * q
        mass *= 1.0 - q
        mass[:, 1:] += shifted
    return out


def expected_cost_batch(inst: Instance, sigma: Sequence[int], P: np.ndarray) -> np.ndarray:
    """Vectorised expected cost for many probability vectors (rows of P, original indexing)."""
    order = np.array(check_order(sigma, inst.n))
    P = np.atleast_2d(np.asarray(P, dtype=float))
    c = np.array(inst.costs)[order]
    return continuation_matrix(P[:, order], inst.n, inst.k) @ c


def _tests_performed(X: np.ndarray, n: int, k: int) -> np.ndarray:
    passes = np.cumsum(X, axis=1)
    fails = np.arange(1, n + 1) - passes
    stop = (passes >= k) | (fails >= n - k + 1)
    return np.argmax(stop, axis=1) + 1  # every full outcome stops by stage n


def brute_force_cost(inst: Instance, sigma: Sequence[int], p: Sequence[float]) -> float:
    """Expected cost by enumerating all 2^n pass/fail outcomes.

    Shares nothing with the DP path: each outcome is played out against the
    two stopping rules and charged the cost of the tests it actually ran.
    """
    n, k = inst.n, inst.k
    if n > BRUTE_MAX_N:
        raise InstanceError(f"brute force limited to n <= {BRUTE_MAX_N}, got {n}")
    _, ps, cs = _ordered(inst, sigma, p)
    ps = np.array(ps)
    cum_cost = np.concatenate([[0.0], np.cumsum(cs)])
    bits = np.arange(n)
    parts = []
    for start in range(0, 1 << n, _CHUNK_ROWS):
        codes = np.arange(start, min(start + _CHUNK_ROWS, 1 << n))
        X = ((codes[:, None] >> bits) & 1).astype(np.int64)
        weight = np.prod(np.where(X == 1, ps, 1.0 - ps), axis=1)
        performed = _tests_performed(X, n, k)
        parts.extend(weight * cum_cost[performed])
    return math.fsum(parts)


def monte_carlo_cost(inst: Instance, sigma: Sequence[int], p: Sequence[float],
                     trials: int, seed: int, chunk: int = 200_000) -> tuple[float, float]:
    """Simulated expected cost and its standard error.

    Uses numpy's Philox counter-based generator keyed by ``seed``; the stream
    and the chunked summation order are fixed, so results are bit-identical
    across runs and platforms.
    """
    if trials < 1:
        raise InstanceError("trials must be >= 1")
    n, k = inst.n, inst.k
    _, ps, cs = _ordered(inst, sigma, p)
    ps = np.array(ps)
    cum_cost = np.concatenate([[0.0], np.cumsum(cs)])
    rng = np.random.Generator(np.random.Philox(seed))
    # running (count, mean, M2), merged chunk by chunk in a fixed order
    count, mean, m2 = 0, 0.0, 0.0
    while count < trials:
        m = min(chunk, trials - count)
        X = (rng.random((m, n)) < ps).astype(np.int64)
        cost = cum_cost[_tests_performed(X, n, k)]
        c_mean = math.fsum(cost) / m
        c_m2 = math.fsum((cost - c_mean) ** 2)
        delta = c_mean - mean
        total = count + m
        mean += delta * m / total
        m2 += c_m2 + delta * delta * count * m / total
        count = total
    if trials == 1:
        return mean, 0.0
    return mean, math.sqrt(m2 / (trials - 1) / trials)
