import numpy as np
import pytest

from drkofn.harness import gen_random, rng_for


@pytest.fixture
def rng():
    return rng_for(20260101)


def random_case(rng, n, eps=0.0, unit=False, k=None):
    inst = gen_random(n, k=k, eps=eps, unit_costs=unit, rng=rng)
    sigma = tuple(int(i) for i in rng.permutation(n))
    p = rng.uniform(np.array(inst.lo), np.array(inst.hi))
    return inst, sigma, p


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.write_sep("=", "acceptance criteria")
        for num in sorted(results):
            terminalreporter.write_line(results[num])
