"""Distributionally robust non-adaptive k-of-n testing."""

from .model import (
    Instance,
    InstanceError,
    Window,
    complement_reduce,
    make_instance,
    modified_window,
    non_stopping_window,
    round_to_grid,
)
from .pbd import PrefixPmf, pmf, window_mass
from .cost import CostBreakdown, brute_force_cost, expected_cost, monte_carlo_cost
from .adversary import (
    AdvResult,
    StraddlingPathError,
    advbar_adversary,
    alpha_beta,
    approx_adversary,
    brute_force_adversary,
    qptas_adversary,
    solve_adversary,
)
from .solver import SolveResult, brute_force_drst, classical_sst, general_solve, solve, unit_cost_solve

__version__ = "0.1.0"
