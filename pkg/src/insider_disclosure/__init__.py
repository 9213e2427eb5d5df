"""Sequential-auction insider trading with mandatory post-trade disclosure.

Solvers for the disclosure equilibrium and its no-disclosure benchmark, the
frequent-trading limits, a seeded Monte Carlo checker and a batch CLI.
"""
from .asymptotics import (
    convergence_probe,
    cubic_f,
    decay_envelope,
    limit_constant_A,
    theorem_limits,
)
from .benchmark import (
    compare_two_period,
    solve_hs_multiperiod,
    solve_k_cubic,
    two_period_no_disclosure,
)
from .disclosure import (
    derive_path,
    solve,
    solve_a_sequence,
    two_period_closed_form,
    value_function,
    verify_difference_system,
)
from .errors import *  # noqa: F401,F403
from .model import AuctionCoefficients, EquilibriumPath, MarketParams, TwoPeriodBundle, validate
from .simulator import SimulationConfig, convention_equivalence, simulate_paths

__version__ = "0.1.0"
