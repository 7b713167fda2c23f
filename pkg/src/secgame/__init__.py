"""Game-theoretic friendly-jammer power allocation for secure UAV links."""

__version__ = "0.1.0"

from .game import (
    BRDynamicsResult,
    ContinuousGame,
    FiniteGame,
    ResourceLimitError,
    best_response,
    best_response_dynamics,
    enumerate_pure_nash,
    eval_payoff,
    max_deviation_gain,
)
from .secrecy import (
    ChannelGains,
    SecrecyScenario,
    channel_secrecy_rate,
    secrecy_rate_gradient,
    sum_secrecy_rate,
)
from .solvers import (
    PricingGame,
    SolveResult,
    SolverConfig,
    project_simplex,
    solve,
    solve_epr,
    solve_expert,
    solve_game,
    solve_grid_oracle,
    solve_projected_gradient,
)

__all__ = [
    "BRDynamicsResult",
    "ContinuousGame",
    "FiniteGame",
    "ResourceLimitError",
    "best_response",
    "best_response_dynamics",
    "enumerate_pure_nash",
    "eval_payoff",
    "max_deviation_gain",
    "ChannelGains",
    "SecrecyScenario",
    "channel_secrecy_rate",
    "secrecy_rate_gradient",
    "sum_secrecy_rate",
    "PricingGame",
    "SolveResult",
    "SolverConfig",
    "project_simplex",
    "solve",
    "solve_epr",
    "solve_expert",
    "solve_game",
    "solve_grid_oracle",
    "solve_projected_gradient",
]
