"""Jamming-power allocation solvers.

All solvers split the jammer budget ``P_total`` across channels:

* ``epr``    -- equal split, the benchmark.
* ``expert`` -- KKT water-filling: bisect the shadow price of the budget
  until the closed-form per-channel demands add up to ``P_total``.
* ``game``   -- channels are players of a :class:`PricingGame` (own secrecy
  rate minus priced power).  For each candidate price, round-robin best
  responses settle on the Nash equilibrium of that game; the outer loop
  moves the price until the equilibrium spends the budget.
* ``grid``   -- exhaustive search on a discretized simplex (``N <= 3``).
* ``pga``    -- projected gradient ascent on the surrogate sum rate.

The optimizers work on the unclipped sum rate, which is concave; reports
carry both the surrogate and the clipped value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .game import (
    ContinuousGame,
    ResourceLimitError,
    best_response_dynamics,
    max_deviation_gain,
)
from .secrecy import (
    LN2,
    ChannelGains,
    SecrecyScenario,
    _gradient,
    channel_rates,
    marginal_rate_at_zero,
    secrecy_rate_gradient,
    validate_allocation,
)

__all__ = [
    "SolverConfig",
    "SolveResult",
    "PricingGame",
    "price_best_response",
    "solve_epr",
    "solve_expert",
    "solve_game",
    "solve_grid_oracle",
    "project_simplex",
    "solve_projected_gradient",
    "nash_certificate",
    "solve",
    "METHODS",
]


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances shared by the price-driven solvers.

    ``budget_tol`` is relative to ``P_total``; ``br_tol`` is the L-infinity
    round tolerance of the best-response dynamics, also relative to
    ``P_total``.  ``plateau_tol`` (bits/s/Hz) is the largest objective change
    allowed in the final price update.
    """

    budget_tol: float = 1e-9
    br_tol: float = 1e-12
    plateau_tol: float = 1e-9
    max_outer: int = 200
    max_br_rounds: int = 50
    grid_resolution: int = 2000
    pga_step: float = 1e-3
    pga_iters: int = 10_000

    def __post_init__(self):
        if not (self.budget_tol > 0 and self.br_tol > 0 and self.plateau_tol > 0):
            raise ValueError("tolerances must be > 0")
        if self.max_outer < 1 or self.max_br_rounds < 1:
            raise ValueError("iteration limits must be >= 1")
        if self.grid_resolution < 1 or self.pga_iters < 1 or not self.pga_step > 0:
            raise ValueError("grid_resolution, pga_iters and pga_step must be positive")


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Allocation plus diagnostics.

    ``trajectory`` holds ``(iteration, surrogate sum rate)`` pairs and
    ``clipped_trajectory`` the matching clipped values.  For the price-driven
    solvers both track the best budget-feasible allocation found so far, so
    they never decrease.
    """

    alloc: np.ndarray
    sum_rate_clipped: float
    sum_rate_surrogate: float
    method: str
    converged: bool
    rounds_used: int
    trajectory: tuple[tuple[int, float], ...] = ()
    clipped_trajectory: tuple[tuple[int, float], ...] = ()
    final_price: Optional[float] = None
    degenerate: bool = False
    br_rounds: int = 0

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "allocation": [float(x) for x in self.alloc],
            "sum_rate_clipped": self.sum_rate_clipped,
            "sum_rate_surrogate": self.sum_rate_surrogate,
            "converged": bool(self.converged),
            "rounds": int(self.rounds_used),
            "final_price": self.final_price,
            "degenerate": bool(self.degenerate),
        }


def _result(scenario, alloc, method, **kw) -> SolveResult:
    p = validate_allocation(scenario, alloc).copy()
    p.setflags(write=False)
    return SolveResult(
        alloc=p,
        sum_rate_clipped=float(np.sum(channel_rates(scenario, p, True))),
        sum_rate_surrogate=float(np.sum(channel_rates(scenario, p, False))),
        method=method,
        **kw,
    )


# -- pricing game -----------------------------------------------------------


def _price_response(g_e, g_j, price, p_s, s2):
    # Positive root of (A + c p)(B + c p) = c (B - A) / (price ln2), written
    # in the cancellation-free form x = 2K / (d + sqrt(d^2 + 4K)), x = A + c p.
    with np.errstate(divide="ignore", invalid="ignore"):
        d = p_s * g_e
        k = g_j * d / (price * LN2)
        x = 2.0 * k / (d + np.sqrt(d * d + 4.0 * k))
        p = (x - s2) / g_j
    return np.where((g_j > 0.0) & (g_e > 0.0), np.maximum(p, 0.0), 0.0)


def price_best_response(
    gains: ChannelGains, price: float, p_s_w: float, sigma2_w: float
) -> float:
    """Jamming power maximizing ``rate(p) - price * p`` over ``p >= 0``.

    Channels where jamming has no effect (``g_j == 0`` or ``g_e == 0``) get
    zero power.

    Raises
    ------
    ValueError
        If ``price <= 0``; the response would be unbounded.
    """
    if not price > 0.0:
        raise ValueError(f"price must be > 0, got {price!r}")
    return float(_price_response(gains.g_e, gains.g_j, price, p_s_w, sigma2_w))


class PricingGame:
    """Per-channel game at a fixed shadow price.

    Player ``i`` controls the jamming power on channel ``i`` within
    ``[0, P_total]`` and earns ``rate_i(p_i) - price * p_i``.  Payoffs are
    separable, so the game is an exact potential game whose unique
    equilibrium is the vector of closed-form price responses.
    """

    def __init__(self, scenario: SecrecyScenario, price: float):
        if not (math.isfinite(price) and price >= 0.0):
            raise ValueError(f"price must be finite and >= 0, got {price!r}")
        self.scenario = scenario
        self.price = float(price)

    def payoffs(self, profile: Sequence[float]) -> np.ndarray:
        p = np.asarray(profile, dtype=float)
        return channel_rates(self.scenario, p, clipped=False) - self.price * p

    def best_response(self, player: int) -> float:
        if self.price == 0.0:
            return self.scenario.p_total_w if self.scenario.effective()[player] else 0.0
        s = self.scenario
        p = price_best_response(s.channels[player], self.price, s.p_s_w, s.sigma2_w)
        return min(p, s.p_total_w)

    def as_game(self, closed_form: bool = True) -> ContinuousGame:
        """The game as a :class:`ContinuousGame`.

        With ``closed_form=False`` best responses fall back to the generic
        derivative-free search, which gives an independent certificate.
        """
        ivs = [(0.0, self.scenario.p_total_w)] * self.scenario.n_channels
        oracle = (lambda prof, i: self.best_response(i)) if closed_form else None
        return ContinuousGame(ivs, self.payoffs, oracle)

    def potential(self, profile: Sequence[float]) -> float:
        return float(np.sum(self.payoffs(profile)))


# -- solvers ----------------------------------------------------------------


def solve_epr(scenario: SecrecyScenario) -> SolveResult:
    n = scenario.n_channels
    alloc = np.full(n, scenario.p_total_w / n)
    return _result(scenario, alloc, "epr", converged=True, rounds_used=0)


def _price_bracket(scenario: SecrecyScenario):
    """Shadow prices with zero demand (high) and demand >= P_total (low)."""
    eff = scenario.effective()
    hi = float(np.max(marginal_rate_at_zero(scenario)[eff]))
    slope_at_budget = _gradient(scenario.g_e, scenario.g_j,
                                np.full(scenario.n_channels, scenario.p_total_w),
                                scenario.p_s_w, scenario.sigma2_w)
    lo = float(np.max(slope_at_budget[eff]))
    return lo, hi


def _clear_market(
    scenario: SecrecyScenario,
    respond: Callable[[float, np.ndarray], np.ndarray],
    cfg: SolverConfig,
):
    """Move the shadow price until the responses spend the budget.

    ``respond(price, warm)`` returns the allocation demanded at ``price``.
    The search keeps a bracket ``[lo, hi]`` with demand(lo) >= P_total and
    demand(hi) <= P_total and halves it in log-price.  It stops once the
    feasible side spends all but ``budget_tol * P_total`` and its surrogate
    sum rate moved by at most ``plateau_tol`` in the last update.

    Returns ``(alloc, price, iterations, converged, history)`` where the
    history lists the feasible allocation after every iteration.
    """
    total = scenario.p_total_w
    slack = cfg.budget_tol * total
    lo, hi = _price_bracket(scenario)
    feasible = np.zeros(scenario.n_channels)
    history, values = [], []

    def record():
        history.append(feasible.copy())
        values.append(float(np.sum(channel_rates(scenario, feasible, False))))

    def settled():
        if total - feasible.sum() > slack:
            return False
        return len(values) < 2 or values[-1] - values[-2] <= cfg.plateau_tol

    # On a single effective channel the low end of the bracket already
    # clears the market (responses are clipped at P_total).
    it = 1
    p = respond(lo, feasible)
    while p.sum() < total and it < cfg.max_outer:
        hi, feasible = lo, p
        record()
        lo *= 0.5
        it += 1
        p = respond(lo, feasible)
    if p.sum() <= total:
        hi, feasible = lo, p
    record()

    while not settled() and it < cfg.max_outer:
        mid = math.sqrt(lo * hi)
        if not lo < mid < hi:
            break
        it += 1
        p = respond(mid, feasible)
        if p.sum() <= total:
            hi, feasible = mid, p
        else:
            lo = mid
        record()

    converged = bool(total - feasible.sum() <= slack)
    return feasible, hi, it, converged, history


def _degenerate(scenario: SecrecyScenario, method: str) -> SolveResult:
    # Jamming changes nothing anywhere, so every allocation is optimal.
    epr = solve_epr(scenario)
    return _result(scenario, epr.alloc, method, converged=True, rounds_used=0,
                   degenerate=True)


def _trajectories(scenario, history):
    sur = tuple((k + 1, float(np.sum(channel_rates(scenario, p, False))))
                for k, p in enumerate(history))
    clip = tuple((k + 1, float(np.sum(channel_rates(scenario, p, True))))
                 for k, p in enumerate(history))
    return sur, clip


def solve_expert(scenario: SecrecyScenario, tol: float = 1e-9,
                 max_iter: int = 200) -> SolveResult:
    """KKT water-filling optimum of the surrogate sum rate.

    Every active channel ends with marginal rate equal to the shadow price;
    inactive channels have marginal rate at zero below it.  By concavity
    this is the global optimum under the budget.
    """
    if not scenario.effective().any():
        return _degenerate(scenario, "expert")
    cfg = SolverConfig(budget_tol=tol, max_outer=max_iter)
    cap = scenario.p_total_w

    def demand(price, _warm):
        p = _price_response(scenario.g_e, scenario.g_j, price,
                            scenario.p_s_w, scenario.sigma2_w)
        return np.minimum(p, cap)

    alloc, price, it, ok, history = _clear_market(scenario, demand, cfg)
    sur, clip = _trajectories(scenario, history)
    return _result(scenario, alloc, "expert", converged=ok, rounds_used=it,
                   trajectory=sur, clipped_trajectory=clip, final_price=price)


def solve_game(scenario: SecrecyScenario,
               config: SolverConfig = SolverConfig()) -> SolveResult:
    """Nash equilibrium of the market-clearing pricing game.

    For each candidate price the channel players run round-robin best
    responses (warm-started from the last budget-feasible equilibrium) until
    no power moves by more than ``br_tol * P_total``.  ``rounds_used``
    counts price updates; ``br_rounds`` the total best-response rounds.
    """
    if not scenario.effective().any():
        return _degenerate(scenario, "game")
    br_tol = config.br_tol * scenario.p_total_w
    state = {"rounds": 0, "stable": True}

    def equilibrium(price, warm):
        game = PricingGame(scenario, price).as_game()
        res = best_response_dynamics(game, warm, config.max_br_rounds, br_tol)
        state["rounds"] += res.rounds_used
        state["stable"] &= res.converged
        return np.array(res.final_profile)

    alloc, price, it, ok, history = _clear_market(scenario, equilibrium, config)
    sur, clip = _trajectories(scenario, history)
    return _result(scenario, alloc, "game", converged=ok and state["stable"],
                   rounds_used=it, trajectory=sur, clipped_trajectory=clip,
                   final_price=price, br_rounds=state["rounds"])


def nash_certificate(result: SolveResult, scenario: SecrecyScenario,
                     tol: float = 1e-12) -> float:
    """Deviation gain of ``result.alloc`` in the pricing game at its price.

    Uses the derivative-free best response, independent of the closed form
    the solvers rely on.
    """
    if result.final_price is None:
        raise ValueError("result carries no shadow price")
    game = PricingGame(scenario, result.final_price).as_game(closed_form=False)
    return max_deviation_gain(game, result.alloc, tol * scenario.p_total_w)


def solve_grid_oracle(scenario: SecrecyScenario, resolution: int = 2000) -> SolveResult:
    """Best clipped sum rate over ``{k * P_total / resolution}`` allocations
    that spend the whole budget.

    Candidates are visited in lexicographic order and the first maximizer
    wins.

    Raises
    ------
    ResourceLimitError
        For more than three channels.
    """
    n = scenario.n_channels
    if n > 3:
        raise ResourceLimitError(f"grid oracle supports N <= 3, got {n}")
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    total = scenario.p_total_w
    if n == 1:
        ks = np.array([[resolution]])
    elif n == 2:
        k0 = np.arange(resolution + 1)
        ks = np.stack([k0, resolution - k0], axis=1)
    else:
        k0, k1 = np.meshgrid(np.arange(resolution + 1), np.arange(resolution + 1),
                             indexing="ij")
        keep = (k0 + k1) <= resolution
        k0, k1 = k0[keep], k1[keep]
        ks = np.stack([k0, k1, resolution - k0 - k1], axis=1)
    cand = ks * total / resolution
    rates = np.sum(np.maximum(_rates_batch(scenario, cand), 0.0), axis=1)
    best = int(np.argmax(rates))
    return _result(scenario, cand[best], "grid", converged=True, rounds_used=len(cand))


def _rates_batch(scenario, cand):
    s2, ps = scenario.sigma2_w, scenario.p_s_w
    legit = np.log1p(ps * scenario.g_s / s2)
    leak = np.log1p(ps * scenario.g_e / (s2 + cand * scenario.g_j))
    return (legit - leak) / LN2


def project_simplex(v: Sequence[float], budget: float) -> np.ndarray:
    """Euclidean projection of ``v`` onto ``{p >= 0, sum(p) = budget}``.

    Sort-and-threshold: with ``u`` sorted descending, ``rho`` is the largest
    index where ``u_rho`` exceeds the running threshold, and
    ``p = max(v - theta, 0)``.
    """
    if not budget > 0:
        raise ValueError("budget must be > 0")
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - budget
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def solve_projected_gradient(scenario: SecrecyScenario, step: float,
                             iters: int) -> SolveResult:
    """Projected gradient ascent on the surrogate sum rate from the EPR point.

    Returns the best iterate seen.
    """
    if not step > 0:
        raise ValueError("step must be > 0")
    total = scenario.p_total_w
    p = np.full(scenario.n_channels, total / scenario.n_channels)
    best_p = p
    best = float(np.sum(channel_rates(scenario, p, False)))
    for _ in range(iters):
        p = project_simplex(p + step * secrecy_rate_gradient(scenario, p), total)
        # projection can overshoot the budget by an ulp
        if p.sum() > total:
            p = p * (total / p.sum())
        val = float(np.sum(channel_rates(scenario, p, False)))
        if val > best:
            best, best_p = val, p
    return _result(scenario, best_p, "pga", converged=True, rounds_used=iters)


METHODS = ("epr", "expert", "game", "grid", "pga")


def solve(scenario: SecrecyScenario, method: str,
          config: SolverConfig = SolverConfig()) -> SolveResult:
    """Dispatch by method name."""
    if method == "epr":
        return solve_epr(scenario)
    if method == "expert":
        return solve_expert(scenario, config.budget_tol, config.max_outer)
    if method == "game":
        return solve_game(scenario, config)
    if method == "grid":
        return solve_grid_oracle(scenario, config.grid_resolution)
    if method == "pga":
        return solve_projected_gradient(
            scenario, config.pga_step * scenario.p_total_w, config.pga_iters)
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
