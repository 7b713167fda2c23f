"""Strategic-form games in pure strategies.

Two game flavours share one set of operations:

* :class:`FiniteGame` -- every player picks an index from a finite strategy
  set and payoffs live in a dense tensor of shape
  ``(*strategy_counts, player_count)``.
* :class:`ContinuousGame` -- every player picks a real number from a closed
  interval and payoffs come from a deterministic oracle.

Best responses, deviation gains, pure-equilibrium enumeration and
round-robin best-response dynamics are plain functions over these values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

__all__ = [
    "ResourceLimitError",
    "FiniteGame",
    "ContinuousGame",
    "BRDynamicsResult",
    "eval_payoff",
    "best_response",
    "max_deviation_gain",
    "enumerate_pure_nash",
    "best_response_dynamics",
    "golden_section_max",
    "prisoners_dilemma",
    "matching_pennies",
]

DEFAULT_ENUMERATION_CAP = 10**6

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_MAX_SECTION_STEPS = 400


class ResourceLimitError(RuntimeError):
    """Raised when a request would exceed an enumeration or search guard."""


@dataclass(frozen=True, eq=False)
class FiniteGame:
    """Finite strategic-form game.

    Parameters
    ----------
    payoffs : array_like
        Tensor of shape ``(s_0, ..., s_{n-1}, n)``; entry ``[a_0, ..., a_{n-1}, i]``
        is player ``i``'s payoff at profile ``(a_0, ..., a_{n-1})``.
    strategy_names : optional
        Per-player labels, only used for display.
    """

    payoffs: np.ndarray
    strategy_names: Optional[tuple[tuple[str, ...], ...]] = None

    def __post_init__(self):
        u = np.array(self.payoffs, dtype=float)
        if u.ndim < 2 or u.shape[-1] != u.ndim - 1:
            raise ValueError(
                "payoff tensor must have shape (*strategy_counts, player_count)"
            )
        if any(s < 1 for s in u.shape[:-1]):
            raise ValueError("every player needs at least one strategy")
        if not np.all(np.isfinite(u)):
            raise ValueError("payoffs must be finite")
        u.setflags(write=False)
        object.__setattr__(self, "payoffs", u)
        if self.strategy_names is not None:
            names = tuple(tuple(n) for n in self.strategy_names)
            if tuple(len(n) for n in names) != self.strategy_counts:
                raise ValueError("strategy_names do not match strategy_counts")
            object.__setattr__(self, "strategy_names", names)

    @classmethod
    def bimatrix(cls, row, col, strategy_names=None) -> "FiniteGame":
        """Two-player game from row and column payoff matrices."""
        row = np.asarray(row, dtype=float)
        col = np.asarray(col, dtype=float)
        if row.shape != col.shape or row.ndim != 2:
            raise ValueError("row and column payoff matrices must share a 2-D shape")
        return cls(np.stack([row, col], axis=-1), strategy_names)

    @property
    def player_count(self) -> int:
        return self.payoffs.ndim - 1

    @property
    def strategy_counts(self) -> tuple[int, ...]:
        return self.payoffs.shape[:-1]

    def check_profile(self, profile: Sequence[int]) -> tuple[int, ...]:
        prof = tuple(profile)
        if len(prof) != self.player_count:
            raise ValueError(
                f"profile has {len(prof)} actions, game has {self.player_count} players"
            )
        out = []
        for i, (a, s) in enumerate(zip(prof, self.strategy_counts)):
            if isinstance(a, (bool, np.bool_)) or not isinstance(a, (int, np.integer)):
                raise ValueError(f"action of player {i} must be an integer index")
            if not 0 <= a < s:
                raise ValueError(f"action {a} of player {i} outside 0..{s - 1}")
            out.append(int(a))
        return tuple(out)

    def payoff_vector(self, profile: Sequence[int]) -> np.ndarray:
        return self.payoffs[self.check_profile(profile)]


@dataclass(frozen=True, eq=False)
class ContinuousGame:
    """Game with one closed real interval of actions per player.

    ``payoff_oracle`` maps a tuple of actions to a sequence of payoffs and
    must be deterministic.  ``best_response_oracle(profile, player)`` is an
    optional closed-form best response; without it best responses come from
    a derivative-free unimodal search.
    """

    strategy_intervals: tuple[tuple[float, float], ...]
    payoff_oracle: Callable[[tuple[float, ...]], Sequence[float]]
    best_response_oracle: Optional[Callable[[tuple[float, ...], int], float]] = field(
        default=None
    )

    def __post_init__(self):
        ivs = tuple((float(lo), float(hi)) for lo, hi in self.strategy_intervals)
        if not ivs:
            raise ValueError("game needs at least one player")
        for i, (lo, hi) in enumerate(ivs):
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise ValueError(f"invalid interval for player {i}: [{lo}, {hi}]")
        object.__setattr__(self, "strategy_intervals", ivs)

    @property
    def player_count(self) -> int:
        return len(self.strategy_intervals)

    def check_profile(self, profile: Sequence[float]) -> tuple[float, ...]:
        prof = tuple(float(a) for a in profile)
        if len(prof) != self.player_count:
            raise ValueError(
                f"profile has {len(prof)} actions, game has {self.player_count} players"
            )
        for i, (a, (lo, hi)) in enumerate(zip(prof, self.strategy_intervals)):
            if not lo <= a <= hi:
                raise ValueError(f"action {a} of player {i} outside [{lo}, {hi}]")
        return prof

    def payoff_vector(self, profile: Sequence[float]) -> np.ndarray:
        prof = self.check_profile(profile)
        u = np.asarray(self.payoff_oracle(prof), dtype=float)
        if u.shape != (self.player_count,):
            raise ValueError("payoff oracle returned a vector of the wrong length")
        return u


Game = Union[FiniteGame, ContinuousGame]


@dataclass(frozen=True)
class BRDynamicsResult:
    """Outcome of :func:`best_response_dynamics`.

    ``trajectory[k]`` is the profile after round ``k + 1``.
    """

    trajectory: tuple[tuple, ...]
    converged: bool
    rounds_used: int
    final_max_deviation_gain: float

    @property
    def final_profile(self) -> tuple:
        return self.trajectory[-1]


def _check_player(game: Game, player: int) -> int:
    if isinstance(player, (bool, np.bool_)) or not isinstance(player, (int, np.integer)):
        raise ValueError("player must be an integer index")
    if not 0 <= player < game.player_count:
        raise ValueError(f"player {player} out of range 0..{game.player_count - 1}")
    return int(player)


def eval_payoff(game: Game, profile: Sequence, player: int) -> float:
    """Payoff of ``player`` at ``profile``."""
    player = _check_player(game, player)
    return float(game.payoff_vector(profile)[player])


def golden_section_max(
    f: Callable[[float], float], lo: float, hi: float, tol: float
) -> float:
    """Maximize a unimodal ``f`` on ``[lo, hi]``.

    The bracket is shrunk until its width drops below ``tol``; the midpoint
    is then compared against both endpoints so that monotone functions return
    the boundary exactly.  Non-unimodal functions yield a local maximum.
    """
    if tol <= 0.0:
        raise ValueError("tol must be > 0")
    a, b = lo, hi
    if b - a < tol:
        x = 0.5 * (a + b)
    else:
        c = b - _INVPHI * (b - a)
        d = a + _INVPHI * (b - a)
        fc, fd = f(c), f(d)
        for _ in range(_MAX_SECTION_STEPS):
            if b - a < tol:
                break
            if fc >= fd:
                b, d, fd = d, c, fc
                c = b - _INVPHI * (b - a)
                fc = f(c)
            else:
                a, c, fc = c, d, fd
                d = a + _INVPHI * (b - a)
                fd = f(d)
            # bracket stops shrinking once it spans a handful of ulps
            if c >= d:
                break
        x = 0.5 * (a + b)
    best_x, best_f = x, f(x)
    for edge in (lo, hi):
        fe = f(edge)
        if fe > best_f:
            best_x, best_f = edge, fe
    return best_x


def best_response(game: Game, profile: Sequence, player: int, tol: float = 1e-9):
    """Payoff-maximizing action of ``player`` with the others held fixed.

    Finite games use exhaustive argmax with ties going to the lowest index.
    Continuous games use the closed-form oracle when the game provides one,
    else :func:`golden_section_max` on the player's interval.
    """
    player = _check_player(game, player)
    if isinstance(game, FiniteGame):
        prof = list(game.check_profile(profile))
        idx = tuple(prof[:player]) + (slice(None),) + tuple(prof[player + 1:])
        return int(np.argmax(game.payoffs[idx + (player,)]))

    prof = list(game.check_profile(profile))
    if game.best_response_oracle is not None:
        lo, hi = game.strategy_intervals[player]
        return float(min(max(game.best_response_oracle(tuple(prof), player), lo), hi))

    def own(x):
        trial = list(prof)
        trial[player] = x
        return float(game.payoff_vector(trial)[player])

    lo, hi = game.strategy_intervals[player]
    return golden_section_max(own, lo, hi, tol)


def max_deviation_gain(game: Game, profile: Sequence, tol: float = 1e-9) -> float:
    """Largest payoff improvement any single player can get by deviating.

    Always ``>= 0``; ``profile`` is a (pure) Nash equilibrium to within
    ``tol`` iff the result is ``<= tol``.
    """
    prof = list(game.check_profile(profile))
    here = game.payoff_vector(prof)
    gain = 0.0
    for i in range(game.player_count):
        trial = list(prof)
        trial[i] = best_response(game, prof, i, tol)
        gain = max(gain, float(game.payoff_vector(trial)[i] - here[i]))
    return gain


def enumerate_pure_nash(
    game: FiniteGame, cap: int = DEFAULT_ENUMERATION_CAP
) -> set[tuple[int, ...]]:
    """All pure-strategy Nash equilibria of a finite game.

    A profile qualifies when every player's payoff equals the maximum over
    that player's own strategies with the others fixed, i.e. no unilateral
    deviation is strictly profitable.

    Raises
    ------
    ResourceLimitError
        If the number of profiles exceeds ``cap``.
    """
    if not isinstance(game, FiniteGame):
        raise TypeError("enumerate_pure_nash needs a FiniteGame")
    n_profiles = math.prod(game.strategy_counts)
    if n_profiles > cap:
        raise ResourceLimitError(
            f"{n_profiles} profiles exceed the enumeration cap of {cap}"
        )
    stable = np.ones(game.strategy_counts, dtype=bool)
    for i in range(game.player_count):
        u_i = game.payoffs[..., i]
        stable &= u_i >= u_i.max(axis=i, keepdims=True)
    return {tuple(int(a) for a in idx) for idx in zip(*np.nonzero(stable))}


def best_response_dynamics(
    game: Game, init: Sequence, max_rounds: int = 100, tol: float = 1e-9
) -> BRDynamicsResult:
    """Round-robin best-response dynamics.

    Players update in ascending index order, each against the latest actions
    of the others.  The run stops after the first round in which no action
    moves by more than ``tol`` (finite games: no action changes at all), or
    after ``max_rounds`` rounds.  ``converged`` additionally requires the
    final profile's deviation gain to be at most ``tol``.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    prof = list(game.check_profile(init))
    finite = isinstance(game, FiniteGame)
    trajectory = []
    stable = False
    rounds = 0
    while rounds < max_rounds:
        rounds += 1
        moved = 0.0
        for i in range(game.player_count):
            a = best_response(game, prof, i, tol)
            if finite:
                moved = max(moved, float(a != prof[i]))
            else:
                moved = max(moved, abs(a - prof[i]))
            prof[i] = a
        trajectory.append(tuple(prof))
        if (moved == 0.0) if finite else (moved < tol):
            stable = True
            break
    gain = max_deviation_gain(game, prof, tol)
    return BRDynamicsResult(
        trajectory=tuple(trajectory),
        converged=stable and gain <= tol,
        rounds_used=rounds,
        final_max_deviation_gain=gain,
    )


def prisoners_dilemma(t=5.0, r=3.0, p=1.0, s=0.0) -> FiniteGame:
    """Canonical prisoner's dilemma; strategy 0 is Cooperate, 1 is Defect."""
    row = [[r, s], [t, p]]
    return FiniteGame.bimatrix(row, np.transpose(row),
                               (("Cooperate", "Defect"), ("Cooperate", "Defect")))


def matching_pennies() -> FiniteGame:
    """Row player wins +1 on a match; strategy 0 is Heads, 1 is Tails."""
    row = np.array([[1.0, -1.0], [-1.0, 1.0]])
    return FiniteGame.bimatrix(row, -row, (("H", "T"), ("H", "T")))
