"""Seeded scenarios, convergence runs and channel-count sweeps.

Randomness comes from a splitmix64 stream so that a ``(spec, seed)`` pair
yields the same gains on any platform: uniforms in ``[0, 1)`` are the top
53 bits of each output divided by ``2**53``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .secrecy import ChannelGains, SecrecyScenario, validate_allocation
from .solvers import SolverConfig, solve, solve_game

__all__ = [
    "PRNG_CONTRACT",
    "SplitMix64",
    "splitmix64",
    "mix_seed",
    "ScenarioSpec",
    "ScenarioFormatError",
    "gen_scenario",
    "scenario_to_dict",
    "scenario_from_dict",
    "dump_scenario",
    "load_scenario",
    "run_convergence",
    "plateau_iteration",
    "convergence_csv",
    "SweepRow",
    "SweepTable",
    "run_sweep",
    "sweep_csv",
]

PRNG_CONTRACT = "splitmix64/u53"

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """Vigna's splitmix64 generator over Python ints."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) / 9007199254740992.0


def splitmix64(x: int) -> int:
    """First output of a splitmix64 stream seeded with ``x``."""
    return SplitMix64(x).next_u64()


def mix_seed(base_seed: int, n: int, s: int) -> int:
    """Scenario seed for replicate ``s`` at ``n`` channels."""
    return splitmix64((base_seed & MASK64) ^ ((n * GOLDEN_GAMMA) & MASK64) ^ (s & MASK64))


@dataclass(frozen=True)
class ScenarioSpec:
    n_channels: int
    seed: int = 0
    p_total_w: float = 0.05
    p_s_w: float = 0.01
    sigma2_w: float = 1.0
    gain_scale: float = 1e4
    nonneg_baseline: bool = False

    def __post_init__(self):
        if self.n_channels < 1:
            raise ValueError("n_channels must be >= 1")
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must fit in 64 unsigned bits")
        for name in ("p_total_w", "p_s_w", "sigma2_w", "gain_scale"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")


def gen_scenario(spec: ScenarioSpec) -> SecrecyScenario:
    """Draw ``g_s, g_e, g_j`` per channel, in that order, from the seeded stream."""
    rng = SplitMix64(spec.seed)
    chans = []
    for _ in range(spec.n_channels):
        g_s = rng.uniform() * spec.gain_scale
        g_e = rng.uniform() * spec.gain_scale
        g_j = rng.uniform() * spec.gain_scale
        if spec.nonneg_baseline and g_e > g_s:
            g_s, g_e = g_e, g_s
        chans.append(ChannelGains(g_s, g_e, g_j))
    return SecrecyScenario(tuple(chans), spec.p_total_w, spec.p_s_w, spec.sigma2_w)


# -- scenario files ---------------------------------------------------------


class ScenarioFormatError(ValueError):
    """Scenario file content does not match the schema."""


def scenario_to_dict(scenario: SecrecyScenario,
                     spec: Optional[ScenarioSpec] = None) -> dict:
    doc = {
        "n_channels": scenario.n_channels,
        "p_total_w": scenario.p_total_w,
        "p_s_w": scenario.p_s_w,
        "sigma2_w": scenario.sigma2_w,
        "channels": [{"g_s": c.g_s, "g_e": c.g_e, "g_j": c.g_j}
                     for c in scenario.channels],
    }
    if spec is not None:
        doc["provenance"] = {"seed": spec.seed, "prng": PRNG_CONTRACT, "spec": asdict(spec)}
    return doc


def _number(doc, key):
    v = doc.get(key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioFormatError(f"{key!r} must be a number")
    return float(v)


def scenario_from_dict(doc) -> SecrecyScenario:
    """Build a scenario from its JSON object.  Explicit gains are authoritative;
    ``provenance`` is ignored."""
    if not isinstance(doc, dict):
        raise ScenarioFormatError("scenario must be a JSON object")
    chans = doc.get("channels")
    if not isinstance(chans, list) or not chans:
        raise ScenarioFormatError("'channels' must be a non-empty array")
    n = doc.get("n_channels")
    if isinstance(n, bool) or not isinstance(n, int) or n != len(chans):
        raise ScenarioFormatError("'n_channels' must equal the number of channels")
    try:
        gains = []
        for c in chans:
            if not isinstance(c, dict):
                raise ScenarioFormatError("each channel must be an object")
            gains.append(ChannelGains(_number(c, "g_s"), _number(c, "g_e"),
                                      _number(c, "g_j")))
        return SecrecyScenario(tuple(gains), _number(doc, "p_total_w"),
                               _number(doc, "p_s_w"), _number(doc, "sigma2_w"))
    except ScenarioFormatError:
        raise
    except (ValueError, TypeError) as exc:
        raise ScenarioFormatError(str(exc)) from exc


def dump_scenario(scenario: SecrecyScenario, spec: Optional[ScenarioSpec] = None) -> str:
    return json.dumps(scenario_to_dict(scenario, spec), indent=2) + "\n"


def load_scenario(path) -> SecrecyScenario:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioFormatError(f"invalid JSON: {exc}") from exc
    return scenario_from_dict(doc)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


# -- convergence (Fig. 4a analogue) -----------------------------------------


def run_convergence(scenario: SecrecyScenario,
                    config: SolverConfig = SolverConfig()) -> list[tuple[int, float]]:
    """Clipped sum rate after each price update of the game solver."""
    return list(solve_game(scenario, config).clipped_trajectory)


def plateau_iteration(series: Sequence[tuple[int, float]], tol: float = 1e-9) -> int:
    """First iteration whose value is within ``tol`` of the final one."""
    final = series[-1][1]
    for it, v in series:
        if abs(final - v) <= tol:
            return it
    return series[-1][0]


def convergence_csv(series: Iterable[tuple[int, float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["iteration", "sum_secrecy_rate_bps_hz"])
    for it, v in series:
        w.writerow([it, _fmt(v)])
    return buf.getvalue()


# -- sweep (Fig. 4b analogue) -----------------------------------------------


@dataclass(frozen=True, eq=False)
class SweepRow:
    method: str
    n: int
    seed: int
    sum_rate_clipped: float
    rounds_used: int
    converged: bool
    scenario: SecrecyScenario = field(repr=False)
    alloc: np.ndarray = field(repr=False)


@dataclass
class SweepTable:
    rows: list[SweepRow]
    notes: list[str] = field(default_factory=list)

    def mean_rate(self, method: str, n: int) -> float:
        vals = [r.sum_rate_clipped for r in self.rows if r.method == method and r.n == n]
        if not vals:
            raise KeyError((method, n))
        return float(np.mean(vals))

    def cell(self, method: str, n: int, seed: int) -> SweepRow:
        for r in self.rows:
            if (r.method, r.n, r.seed) == (method, n, seed):
                return r
        raise KeyError((method, n, seed))


def run_sweep(n_list: Sequence[int], seeds_per_n: int, base_spec: ScenarioSpec,
              methods: Sequence[str],
              config: SolverConfig = SolverConfig()) -> SweepTable:
    """Solve every ``(method, n, replicate)`` cell.

    Replicate ``s`` at ``n`` channels uses ``mix_seed(base_spec.seed, n, s)``;
    the ``seed`` column records ``s``.  The grid oracle is skipped above three
    channels and the skip is noted on the table.
    """
    if not n_list or not methods or seeds_per_n < 1:
        raise ValueError("n_list, methods and seeds_per_n must be non-empty/positive")
    methods = list(dict.fromkeys(methods))
    rows, notes = [], []
    scenarios = {
        (n, s): gen_scenario(replace(base_spec, n_channels=n,
                                     seed=mix_seed(base_spec.seed, n, s)))
        for n in n_list for s in range(seeds_per_n)
    }
    for method in methods:
        for n in sorted(set(n_list)):
            if method == "grid" and n > 3:
                notes.append(f"grid skipped for n={n} (N > 3)")
                continue
            for s in range(seeds_per_n):
                sc = scenarios[(n, s)]
                res = solve(sc, method, config)
                rows.append(SweepRow(method, n, s, res.sum_rate_clipped,
                                     res.rounds_used, res.converged, sc, res.alloc))
    return SweepTable(rows, notes)


def sweep_csv(table: SweepTable) -> str:
    """Render the sweep table, re-checking every allocation on the way out."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "n", "seed", "sum_secrecy_rate_bps_hz", "rounds", "converged"])
    for r in table.rows:
        validate_allocation(r.scenario, r.alloc)
        w.writerow([r.method, r.n, r.seed, _fmt(r.sum_rate_clipped), r.rounds_used,
                    "true" if r.converged else "false"])
    return buf.getvalue()
