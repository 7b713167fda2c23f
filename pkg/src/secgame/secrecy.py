"""Per-channel secrecy rates for UAV users protected by a friendly jammer.

Each of the ``N`` legitimate users owns one orthogonal channel to the base
station.  A single eavesdropper listens on every channel, and the jammer
spends part of its power budget on each channel to raise the eavesdropper's
noise floor.  The rate of channel ``i`` at jamming power ``p`` is the
Gaussian wiretap rate::

    phi_i(p) = log2(1 + Ps*gs/s2) - log2(1 + Ps*ge / (s2 + p*gj))

which is concave and nondecreasing in ``p``.  Reported metrics use
``max(0, phi_i)``; optimizers work on the unclipped (concave) sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "ChannelGains",
    "SecrecyScenario",
    "validate_allocation",
    "channel_secrecy_rate",
    "channel_rates",
    "sum_secrecy_rate",
    "secrecy_rate_gradient",
    "marginal_rate_at_zero",
]

LN2 = math.log(2.0)

# Relative slack allowed on the jamming budget.
BUDGET_SLACK = 1e-9


@dataclass(frozen=True)
class ChannelGains:
    """Power gains of one channel (dimensionless).

    Attributes
    ----------
    g_s : float
        Legitimate user to base station.
    g_e : float
        Legitimate user to eavesdropper.
    g_j : float
        Jammer to eavesdropper.
    """

    g_s: float
    g_e: float
    g_j: float

    def __post_init__(self):
        for name in ("g_s", "g_e", "g_j"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")


@dataclass(frozen=True)
class SecrecyScenario:
    """Static snapshot of the jamming scenario.

    Powers are in watts.  ``sigma2_w`` is the receiver noise power shared by
    the base station and the eavesdropper.
    """

    channels: tuple[ChannelGains, ...]
    p_total_w: float = 0.05
    p_s_w: float = 0.01
    sigma2_w: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        if not self.channels:
            raise ValueError("scenario needs at least one channel")
        for c in self.channels:
            if not isinstance(c, ChannelGains):
                raise TypeError("channels must be ChannelGains instances")
        for name in ("p_total_w", "p_s_w", "sigma2_w"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")

    @classmethod
    def from_arrays(cls, g_s, g_e, g_j, **powers) -> "SecrecyScenario":
        g_s, g_e, g_j = (np.asarray(a, dtype=float).ravel() for a in (g_s, g_e, g_j))
        if not (g_s.shape == g_e.shape == g_j.shape):
            raise ValueError("gain arrays must have equal length")
        chans = tuple(
            ChannelGains(float(a), float(b), float(c)) for a, b, c in zip(g_s, g_e, g_j)
        )
        return cls(chans, **powers)

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    @property
    def g_s(self) -> np.ndarray:
        return np.array([c.g_s for c in self.channels])

    @property
    def g_e(self) -> np.ndarray:
        return np.array([c.g_e for c in self.channels])

    @property
    def g_j(self) -> np.ndarray:
        return np.array([c.g_j for c in self.channels])

    def effective(self) -> np.ndarray:
        """Mask of channels on which jamming changes the rate."""
        return (self.g_e * self.g_j) > 0.0


def validate_allocation(scenario: SecrecyScenario, alloc: Sequence[float]) -> np.ndarray:
    """Return ``alloc`` as a float array after checking it is feasible.

    Raises
    ------
    ValueError
        On length mismatch, negative or non-finite entries, or a total above
        ``p_total_w * (1 + 1e-9)``.
    """
    p = np.asarray(alloc, dtype=float)
    if p.ndim != 1 or p.shape[0] != scenario.n_channels:
        raise ValueError(
            f"allocation must have length {scenario.n_channels}, got shape {p.shape}"
        )
    if not np.all(np.isfinite(p)) or np.any(p < 0.0):
        raise ValueError("allocation entries must be finite and >= 0")
    if p.sum() > scenario.p_total_w * (1.0 + BUDGET_SLACK):
        raise ValueError(
            f"allocation total {p.sum()!r} exceeds budget {scenario.p_total_w!r}"
        )
    return p


def _rate(g_s, g_e, g_j, p, p_s, s2):
    legit = np.log1p(p_s * g_s / s2)
    leak = np.log1p(p_s * g_e / (s2 + p * g_j))
    return (legit - leak) / LN2


def channel_secrecy_rate(
    scenario: SecrecyScenario, channel: int, p_i: float, clipped: bool = True
) -> float:
    """Secrecy rate of one channel in bits/s/Hz at jamming power ``p_i``."""
    if not 0 <= channel < scenario.n_channels:
        raise ValueError(f"channel index {channel} out of range")
    if not (math.isfinite(p_i) and p_i >= 0.0):
        raise ValueError(f"jamming power must be finite and >= 0, got {p_i!r}")
    c = scenario.channels[channel]
    r = float(_rate(c.g_s, c.g_e, c.g_j, p_i, scenario.p_s_w, scenario.sigma2_w))
    return max(0.0, r) if clipped else r


def channel_rates(
    scenario: SecrecyScenario, alloc: Sequence[float], clipped: bool = True
) -> np.ndarray:
    """Vector of per-channel rates; no budget check (callers validate)."""
    p = np.asarray(alloc, dtype=float)
    if p.shape != (scenario.n_channels,):
        raise ValueError(
            f"allocation must have length {scenario.n_channels}, got shape {p.shape}"
        )
    if np.any(p < 0.0):
        raise ValueError("allocation entries must be >= 0")
    r = _rate(scenario.g_s, scenario.g_e, scenario.g_j, p,
              scenario.p_s_w, scenario.sigma2_w)
    return np.maximum(r, 0.0) if clipped else r


def sum_secrecy_rate(
    scenario: SecrecyScenario, alloc: Sequence[float], clipped: bool = True
) -> float:
    """System sum secrecy rate.  ``clipped=True`` gives the reported metric."""
    p = validate_allocation(scenario, alloc)
    return float(np.sum(channel_rates(scenario, p, clipped)))


def secrecy_rate_gradient(scenario: SecrecyScenario, alloc: Sequence[float]) -> np.ndarray:
    """Gradient of the unclipped sum rate with respect to jamming powers.

    Written as ``gj*Ps*ge / (ln2 * (s2 + p*gj) * (s2 + Ps*ge + p*gj))``,
    which avoids the cancellation in the difference-of-reciprocals form and
    is nonnegative by construction.
    """
    p = validate_allocation(scenario, alloc)
    return _gradient(scenario.g_e, scenario.g_j, p, scenario.p_s_w, scenario.sigma2_w)


def _gradient(g_e, g_j, p, p_s, s2):
    a = s2 + p * g_j
    b = a + p_s * g_e
    return g_j * (p_s * g_e) / (LN2 * a * b)


def marginal_rate_at_zero(scenario: SecrecyScenario) -> np.ndarray:
    """Per-channel derivative of the rate at zero jamming power."""
    return _gradient(scenario.g_e, scenario.g_j, np.zeros(scenario.n_channels),
                     scenario.p_s_w, scenario.sigma2_w)
