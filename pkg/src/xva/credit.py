"""Default intensities of the two parties and the default-time probabilities they imply.

Both parties default independently of each other and of the market, with
deterministic, piecewise-constant intensities.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PartyCredit:
    """Credit profile of one party.

    ``intensity`` is either a constant or a sequence of rates, one per interval
    of ``knots``: rate ``i`` applies on ``[knots[i-1], knots[i])`` and the last
    rate applies from the last knot on. ``funding_spread`` of ``None`` means
    ``intensity * loss_rate`` (no market-wide spread).
    """

    intensity: float | tuple[float, ...] = 0.0
    recovery: float = 0.4
    funding_spread: float | None = None
    knots: tuple[float, ...] = ()

    def __post_init__(self):
        rates = (self.intensity,) if np.ndim(self.intensity) == 0 else tuple(self.intensity)
        rates = tuple(float(x) for x in rates)
        knots = tuple(float(x) for x in self.knots)
        if len(rates) != len(knots) + 1:
            raise ValueError("need exactly one intensity per knot interval (len(knots) + 1)")
        if any(x < 0 or not math.isfinite(x) for x in rates):
            raise ValueError("intensities must be finite and >= 0")
        if any(k <= 0 for k in knots[:1]) or any(b <= a for a, b in zip(knots, knots[1:])):
            raise ValueError("knots must be positive and strictly ascending")
        if not 0.0 <= self.recovery <= 1.0:
            raise ValueError(f"recovery must lie in [0, 1], got {self.recovery}")
        if self.funding_spread is not None and self.funding_spread < 0:
            raise ValueError("funding_spread must be >= 0")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "_rates", rates)
        if len(rates) == 1:
            object.__setattr__(self, "intensity", rates[0])
        else:
            object.__setattr__(self, "intensity", rates)

    @property
    def loss_rate(self) -> float:
        return 1.0 - self.recovery

    @property
    def is_constant(self) -> bool:
        return not self.knots

    def intensity_at(self, t: float) -> float:
        return self._rates[bisect_right(self.knots, t)]

    def integrated_intensity(self, t):
        """int_0^t lambda(u) du; vectorised over ``t``."""
        t = np.asarray(t, dtype=float)
        edges = np.concatenate(([0.0], self.knots, [np.inf]))
        total = np.zeros_like(t)
        for lo, hi, lam in zip(edges[:-1], edges[1:], self._rates):
            if lam:
                total = total + lam * np.clip(t - lo, 0.0, hi - lo)
        return float(total) if total.ndim == 0 else total

    def spread_at(self, t: float, market_spread: float = 0.0) -> float:
        if self.funding_spread is not None:
            return self.funding_spread
        return self.intensity_at(t) * self.loss_rate + market_spread

    def with_intensity(self, intensity: float) -> "PartyCredit":
        """Constant-intensity copy. An explicit funding spread keeps its market-wide part."""
        from dataclasses import replace

        spread = self.funding_spread
        if spread is not None:
            market_part = spread - self._rates[0] * self.loss_rate
            spread = max(intensity * self.loss_rate + market_part, 0.0)
        return replace(self, intensity=intensity, knots=(), funding_spread=spread)


def breakpoints(credit_B: PartyCredit, credit_C: PartyCredit, t0: float, t1: float) -> list[float]:
    """Intensity knots of either party strictly inside (t0, t1), with the end points."""
    inner = sorted({k for k in credit_B.knots + credit_C.knots if t0 < k < t1})
    return [t0, *inner, t1]


def survival_probability(credit_B: PartyCredit, credit_C: PartyCredit, t):
    """P(tau > t) for the first default tau = min(tau_B, tau_C)."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be >= 0")
    return np.exp(-(np.asarray(credit_B.integrated_intensity(t)) + credit_C.integrated_intensity(t)))[()]


def first_default_density(which: str, credit_B: PartyCredit, credit_C: PartyCredit, u):
    """Density of {tau = tau_i in du}: lambda_i(u) * P(tau > u)."""
    party = _party(which, credit_B, credit_C)
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr < 0):
        raise ValueError("u must be >= 0")
    lam = np.vectorize(party.intensity_at, otypes=[float])(u_arr) if not party.is_constant else party.intensity
    return (lam * survival_probability(credit_B, credit_C, u_arr))[()]


def default_in_interval_prob(which: str, credit_B: PartyCredit, credit_C: PartyCredit, t0: float, t1: float) -> float:
    """Joint survival to ``t0`` times the marginal default of party ``which`` in (t0, t1].

    This is the period weight used by the swap DVA/CVA sums. The other party's
    intensity only enters through survival up to ``t0``.
    """
    if t0 < 0:
        raise ValueError("t0 must be >= 0")
    if t1 < t0:
        raise ValueError(f"t1={t1} < t0={t0}")
    party = _party(which, credit_B, credit_C)
    inside = party.integrated_intensity(t1) - party.integrated_intensity(t0)
    return float(survival_probability(credit_B, credit_C, t0) * -math.expm1(-inside))


def first_default_prob(which: str, credit_B: PartyCredit, credit_C: PartyCredit, t: float) -> float:
    """P(tau = tau_i <= t), exact for piecewise-constant intensities."""
    party = _party(which, credit_B, credit_C)
    total = 0.0
    pts = breakpoints(credit_B, credit_C, 0.0, t)
    for a, b in zip(pts, pts[1:]):
        lam_i = party.intensity_at(a)
        lam = credit_B.intensity_at(a) + credit_C.intensity_at(a)
        if lam_i == 0.0:
            continue
        total += survival_probability(credit_B, credit_C, a) * lam_i / lam * -math.expm1(-lam * (b - a))
    return total


def survival_integral(credit_B: PartyCredit, credit_C: PartyCredit, t: float) -> float:
    """int_0^t P(tau > u) du, exact for piecewise-constant intensities."""
    total = 0.0
    pts = breakpoints(credit_B, credit_C, 0.0, t)
    for a, b in zip(pts, pts[1:]):
        lam = credit_B.intensity_at(a) + credit_C.intensity_at(a)
        width = b - a
        factor = width if lam == 0.0 else -math.expm1(-lam * width) / lam
        total += survival_probability(credit_B, credit_C, a) * factor
    return total


def _party(which: str, credit_B: PartyCredit, credit_C: PartyCredit) -> PartyCredit:
    if which == "B":
        return credit_B
    if which == "C":
        return credit_C
    raise ValueError(f"which must be 'B' or 'C', got {which!r}")
