"""Cash collateral under threshold / minimum-transfer rules, and default settlement."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StepSchedule:
    """Right-continuous step function: ``values[i]`` on ``[times[i-1], times[i])``."""

    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != len(self.times) + 1:
            raise ValueError("need len(times) + 1 values")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly ascending")

    def __call__(self, t: float) -> float:
        return self.values[bisect_right(self.times, t)]

    def __iter__(self):
        return iter(self.values)


def _at(x: float | StepSchedule, t: float) -> float:
    return x(t) if isinstance(x, StepSchedule) else x


@dataclass(frozen=True)
class CollateralTerms:
    """Threshold ``H`` and minimum transfer amount ``X`` (constants or step schedules).

    ``mtm_convention`` selects the mark-to-market reference at default:
    ``risk_free`` (the risk-free value) or ``pre_default``.
    """

    threshold: float | StepSchedule = 0.0
    min_transfer: float | StepSchedule = 0.0
    mtm_convention: str = "risk_free"

    def __post_init__(self):
        if self.mtm_convention not in ("risk_free", "pre_default"):
            raise ValueError(f"mtm_convention must be 'risk_free' or 'pre_default', got {self.mtm_convention!r}")
        if isinstance(self.threshold, StepSchedule) or isinstance(self.min_transfer, StepSchedule):
            times = sorted(set(getattr(self.threshold, "times", ())) | set(getattr(self.min_transfer, "times", ())))
            probes = [0.0, *times]
        else:
            probes = [0.0]
        for t in probes:
            h, x = _at(self.threshold, t), _at(self.min_transfer, t)
            if not h >= x >= 0.0:
                raise ValueError(f"collateral terms need H >= X >= 0, got H={h}, X={x} at t={t}")

    def at(self, t: float = 0.0) -> tuple[float, float]:
        return _at(self.threshold, t), _at(self.min_transfer, t)

    @property
    def collateralized(self) -> bool:
        """True for a CSA trade (positive threshold at some time)."""
        h = self.threshold
        return any(v > 0 for v in h) if isinstance(h, StepSchedule) else h > 0


def collateral_value(M, terms: CollateralTerms, t: float = 0.0):
    """Collateral held against mark-to-market ``M``: posted by B when positive, by C when negative."""
    H, X = terms.at(t)
    M = np.asarray(M, dtype=float)
    c = np.where(M >= H, M - H + X, 0.0) + np.where(M <= -H, M + H - X, 0.0)
    if H == 0.0:
        # both branches fire at M == 0; either gives X - X = 0
        c = np.where(M == 0.0, 0.0, c)
    return c[()]


def proportional_collateral(M, recovery_B: float, recovery_C: float):
    """Collateral equal to the recovered part of the exposure: R_B M+ + R_C M-."""
    M = np.asarray(M, dtype=float)
    return (recovery_B * np.maximum(M, 0.0) + recovery_C * np.minimum(M, 0.0))[()]


def default_payment(M, c, defaulter: str, recovery: float | None = None):
    """Post-default value V(tau+) to the buyer.

    With ``recovery`` given, the uncollateralized ISDA rule applies (recovered
    positive MTM of the defaulter); otherwise collateral ``c`` is kept by the
    survivor up to the exposure.
    """
    M = np.asarray(M, dtype=float)
    pos, neg = np.maximum(M, 0.0), np.minimum(M, 0.0)
    if defaulter == "B":
        if recovery is not None:
            return (recovery * pos + neg)[()]
        return (np.minimum(np.maximum(c, 0.0), pos) + neg)[()]
    if defaulter == "C":
        if recovery is not None:
            return (pos + recovery * neg)[()]
        return (np.maximum(np.minimum(c, 0.0), neg) + pos)[()]
    raise ValueError(f"defaulter must be 'B' or 'C', got {defaulter!r}")
