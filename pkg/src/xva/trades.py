"""Trade descriptions shared by the pricers."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class EquityOptionSpec:
    """European option on one share.

    ``position`` scales the option and fixes the sign seen by the buyer C:
    +1 is a long option (an asset to C), -1 a short one (a liability).
    """

    spot: float
    strike: float
    maturity: float
    side: str = "call"
    position: float = 1.0

    def __post_init__(self):
        if not (self.spot > 0 and self.strike > 0 and self.maturity > 0):
            raise ValueError("spot, strike and maturity must all be > 0")
        if self.side not in ("call", "put"):
            raise ValueError(f"side must be 'call' or 'put', got {self.side!r}")
        if self.position == 0:
            raise ValueError("position must be non-zero")

    def payoff(self, s):
        intrinsic = (s - self.strike) if self.side == "call" else (self.strike - s)
        return self.position * (intrinsic * (intrinsic > 0))


@dataclass(frozen=True)
class SwapSpec:
    """Fixed-for-floating swap on ``grid`` = (T_0, ..., T_n); both legs share the grid.

    ``direction`` is taken from the buyer C: ``payer`` pays fixed.
    """

    grid: tuple[float, ...]
    fixed_rate: float
    direction: str = "payer"
    notional: float = 1.0

    def __post_init__(self):
        grid = tuple(float(t) for t in self.grid)
        object.__setattr__(self, "grid", grid)
        if len(grid) < 2:
            raise ValueError("swap grid needs at least two dates")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("swap grid must be strictly ascending")
        if self.direction not in ("payer", "receiver"):
            raise ValueError(f"direction must be 'payer' or 'receiver', got {self.direction!r}")

    @property
    def n(self) -> int:
        return len(self.grid) - 1

    @property
    def sign(self) -> float:
        return 1.0 if self.direction == "payer" else -1.0

    @classmethod
    def regular(cls, tenor_years: float, pay_freq: int, fixed_rate: float, direction: str = "payer", notional: float = 1.0):
        n = int(round(tenor_years * pay_freq))
        return cls(tuple(i / pay_freq for i in range(n + 1)), fixed_rate, direction, notional)
