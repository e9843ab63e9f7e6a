"""Market parameters, discount/forward curves and the config/curve file readers."""

from __future__ import annotations

import csv
import math
from bisect import bisect_left
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .collateral import CollateralTerms
from .credit import PartyCredit
from .trades import EquityOptionSpec, SwapSpec


class ConfigError(ValueError):
    """Bad configuration or curve file. ``key`` names the offending entry."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


@dataclass(frozen=True)
class DiscountCurve:
    """OIS-style discount curve, log-linear in the discount factors.

    ``tenors``/``factors`` are the pillars excluding the implicit (0, 1) point.
    Beyond the last pillar the last log-slope (a flat forward rate) is extended.
    """

    tenors: tuple[float, ...]
    factors: tuple[float, ...]

    def __post_init__(self):
        tenors = tuple(float(t) for t in self.tenors)
        factors = tuple(float(p) for p in self.factors)
        object.__setattr__(self, "tenors", tenors)
        object.__setattr__(self, "factors", factors)
        if not tenors or len(tenors) != len(factors):
            raise ConfigError("discount curve needs matching, non-empty tenors and factors")
        if tenors[0] <= 0.0:
            raise ConfigError(f"tenor {tenors[0]} must be > 0 (P(0,0)=1 is implicit)", "tenor_years")
        for a, b in zip(tenors, tenors[1:]):
            if not b > a:
                raise ConfigError(f"tenors not strictly ascending at {a}, {b}", "tenor_years")
        prev = 1.0
        for t, p in zip(tenors, factors):
            if not (p > 0.0 and math.isfinite(p)):
                raise ConfigError(f"non-positive discount factor {p} at tenor {t}", "discount_factor")
            if p > prev:
                raise ConfigError(f"discount factor increases at tenor {t}", "discount_factor")
            prev = p

    @classmethod
    def flat(cls, rate: float, tenors: Iterable[float] = (1.0, 50.0)) -> "DiscountCurve":
        tenors = tuple(tenors)
        return cls(tenors, tuple(math.exp(-rate * t) for t in tenors))

    @property
    def _log_pillars(self) -> tuple[np.ndarray, np.ndarray]:
        t = np.concatenate(([0.0], self.tenors))
        lp = np.concatenate(([0.0], np.log(self.factors)))
        return t, lp

    def discount(self, t: float) -> float:
        return discount_factor(self, t)

    def __call__(self, t):
        if np.ndim(t) == 0:
            return discount_factor(self, float(t))
        return np.array([discount_factor(self, float(x)) for x in np.ravel(t)]).reshape(np.shape(t))


@dataclass(frozen=True)
class ForwardCurve:
    """Projection curve: one expected fixing per accrual period ``(start, end)``."""

    starts: tuple[float, ...]
    ends: tuple[float, ...]
    rates: tuple[float, ...]

    def __post_init__(self):
        starts = tuple(float(x) for x in self.starts)
        ends = tuple(float(x) for x in self.ends)
        rates = tuple(float(x) for x in self.rates)
        object.__setattr__(self, "starts", starts)
        object.__setattr__(self, "ends", ends)
        object.__setattr__(self, "rates", rates)
        if not starts or not (len(starts) == len(ends) == len(rates)):
            raise ConfigError("forward curve needs matching, non-empty columns")
        for i, (s, e, f) in enumerate(zip(starts, ends, rates)):
            if not e > s:
                raise ConfigError(f"period {i} has end {e} <= start {s}", "end")
            if not math.isfinite(f):
                raise ConfigError(f"non-finite forward rate in period {i}", "forward_rate")
            if i and abs(s - ends[i - 1]) > 1e-9:
                raise ConfigError(f"period {i} starts at {s}, previous ends at {ends[i - 1]}", "start")

    def rate(self, start: float, end: float | None = None, tol: float = 1e-9) -> float:
        i = bisect_left(self.starts, start - tol)
        if i == len(self.starts) or abs(self.starts[i] - start) > tol:
            raise KeyError(f"no forward period starting at {start}")
        if end is not None and abs(self.ends[i] - end) > tol:
            raise KeyError(f"forward period starting at {start} ends at {self.ends[i]}, not {end}")
        return self.rates[i]


@dataclass(frozen=True)
class MarketEnvironment:
    """Flat-rate or curve-based market for the equity trades.

    Exactly one of ``risk_free_rate`` (continuously compounded) and ``curve``
    must be set.
    """

    volatility: float
    risk_free_rate: float | None = None
    curve: DiscountCurve | None = None
    dividend_yield: float = 0.0
    repo_spread: float = 0.0
    market_funding_spread: float = 0.0

    def __post_init__(self):
        if (self.risk_free_rate is None) == (self.curve is None):
            raise ConfigError("exactly one of risk_free_rate and curve must be given", "r")
        if not self.volatility > 0.0:
            raise ConfigError(f"sigma must be > 0, got {self.volatility}", "sigma")
        if not self.repo_spread >= 0.0:
            raise ConfigError(f"lambda_S must be >= 0, got {self.repo_spread}", "lambda_S")
        if not self.market_funding_spread >= 0.0:
            raise ConfigError(f"lambda_M must be >= 0, got {self.market_funding_spread}", "lambda_M")

    def df(self, t):
        """P(0, t); vectorised over ``t``."""
        if self.curve is None:
            return np.exp(-self.risk_free_rate * np.asarray(t, dtype=float)) if np.ndim(t) else math.exp(-self.risk_free_rate * t)
        return self.curve(t)

    def zero_rate(self, t: float) -> float:
        if self.curve is None:
            return self.risk_free_rate
        if t <= 0.0:
            t = 1e-8
        return -math.log(self.curve.discount(t)) / t

    def replace(self, **changes) -> "MarketEnvironment":
        from dataclasses import replace

        return replace(self, **changes)


def discount_factor(curve: DiscountCurve, t: float) -> float:
    """Log-linear interpolation of P(0, t); flat-forward extrapolation past the last pillar."""
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    if t == 0.0:
        return 1.0
    tenors = curve.tenors
    i = bisect_left(tenors, t)
    if i < len(tenors) and tenors[i] == t:
        return curve.factors[i]
    t_all, lp = curve._log_pillars
    if i == len(tenors):
        # flat extension of the last log-slope
        slope = (lp[-1] - lp[-2]) / (t_all[-1] - t_all[-2])
        return math.exp(lp[-1] + slope * (t - t_all[-1]))
    t0, t1 = t_all[i], t_all[i + 1]
    w = (t - t0) / (t1 - t0)
    return math.exp((1.0 - w) * lp[i] + w * lp[i + 1])


# ---------------------------------------------------------------------------
# file formats

_FLOAT_KEYS = {
    "S0", "K", "T", "r", "q", "sigma", "lambda_S", "lambda_M", "lambda_B", "lambda_C",
    "R_B", "R_C", "H", "X", "dt", "swap_rate", "tenor_years", "pay_freq", "notional",
}
_CHOICE_KEYS = {
    "mtm": ("risk_free", "pre_default"),
    "trade": ("call", "put", "payer_swap", "receiver_swap"),
}
_DEFAULTS = {
    "q": 0.0, "lambda_S": 0.0, "lambda_M": 0.0, "lambda_B": 0.0, "lambda_C": 0.0,
    "R_B": 0.4, "R_C": 0.4, "H": 0.0, "X": 0.0, "dt": 1.0 / 52.0,
    "mtm": "risk_free", "trade": "call", "notional": 1.0, "position": 1.0,
}
_REQUIRED = {
    "equity": ("S0", "K", "T", "r", "sigma"),
    "swap": ("swap_rate", "tenor_years", "pay_freq", "sigma"),
}


def parse_config(text: str) -> dict:
    """Parse ``key = value`` lines into a dict with numbers converted and defaults applied."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        raw[key] = value

    values: dict = dict(_DEFAULTS)
    for key, value in raw.items():
        if key in _CHOICE_KEYS:
            if value not in _CHOICE_KEYS[key]:
                raise ConfigError(f"{key} must be one of {_CHOICE_KEYS[key]}, got {value!r}", key)
            values[key] = value
        elif key in _FLOAT_KEYS or key == "position":
            try:
                values[key] = float(value)
            except ValueError:
                raise ConfigError(f"{key}: non-numeric value {value!r}", key) from None
            if not math.isfinite(values[key]):
                raise ConfigError(f"{key}: value must be finite", key)
        else:
            raise ConfigError(f"unknown key {key!r}", key)

    kind = "swap" if values["trade"].endswith("swap") else "equity"
    for key in _REQUIRED[kind]:
        if key not in values:
            raise ConfigError(f"missing mandatory key {key!r}", key)
    return values


@dataclass(frozen=True)
class MarketConfig:
    env: MarketEnvironment
    credit_B: PartyCredit
    credit_C: PartyCredit
    terms: CollateralTerms
    trade: EquityOptionSpec | SwapSpec
    dt: float = 1.0 / 52.0
    raw: dict = field(default_factory=dict, compare=False, repr=False)


def build_market_config(values: dict, curve: DiscountCurve | None = None) -> MarketConfig:
    """Assemble and validate the domain objects from parsed config values."""

    def checked(key, build):
        try:
            return build()
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", key) from None

    is_swap = values["trade"].endswith("swap")
    rate = values.get("r")
    if curve is not None:
        rate = None
    elif rate is None and is_swap:
        rate = 0.0
    env = MarketEnvironment(
        volatility=values["sigma"],
        risk_free_rate=rate,
        curve=curve,
        dividend_yield=values["q"],
        repo_spread=values["lambda_S"],
        market_funding_spread=values["lambda_M"],
    )
    credits = []
    for side in ("B", "C"):
        lam, rec = values[f"lambda_{side}"], values[f"R_{side}"]
        if not 0.0 <= rec <= 1.0:
            raise ConfigError(f"R_{side} must lie in [0, 1], got {rec}", f"R_{side}")
        if lam < 0.0:
            raise ConfigError(f"lambda_{side} must be >= 0, got {lam}", f"lambda_{side}")
        credits.append(PartyCredit(intensity=lam, recovery=rec, funding_spread=lam * (1.0 - rec) + values["lambda_M"]))
    terms = checked("H", lambda: CollateralTerms(values["H"], values["X"], values["mtm"]))
    if is_swap:
        freq = values["pay_freq"]
        n = values["tenor_years"] * freq
        if freq <= 0 or abs(n - round(n)) > 1e-9 or round(n) < 1:
            raise ConfigError("tenor_years * pay_freq must be a positive integer", "pay_freq")
        grid = tuple(i / freq for i in range(int(round(n)) + 1))
        trade = checked(
            "swap_rate",
            lambda: SwapSpec(grid, values["swap_rate"], "payer" if values["trade"] == "payer_swap" else "receiver", values["notional"]),
        )
    else:
        for key in ("S0", "K", "T"):
            if not values[key] > 0.0:
                raise ConfigError(f"{key} must be > 0, got {values[key]}", key)
        trade = EquityOptionSpec(values["S0"], values["K"], values["T"], values["trade"], values["position"])
    if not values["dt"] > 0.0:
        raise ConfigError(f"dt must be > 0, got {values['dt']}", "dt")
    return MarketConfig(env, credits[0], credits[1], terms, trade, values["dt"], values)


def load_market_config(path: str | Path, curve: DiscountCurve | None = None) -> MarketConfig:
    text = Path(path).read_text(encoding="utf-8")
    return build_market_config(parse_config(text), curve)


def load_curve(path: str | Path, kind: str = "discount") -> DiscountCurve | ForwardCurve:
    """Read a curve CSV (``tenor_years,discount_factor`` or ``start,end,forward_rate``)."""
    headers = {
        "discount": ["tenor_years", "discount_factor"],
        "forward": ["start", "end", "forward_rate"],
    }
    if kind not in headers:
        raise ValueError(f"kind must be 'discount' or 'forward', got {kind!r}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ConfigError(f"{path}: empty curve file")
    header = [c.strip() for c in rows[0]]
    if header != headers[kind]:
        raise ConfigError(f"{path}: expected header {','.join(headers[kind])}, got {','.join(header)}")
    cols: list[list[float]] = [[] for _ in header]
    for lineno, row in enumerate(rows[1:], 2):
        if len(row) != len(header):
            raise ConfigError(f"{path}:{lineno}: expected {len(header)} fields")
        for col, name, cell in zip(cols, header, row):
            try:
                col.append(float(cell))
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: non-numeric {name} {cell!r}", name) from None
    if kind == "discount":
        return DiscountCurve(tuple(cols[0]), tuple(cols[1]))
    return ForwardCurve(tuple(cols[0]), tuple(cols[1]), tuple(cols[2]))


def write_curve(curve: DiscountCurve | ForwardCurve, path: str | Path) -> None:
    """Write a curve CSV; ``repr`` keeps the float round trip exact."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if isinstance(curve, DiscountCurve):
            w.writerow(["tenor_years", "discount_factor"])
            w.writerows((repr(t), repr(p)) for t, p in zip(curve.tenors, curve.factors))
        else:
            w.writerow(["start", "end", "forward_rate"])
            w.writerows((repr(s), repr(e), repr(f)) for s, e, f in zip(curve.starts, curve.ends, curve.rates))
