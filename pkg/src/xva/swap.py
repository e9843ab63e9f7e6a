"""Vanilla swaps under OIS discounting with a separate projection curve,
Black swaptions on the swap rate, and the period-sum DVA/CVA of an uncollateralized swap."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .credit import PartyCredit, default_in_interval_prob
from .market_data import DiscountCurve, ForwardCurve
from .normal import norm_cdf
from .trades import SwapSpec


@dataclass(frozen=True)
class SwaptionVol:
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"swaption volatility must be > 0, got {self.sigma}")


def _check_range(grid, m: int, n: int) -> None:
    if not 0 <= m < n <= len(grid) - 1:
        raise IndexError(f"need 0 <= m < n <= {len(grid) - 1}, got m={m}, n={n}")


def annuity(discount: DiscountCurve, grid, m: int, n: int) -> float:
    """A_{m,n}(0): accrual-weighted discount factors of the payment dates T_{m+1}..T_n."""
    _check_range(grid, m, n)
    return math.fsum((grid[j + 1] - grid[j]) * discount.discount(grid[j + 1]) for j in range(m, n))


def forward_swap_rate(discount: DiscountCurve, forwards: ForwardCurve, grid, m: int, n: int) -> float:
    """s_{m,n}(0): annuity-weighted average of the projected period rates."""
    _check_range(grid, m, n)
    weights = [(grid[j + 1] - grid[j]) * discount.discount(grid[j + 1]) for j in range(m, n)]
    try:
        fixings = [forwards.rate(grid[j], grid[j + 1]) for j in range(m, n)]
    except KeyError as exc:
        raise ValueError(f"forward curve does not cover the swap grid: {exc.args[0]}") from None
    return math.fsum(w * f for w, f in zip(weights, fixings)) / math.fsum(weights)


def swap_value(spec: SwapSpec, discount: DiscountCurve, forwards: ForwardCurve) -> float:
    """Risk-free value to the buyer: notional * A (s_{0,n} - s), sign flipped for a receiver."""
    a = annuity(discount, spec.grid, 0, spec.n)
    s = forward_swap_rate(discount, forwards, spec.grid, 0, spec.n)
    return spec.sign * spec.notional * a * (s - spec.fixed_rate)


def swap_cashflow_value(spec: SwapSpec, discount: DiscountCurve, forwards: ForwardCurve) -> float:
    """Same value summed period by period: discounted (forward - s) * accrual."""
    g = spec.grid
    legs = [
        (g[j + 1] - g[j]) * discount.discount(g[j + 1]) * (forwards.rate(g[j], g[j + 1]) - spec.fixed_rate)
        for j in range(spec.n)
    ]
    return spec.sign * spec.notional * math.fsum(legs)


def black_swaption_from_rate(kind: str, annuity_value: float, swap_rate: float, strike: float,
                             sigma: float, expiry: float) -> float:
    """Black formula on a lognormal swap rate; ``payer`` is the call on the rate."""
    if kind not in ("payer", "receiver"):
        raise ValueError(f"kind must be 'payer' or 'receiver', got {kind!r}")
    if not (sigma > 0 and expiry > 0):
        raise ValueError("need sigma > 0 and expiry > 0")
    vol = sigma * math.sqrt(expiry)
    d1 = (math.log(swap_rate / strike) + 0.5 * vol * vol) / vol
    d2 = d1 - vol
    if kind == "payer":
        return annuity_value * (swap_rate * norm_cdf(d1) - strike * norm_cdf(d2))
    return annuity_value * (strike * norm_cdf(-d2) - swap_rate * norm_cdf(-d1))


def black_swaption(kind: str, discount: DiscountCurve, forwards: ForwardCurve, grid, m: int, n: int,
                   strike: float, sigma: float, expiry: float | None = None) -> float:
    """Option at T_m on the swap over (T_m, T_n), per unit notional."""
    expiry = grid[m] if expiry is None else expiry
    a = annuity(discount, grid, m, n)
    s = forward_swap_rate(discount, forwards, grid, m, n)
    return black_swaption_from_rate(kind, a, s, strike, sigma, expiry)


@dataclass(frozen=True)
class SwapAdjustments:
    dva: float
    cva: float
    dva_terms: tuple[float, ...]
    cva_terms: tuple[float, ...]

    def __iter__(self):
        return iter((self.dva, self.cva))


def swap_dva_cva(spec: SwapSpec, discount: DiscountCurve, forwards: ForwardCurve, sigma: float,
                 credit_B: PartyCredit, credit_C: PartyCredit) -> SwapAdjustments:
    """DVA (loss to C when B defaults) and CVA (gain to C when C defaults), uncollateralized.

    Exposure is observed at the period ends T_1..T_n: the positive part of the
    remaining swap at T_j is a swaption expiring at T_j, weighted by the
    probability that the party defaults first in (T_{j-1}, T_j].
    """
    g = spec.grid
    n = spec.n
    pos_kind, neg_kind = ("payer", "receiver") if spec.direction == "payer" else ("receiver", "payer")
    dva_terms, cva_terms = [], []
    for j in range(1, n + 1):
        if j == n:
            # nothing left to exchange after the last payment
            pos = neg = 0.0
        else:
            a = annuity(discount, g, j, n)
            s = forward_swap_rate(discount, forwards, g, j, n)
            pos = black_swaption_from_rate(pos_kind, a, s, spec.fixed_rate, sigma, g[j])
            neg = -black_swaption_from_rate(neg_kind, a, s, spec.fixed_rate, sigma, g[j])
        p_B = default_in_interval_prob("B", credit_B, credit_C, g[j - 1], g[j])
        p_C = default_in_interval_prob("C", credit_B, credit_C, g[j - 1], g[j])
        dva_terms.append(-credit_B.loss_rate * spec.notional * pos * p_B)
        cva_terms.append(-credit_C.loss_rate * spec.notional * neg * p_C)
    return SwapAdjustments(math.fsum(dva_terms) + 0.0, math.fsum(cva_terms) + 0.0,
                           tuple(dva_terms), tuple(cva_terms))


def adjusted_value(spec: SwapSpec, discount: DiscountCurve, forwards: ForwardCurve, sigma: float,
                   credit_B: PartyCredit, credit_C: PartyCredit) -> float:
    adj = swap_dva_cva(spec, discount, forwards, sigma, credit_B, credit_C)
    return swap_value(spec, discount, forwards) + adj.dva + adj.cva


def adjusted_swap_rate(spec: SwapSpec, discount: DiscountCurve, forwards: ForwardCurve, sigma: float,
                       credit_B: PartyCredit, credit_C: PartyCredit, width: float = 0.05) -> float:
    """Fixed rate at which the credit-adjusted swap value is zero (Brent's safeguarded secant)."""
    from dataclasses import replace

    par = forward_swap_rate(discount, forwards, spec.grid, 0, spec.n)

    def f(s):
        return adjusted_value(replace(spec, fixed_rate=s), discount, forwards, sigma, credit_B, credit_C)

    lo, hi = max(par - width, 1e-8), par + width
    f_lo, f_hi = f(lo), f(hi)
    if f_lo * f_hi > 0:
        raise ValueError(f"adjusted swap value has no sign change on [{lo:.4%}, {hi:.4%}]")
    tol = 1e-10 * abs(spec.notional)
    s_star = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    if abs(f(s_star)) > tol:
        raise ValueError(f"adjusted swap rate residual {f(s_star):.3e} above {tol:.1e}")
    return s_star
