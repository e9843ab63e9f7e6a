"""Closed-form equity pricers: Black-Scholes, compound-plus-digital options, repo-adjusted value."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .market_data import MarketEnvironment
from .normal import bivariate_normal_cdf, norm_cdf, norm_pdf
from .trades import EquityOptionSpec


@dataclass(frozen=True)
class CompoundQuery:
    """Option on the value at ``default_time`` of ``inner_option``, knocked in above ``threshold``."""

    inner_option: EquityOptionSpec
    default_time: float
    threshold: float = 0.0
    min_transfer: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.default_time < self.inner_option.maturity:
            raise ValueError(f"default_time must lie in (0, T), got {self.default_time}")
        if not self.threshold >= self.min_transfer >= 0.0:
            raise ValueError("need H >= X >= 0")


def bs_value(S, tau, strike, df, div, sigma, side="call"):
    """Option value per unit at time-to-expiry ``tau``.

    ``df`` is the discount factor and ``div`` the dividend factor over ``tau``.
    Vectorised over ``S``; ``tau == 0`` gives the intrinsic value.
    """
    S = np.asarray(S, dtype=float)
    if tau <= 0.0:
        out = np.maximum(S - strike, 0.0) if side == "call" else np.maximum(strike - S, 0.0)
        return out[()]
    vol = sigma * math.sqrt(tau)
    fwd = S * div
    kd = strike * df
    with np.errstate(divide="ignore"):
        d1 = (np.log(fwd / kd) + 0.5 * vol * vol) / vol
    d2 = d1 - vol
    if side == "call":
        out = fwd * norm_cdf(d1) - kd * norm_cdf(d2)
    else:
        out = kd * norm_cdf(-d2) - fwd * norm_cdf(-d1)
    return out[()]


def bs_spot_delta(S, tau, strike, df, div, sigma, side="call"):
    """dV/dS per unit; at ``tau == 0`` the payoff's right derivative."""
    S = np.asarray(S, dtype=float)
    if tau <= 0.0:
        out = (S > strike).astype(float) if side == "call" else -(S < strike).astype(float)
        return out[()]
    vol = sigma * math.sqrt(tau)
    with np.errstate(divide="ignore"):
        d1 = (np.log(S * div / (strike * df)) + 0.5 * vol * vol) / vol
    out = div * norm_cdf(d1) if side == "call" else div * (norm_cdf(d1) - 1.0)
    return out[()]


def _forward_factors(env: MarketEnvironment, t: float, T: float) -> tuple[float, float]:
    """(P(t, T), exp(-q (T - t))) seen from 0 with deterministic rates."""
    return env.df(T) / env.df(t), math.exp(-env.dividend_yield * (T - t))


def value_surface(spec: EquityOptionSpec, env: MarketEnvironment, S, t: float):
    """Risk-free value V_e(S, t) and spot delta of the position, vectorised over ``S``."""
    df, div = _forward_factors(env, t, spec.maturity)
    tau = spec.maturity - t
    v = bs_value(S, tau, spec.strike, df, div, env.volatility, spec.side)
    d = bs_spot_delta(S, tau, spec.strike, df, div, env.volatility, spec.side)
    return spec.position * v, spec.position * d


def black_scholes_price(spec: EquityOptionSpec, env: MarketEnvironment) -> float:
    return float(value_surface(spec, env, spec.spot, 0.0)[0])


def bs_delta(spec: EquityOptionSpec, env: MarketEnvironment) -> float:
    return float(value_surface(spec, env, spec.spot, 0.0)[1])


def repo_adjusted_value(spec: EquityOptionSpec, env: MarketEnvironment) -> float:
    """Risk-free value when the hedge is financed at the repo rate r + lambda_S.

    The underlying then drifts at r + lambda_S - q, i.e. the dividend yield is
    lowered by the repo spread.
    """
    adjusted = env.replace(dividend_yield=env.dividend_yield - env.repo_spread, repo_spread=0.0)
    return black_scholes_price(spec, adjusted)


# ---------------------------------------------------------------------------
# compound options


def _unit_value(option: EquityOptionSpec, env: MarketEnvironment, S, u: float):
    df, div = _forward_factors(env, u, option.maturity)
    return bs_value(S, option.maturity - u, option.strike, df, div, env.volatility, option.side)


def critical_stock(inner_option: EquityOptionSpec, env: MarketEnvironment, u: float, H: float,
                   tol: float = 1e-10, max_iter: int = 200) -> float:
    """Spot S* at time ``u`` where the (unit) inner option is worth ``H``.

    Safeguarded Newton: a Newton step is taken only when it stays inside the
    current bracket, otherwise the bracket is bisected.
    """
    call = inner_option.side == "call"
    if H <= 0.0:
        return 0.0 if call else math.inf
    K, T = inner_option.strike, inner_option.maturity
    sigma = env.volatility
    df, div = _forward_factors(env, u, T)
    if not call and H >= K * df:
        raise ValueError(f"threshold {H} is not below the put's supremum {K * df}")

    # absolute residual for ordinary thresholds, relative once H itself is tiny
    tol = tol * min(1.0, H)

    def f(s):
        return float(_unit_value(inner_option, env, s, u)) - H

    def fprime(s):
        return float(bs_spot_delta(s, T - u, K, df, div, sigma, inner_option.side))

    lo, hi = 1e-8, 10.0 * inner_option.spot * math.exp(10.0 * sigma * math.sqrt(max(u, 1e-12)))
    for _ in range(60):
        if (f(hi) > 0) == call:
            break
        hi *= 2.0
    else:
        raise ValueError(f"no bracket found for critical stock at H={H}")
    if (f(lo) > 0) == call:
        # every state above lo already exceeds the threshold
        return lo if abs(f(lo)) <= tol else 0.0

    at_k = float(_unit_value(inner_option, env, K, u))
    s = K * H / at_k if at_k > 0 else 0.5 * (lo + hi)
    if not lo < s < hi:
        s = 0.5 * (lo + hi)
    width = hi - lo
    for _ in range(max_iter):
        fs = f(s)
        if abs(fs) <= tol:
            return s
        # keep f(lo) and f(hi) on the appropriate sides of the root
        if (fs > 0) == call:
            hi = s
        else:
            lo = s
        if hi - lo <= 4e-16 * hi:
            return s
        d = fprime(s)
        step = s - fs / d if d != 0.0 else math.nan
        # bisect when Newton leaves the bracket or stalls (bracket not halved)
        slow = hi - lo > 0.5 * width
        width = hi - lo
        s = step if lo < step < hi and not slow else 0.5 * (lo + hi)
    raise ValueError(f"critical stock did not converge (H={H}, residual {fs:.3e})")


def _gap_option(option: EquityOptionSpec, env: MarketEnvironment, H: float, X: float) -> float:
    """Compound value as u -> T: pays (payoff - H + X) when the payoff exceeds H."""
    S0, K, T, sigma = option.spot, option.strike, option.maturity, env.volatility
    P_T = env.df(T)
    fwd = S0 * math.exp(-env.dividend_yield * T)
    vol = sigma * math.sqrt(T)
    if option.side == "call":
        trigger = K + H
        d1 = (math.log(fwd / (trigger * P_T)) + 0.5 * vol * vol) / vol
        return fwd * norm_cdf(d1) - (trigger - X) * P_T * norm_cdf(d1 - vol)
    trigger = K - H
    if trigger <= 0.0:
        return 0.0
    d1 = (math.log(fwd / (trigger * P_T)) + 0.5 * vol * vol) / vol
    return (trigger + X) * P_T * norm_cdf(-(d1 - vol)) - fwd * norm_cdf(-d1)


def unit_compound_value(option: EquityOptionSpec, env: MarketEnvironment, u: float, H: float, X: float) -> float:
    """E[(V(u) - H + X) 1{V(u) > H}] discounted to 0, for one unit of a vanilla option.

    Accepts the closed interval ``0 <= u <= T`` (the end points are the
    deterministic and the gap-option limits).
    """
    S0, K, T, sigma = option.spot, option.strike, option.maturity, env.volatility
    if u <= 0.0:
        v = float(_unit_value(option, env, S0, 0.0))
        return v - H + X if v > H else 0.0
    if u >= T:
        return _gap_option(option, env, H, X)
    P_u, P_T = env.df(u), env.df(T)
    q = env.dividend_yield
    call = option.side == "call"
    if H <= 0.0:
        return float(_unit_value(option, env, S0, 0.0)) - (H - X) * P_u
    if not call and H >= K * P_T / P_u:
        return 0.0
    s_star = critical_stock(option, env, u, H)
    rho = math.sqrt(u / T)
    fwd_u = S0 * math.exp(-q * u) / P_u
    su, sT = sigma * math.sqrt(u), sigma * math.sqrt(T)
    a_minus = (math.log(fwd_u / s_star) - 0.5 * su * su) / su if s_star > 0 else math.inf
    a_plus = a_minus + su
    b_plus = (math.log(S0 * math.exp(-q * T) / (K * P_T)) + 0.5 * sT * sT) / sT
    b_minus = b_plus - sT
    asset = S0 * math.exp(-q * T)
    if call:
        return (asset * bivariate_normal_cdf(a_plus, b_plus, rho)
                - K * P_T * bivariate_normal_cdf(a_minus, b_minus, rho)
                - (H - X) * P_u * float(norm_cdf(a_minus)))
    return (K * P_T * bivariate_normal_cdf(-a_minus, -b_minus, rho)
            - asset * bivariate_normal_cdf(-a_plus, -b_plus, rho)
            - (H - X) * P_u * float(norm_cdf(-a_minus)))


def _cc(option: EquityOptionSpec, env: MarketEnvironment, u: float, H: float, X: float) -> float:
    n = option.position
    if n < 0:
        return 0.0
    return n * unit_compound_value(option, env, u, H / n, X / n)


def _cp(option: EquityOptionSpec, env: MarketEnvironment, u: float, H: float, X: float) -> float:
    n = option.position
    if n > 0:
        return 0.0
    return n * unit_compound_value(option, env, u, H / -n, X / -n)


def compound_call_plus_digital(query: CompoundQuery, env: MarketEnvironment) -> float:
    """CC(S0, u, H, X) = E[(V_e(u) - H + X) 1{V_e(u) > H}], discounted to time 0."""
    return _cc(query.inner_option, env, query.default_time, query.threshold, query.min_transfer)


def compound_put_plus_digital(query: CompoundQuery, env: MarketEnvironment) -> float:
    """CP(S0, u, H, X) = -E[(-V_e(u) - H + X) 1{-V_e(u) >= H}]; non-positive."""
    return _cp(query.inner_option, env, query.default_time, query.threshold, query.min_transfer)


def compound_mc(query: CompoundQuery, env: MarketEnvironment, n_paths: int = 1_000_000,
                seed: int = 0, liability: bool = False) -> tuple[float, float]:
    """Brute-force CC (or CP with ``liability``) from exact samples of S_u; returns (value, std error)."""
    opt = query.inner_option
    u, H, X = query.default_time, query.threshold, query.min_transfer
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n_paths)
    P_u = env.df(u)
    sigma = env.volatility
    s_u = opt.spot * math.exp(-env.dividend_yield * u) / P_u * np.exp(-0.5 * sigma * sigma * u + sigma * math.sqrt(u) * z)
    v = value_surface(opt, env, s_u, u)[0]
    if liability:
        w = -v
        payoff = -np.where(w >= H, w - H + X, 0.0)
    else:
        payoff = np.where(v > H, v - H + X, 0.0)
    payoff = payoff * P_u
    return float(payoff.mean()), float(payoff.std(ddof=1) / math.sqrt(n_paths))


__all__ = [
    "CompoundQuery", "bs_value", "bs_spot_delta", "value_surface", "black_scholes_price", "bs_delta",
    "repo_adjusted_value", "critical_stock", "unit_compound_value", "compound_call_plus_digital",
    "compound_put_plus_digital", "compound_mc", "norm_pdf",
]
