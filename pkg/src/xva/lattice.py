"""CRR binomial tree with per-node delta, and a Crank-Nicolson solver for the
pre-default value of an asset-only derivative with repo cost and proportional recovery."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .analytic import value_surface
from .collateral import CollateralTerms, collateral_value
from .credit import PartyCredit, survival_probability
from .market_data import MarketEnvironment
from .trades import EquityOptionSpec


@dataclass(frozen=True)
class BinomialTree:
    dt: float
    up: float
    down: float
    prob_up: float
    growth: float  # one-step risk-neutral forward factor exp((r - q) dt)
    disc: float  # one-step discount factor
    levels: tuple[np.ndarray, ...]

    @property
    def steps(self) -> int:
        return len(self.levels) - 1


@dataclass
class NodeField:
    """Per-level node arrays from the backward induction.

    ``deltas[i]`` and ``repo_accrual[i]`` exist for levels ``0..N-1`` only.
    ``repo_accrual`` holds the discounted, survival-weighted
    lambda_S * S * delta * dt earned at the node.
    """

    spots: tuple[np.ndarray, ...]
    values: list[np.ndarray]
    deltas: list[np.ndarray]
    collateral: list[np.ndarray] | None = None
    repo_accrual: list[np.ndarray] | None = None
    repo_cost: float = 0.0

    @property
    def root_value(self) -> float:
        return float(self.values[0][0])

    @property
    def root_delta(self) -> float:
        return float(self.deltas[0][0])


def build_tree(env: MarketEnvironment, spec: EquityOptionSpec, dt: float) -> BinomialTree:
    if not dt > 0:
        raise ValueError("dt must be > 0")
    n_float = spec.maturity / dt
    n = int(round(n_float))
    if n < 1 or abs(n_float - n) > 1e-6 * max(1.0, n_float):
        raise ValueError(f"maturity {spec.maturity} is not a whole number of steps of {dt}")
    dt = spec.maturity / n
    r = env.zero_rate(spec.maturity)
    up = math.exp(env.volatility * math.sqrt(dt))
    down = 1.0 / up
    growth = math.exp((r - env.dividend_yield) * dt)
    p = (growth - down) / (up - down)
    if not 0.0 < p < 1.0:
        raise ValueError(f"risk-neutral probability {p:.4f} outside (0, 1); use a smaller dt")
    j = np.arange(n + 1)
    levels = tuple(spec.spot * up ** (2.0 * j[: i + 1] - i) for i in range(n + 1))
    return BinomialTree(dt, up, down, p, growth, math.exp(-r * dt), levels)


def tree_price_and_delta(tree: BinomialTree, spec: EquityOptionSpec, env: MarketEnvironment,
                         terms: CollateralTerms | None = None,
                         credit: tuple[PartyCredit, PartyCredit] | None = None,
                         smooth: bool = True) -> NodeField:
    """Risk-free backward induction; optional node collateral and repo-cost accruals.

    With ``smooth`` the last step is priced in closed form (Black-Scholes over
    one step) instead of rolled back from the kinked payoff, which removes the
    odd/even oscillation of plain CRR. Terminal nodes keep the exact payoff.
    """
    p, disc = tree.prob_up, tree.disc
    n = tree.steps
    values: list[np.ndarray] = [None] * (n + 1)  # type: ignore[list-item]
    deltas: list[np.ndarray] = [None] * n  # type: ignore[list-item]
    values[n] = spec.payoff(tree.levels[n])
    for i in range(n - 1, -1, -1):
        nxt = values[i + 1]
        if smooth and i == n - 1:
            values[i] = value_surface(spec, env, tree.levels[i], spec.maturity - tree.dt)[0]
        else:
            values[i] = disc * (p * nxt[1:] + (1.0 - p) * nxt[:-1])
        s_next = tree.levels[i + 1]
        deltas[i] = (nxt[1:] - nxt[:-1]) / (s_next[1:] - s_next[:-1])
    field = NodeField(tree.levels, values, deltas)
    if terms is not None:
        field.collateral = [collateral_value(v, terms, i * tree.dt) for i, v in enumerate(values)]
    if credit is not None and env.repo_spread:
        # discounted lambda_S * S * delta * dt per node, survival weighted; its
        # expectation is rolled back through the tree without further discounting
        accrual = [
            env.repo_spread * tree.dt * float(survival_probability(*credit, i * tree.dt)) * tree.disc ** i
            * tree.levels[i] * deltas[i]
            for i in range(n)
        ]
        rolled = accrual[n - 1]
        for i in range(n - 2, -1, -1):
            rolled = accrual[i] + p * rolled[1:] + (1.0 - p) * rolled[:-1]
        field.repo_accrual = accrual
        field.repo_cost = float(rolled[0])
    return field


@dataclass(frozen=True)
class PdeGrid:
    space_points: int = 400
    time_steps: int = 250
    width_sd: float = 6.0
    rannacher_steps: int = 4
    max_courant: float = 50.0


def solve_predefault_pde(spec: EquityOptionSpec, env: MarketEnvironment, credit_B: PartyCredit,
                         grid: PdeGrid = PdeGrid()) -> float:
    """Pre-default value at 0 of an asset-only payoff with repo cost and proportional recovery.

    Solves, in discounted units and x = ln S_hat,
        V_t + 1/2 sigma^2 V_xx + (lambda_S - 1/2 sigma^2) V_x - lambda_B(t) L_B V = 0
    backward from the discounted payoff, with Crank-Nicolson steps after
    ``rannacher_steps`` implicit half steps. Boundaries carry the discounted
    payoff of the drifted forward, exact where the payoff is affine.
    """
    if spec.position < 0:
        raise ValueError("pre-default solver covers asset-only trades (position > 0)")
    sigma, lam_s = env.volatility, env.repo_spread
    T, n_x = spec.maturity, grid.space_points
    P_T = env.df(T)
    q = env.dividend_yield
    loss = credit_B.loss_rate

    half_width = grid.width_sd * sigma * math.sqrt(T)
    dx = 2.0 * half_width / (n_x - 1)
    x0 = math.log(spec.spot)
    centre = n_x // 2
    x = x0 + (np.arange(n_x) - centre) * dx

    n_t = grid.time_steps
    courant = 0.5 * sigma * sigma * (T / n_t) / (dx * dx)
    if courant > grid.max_courant:
        n_t = int(math.ceil(0.5 * sigma * sigma * T / (dx * dx) / grid.max_courant))
        warnings.warn(f"Courant number {courant:.1f} above {grid.max_courant}; re-gridding to {n_t} time steps",
                      RuntimeWarning, stacklevel=2)
    dt = T / n_t

    def discounted_payoff(s_hat):
        # S_T = S_hat_T * exp(-q T) / P(0, T); value discounted by P(0, T)
        return P_T * spec.payoff(s_hat * math.exp(-q * T) / P_T)

    def boundary(t):
        tau = T - t
        kill = math.exp(-loss * (credit_B.integrated_intensity(T) - credit_B.integrated_intensity(t)))
        ends = np.exp(x[[0, -1]] + lam_s * tau)
        return kill * discounted_payoff(ends)

    a = 0.5 * sigma * sigma / (dx * dx)
    b = (lam_s - 0.5 * sigma * sigma) / (2.0 * dx)
    lower, upper = a - b, a + b  # coefficients of V[i-1], V[i+1]

    def operator_diag(t):
        return -2.0 * a - credit_B.intensity_at(t) * loss

    # Rannacher start-up: the first CN steps become pairs of implicit half steps
    r_steps = min(grid.rannacher_steps, n_t)
    schedule = [(dt / 2.0, 1.0)] * (2 * r_steps) + [(dt, 0.5)] * (n_t - r_steps)
    m = n_x - 2
    v = discounted_payoff(np.exp(x))
    t = T
    for h, theta in schedule:
        t_new = max(t - h, 0.0)
        diag = operator_diag(0.5 * (t + t_new))
        inner = v[1:-1]
        rhs = inner + (1.0 - theta) * h * (lower * v[:-2] + diag * inner + upper * v[2:])
        bnd = boundary(t_new)
        rhs[0] += theta * h * lower * bnd[0]
        rhs[-1] += theta * h * upper * bnd[1]
        ab = np.empty((3, m))
        ab[0, 1:] = -theta * h * upper
        ab[1, :] = 1.0 - theta * h * diag
        ab[2, :-1] = -theta * h * lower
        v = np.concatenate(([bnd[0]], solve_banded((1, 1), ab, rhs), [bnd[1]]))
        t = t_new
    return float(v[centre])
