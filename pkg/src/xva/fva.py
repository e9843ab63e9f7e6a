"""Funding adjustments: repo cost of the delta hedge (FVA_S) and the margining
costs of both parties (FVA_B, FVA_C), plus the implicit premium equation.

FVA_B and FVA_C depend on the premium V_0 through the initial margin balances,
so the fair value solves V_0 - FVA_B(V_0) - FVA_C(V_0) = V_e + CVA_B + CVA_C + FVA_S.
Monte Carlo paths are generated in fixed blocks, each seeded from (seed, block),
so results do not depend on the number of worker threads.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytic import black_scholes_price, bs_delta, value_surface
from .collateral import CollateralTerms, collateral_value, proportional_collateral
from .credit import PartyCredit, survival_integral, survival_probability
from .cva import cva_equity
from .market_data import MarketEnvironment
from .trades import EquityOptionSpec

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class FvaConfig:
    """Monte Carlo settings for FVA_B / FVA_C.

    hedge_pnl: ``replicating`` books the hedge gain over a step as the change in
        the risk-free value (the continuous-hedging limit); ``euler`` uses the
        start-of-step delta times the discounted spot move.
    margin_model: ``evolve`` integrates the margin balances; ``identity`` sets the
        seller's balance to the risk-free value along the path.
    revision_dates: collateral is reset only on these dates (None: every step).
    """

    n_paths: int = 100_000
    dt: float = 1.0 / 52.0
    seed: int = 42
    block_size: int = 8192
    hedge_pnl: str = "replicating"
    margin_model: str = "evolve"
    revision_dates: tuple[float, ...] | None = None
    workers: int | None = None

    def __post_init__(self):
        if self.hedge_pnl not in ("replicating", "euler"):
            raise ValueError(f"hedge_pnl must be 'replicating' or 'euler', got {self.hedge_pnl!r}")
        if self.margin_model not in ("evolve", "identity"):
            raise ValueError(f"margin_model must be 'evolve' or 'identity', got {self.margin_model!r}")
        if self.n_paths < 2 or self.block_size < 1:
            raise ValueError("need n_paths >= 2 and block_size >= 1")


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-8  # residual tolerance, as a fraction of the spot
    max_iter: int = 100


@dataclass
class MarketPath:
    """Undiscounted risk-free quantities on the time grid; arrays are (steps + 1, paths)."""

    times: np.ndarray
    spot: np.ndarray
    value: np.ndarray
    delta: np.ndarray
    collateral: np.ndarray


@dataclass
class MarginState:
    """Discounted margin balances and survival-weighted funding costs per path.

    ``accrued_cost_B`` / ``accrued_cost_C`` are the running sums of
    P(tau > u) x_i [.]^- du, i.e. non-positive.
    """

    beta_B: np.ndarray
    beta_C: np.ndarray
    accrued_cost_B: np.ndarray
    accrued_cost_C: np.ndarray

    @property
    def fva_B(self) -> np.ndarray:
        return -self.accrued_cost_B[-1]

    @property
    def fva_C(self) -> np.ndarray:
        return self.accrued_cost_C[-1]


@dataclass
class ValuationReport:
    V_e: float
    CVA_B: float
    CVA_C: float
    FVA_S: float
    FVA_B: float
    FVA_C: float
    V_0: float
    solver_iterations: int = 0
    residual: float = 0.0
    mc_standard_errors: dict = field(default_factory=dict)
    quadrature_error: float = 0.0

    def __post_init__(self):
        for name in ("V_e", "CVA_B", "CVA_C", "FVA_S", "FVA_B", "FVA_C", "V_0", "residual", "quadrature_error"):
            setattr(self, name, float(getattr(self, name)))
        self.mc_standard_errors = {k: float(v) for k, v in self.mc_standard_errors.items()}

    @property
    def identity_gap(self) -> float:
        """V_0 minus the sum of its components; equals the solver residual."""
        return self.V_0 - (self.V_e + self.CVA_B + self.CVA_C + self.FVA_S + self.FVA_B + self.FVA_C)

    def row(self) -> list[float]:
        return [self.V_e, self.CVA_B, self.CVA_C, self.FVA_S, self.FVA_B, self.FVA_C, self.V_0]


def fva_s(spec: EquityOptionSpec, env: MarketEnvironment, credit_B: PartyCredit, credit_C: PartyCredit) -> float:
    """Repo cost of the delta hedge with the risk-free delta.

    The discounted delta position is a martingale, so only the expected
    survival time up to maturity remains to be integrated.
    """
    if env.repo_spread == 0.0:
        return 0.0
    return float(env.repo_spread * survival_integral(credit_B, credit_C, spec.maturity) * spec.spot * bs_delta(spec, env))


# ---------------------------------------------------------------------------
# paths and margin accounts


def time_grid(T: float, dt: float) -> np.ndarray:
    n_float = T / dt
    n = int(round(n_float))
    if n < 1 or abs(n_float - n) > 1e-9 * max(1.0, n_float):
        raise ValueError(f"dt={dt} does not divide the maturity {T}")
    return np.linspace(0.0, T, n + 1)


def funding_collateral(value: np.ndarray, t: float, terms: CollateralTerms,
                       credit_B: PartyCredit, credit_C: PartyCredit) -> np.ndarray:
    """Collateral behind the margin brackets: CSA rule, or recovered exposure without a CSA."""
    if terms.collateralized:
        return collateral_value(value, terms, t)
    return proportional_collateral(value, credit_B.recovery, credit_C.recovery)


def simulate_path(spec: EquityOptionSpec, env: MarketEnvironment, terms: CollateralTerms,
                  credit_B: PartyCredit, credit_C: PartyCredit, times: np.ndarray,
                  rng: np.random.Generator, n_paths: int,
                  revision_dates: tuple[float, ...] | None = None) -> MarketPath:
    """Exact lognormal spot paths with the risk-free value surface evaluated on each node."""
    if terms.mtm_convention != "risk_free":
        raise ValueError("margin simulation uses the risk-free MTM convention")
    sigma, q = env.volatility, env.dividend_yield
    dts = np.diff(times)
    dfs = np.asarray(env.df(times), dtype=float)
    z = rng.standard_normal((len(dts), n_paths))
    log_growth = np.log(dfs[:-1] / dfs[1:]) - q * dts
    steps = (log_growth - 0.5 * sigma * sigma * dts)[:, None] + sigma * np.sqrt(dts)[:, None] * z
    spot = spec.spot * np.exp(np.vstack((np.zeros((1, n_paths)), np.cumsum(steps, axis=0))))
    value = np.empty_like(spot)
    delta = np.empty_like(spot)
    coll = np.empty_like(spot)
    for k, t in enumerate(times):
        value[k], delta[k] = value_surface(spec, env, spot[k], float(t))
        coll[k] = funding_collateral(value[k], float(t), terms, credit_B, credit_C)
    if revision_dates is not None:
        # hold collateral between revisions
        rev = np.searchsorted(times, np.asarray(revision_dates) - 1e-12)
        rev = np.unique(np.concatenate(([0], rev[rev < len(times)])))
        last = rev[np.searchsorted(rev, np.arange(len(times)), side="right") - 1]
        coll = coll[last]
    return MarketPath(times, spot, value, delta, coll)


@dataclass
class _Prepared:
    increments: np.ndarray  # (steps, paths) discounted hedge P&L plus repo cost
    c_hat: np.ndarray  # (steps, paths) discounted collateral at step start
    v_hat: np.ndarray  # (steps, paths) discounted risk-free value at step start
    dt: np.ndarray  # (steps,)
    survival: np.ndarray  # (steps,) P(tau > t) at step start
    x_B: np.ndarray  # (steps,)
    x_C: np.ndarray  # (steps,)


def _prepare(path: MarketPath, env: MarketEnvironment, credit_B: PartyCredit, credit_C: PartyCredit,
             hedge_pnl: str = "replicating") -> _Prepared:
    times = path.times
    dts = np.diff(times)
    dfs = np.asarray(env.df(times), dtype=float)
    shape = (-1,) + (1,) * (path.spot.ndim - 1)
    disc = dfs.reshape(shape)
    v_hat = path.value * disc
    if hedge_pnl == "replicating":
        hedge = np.diff(v_hat, axis=0)
    else:
        growth = np.exp(env.dividend_yield * times).reshape(shape)
        s_hat = path.spot * growth * disc
        alpha = path.delta / growth  # dV_hat / dS_hat
        hedge = alpha[:-1] * np.diff(s_hat, axis=0)
    # alpha * S_hat = S * delta * P(0, t)
    repo = -env.repo_spread * (path.spot[:-1] * path.delta[:-1] * disc[:-1]) * dts.reshape(shape)
    surv = np.asarray(survival_probability(credit_B, credit_C, times[:-1]), dtype=float)
    lam_m = env.market_funding_spread
    x_B = np.array([credit_B.spread_at(t, lam_m) for t in times[:-1]])
    x_C = np.array([credit_C.spread_at(t, lam_m) for t in times[:-1]])
    return _Prepared(hedge + repo, (path.collateral * disc)[:-1], v_hat[:-1], dts, surv, x_B, x_C)


def _evolve(prep: _Prepared, V_0: float, margin_model: str = "evolve", keep: bool = False):
    """Explicit Euler scheme for both margin balances; brackets are read at the step start."""
    n_steps = prep.increments.shape[0]
    tail = prep.increments.shape[1:]
    beta_B = np.full(tail, max(V_0, 0.0))
    beta_C = np.full(tail, -min(V_0, 0.0))
    cost_B = np.zeros(tail)
    cost_C = np.zeros(tail)
    if keep:
        traj = [np.empty((n_steps + 1,) + tail) for _ in range(4)]
        for arr, cur in zip(traj, (beta_B, beta_C, cost_B, cost_C)):
            arr[0] = cur
    for k in range(n_steps):
        if margin_model == "identity" and k:
            beta_B = prep.v_hat[k]
        step_B = prep.x_B[k] * np.minimum(beta_B - prep.c_hat[k], 0.0) * prep.dt[k]
        step_C = prep.x_C[k] * np.minimum(beta_C + prep.c_hat[k], 0.0) * prep.dt[k]
        cost_B = cost_B + prep.survival[k] * step_B
        cost_C = cost_C + prep.survival[k] * step_C
        beta_B = beta_B + prep.increments[k] + step_B
        beta_C = beta_C + step_C
        if keep:
            for arr, cur in zip(traj, (beta_B, beta_C, cost_B, cost_C)):
                arr[k + 1] = cur
    if keep:
        return MarginState(*traj)
    return cost_B, cost_C


def evolve_margins(path: MarketPath, env: MarketEnvironment, credit_B: PartyCredit, credit_C: PartyCredit,
                   V_0: float, hedge_pnl: str = "replicating", margin_model: str = "evolve") -> MarginState:
    """Margin balance trajectories of seller and buyer along ``path``, starting from premium ``V_0``.

    The seller's balance carries the hedge P&L, the repo cost of the hedge and
    its own funding cost on [beta_B - c]^-; the buyer's balance only accrues
    funding cost on [beta_C + c]^-.
    """
    prep = _prepare(path, env, credit_B, credit_C, hedge_pnl)
    return _evolve(prep, V_0, margin_model, keep=True)


def _workers(requested: int | None) -> int:
    if requested is not None:
        return max(1, requested)
    env_cap = os.environ.get("XVA_THREADS")
    if env_cap:
        return max(1, int(env_cap))
    return min(8, os.cpu_count() or 1)


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


class FundingSimulation:
    """FVA_B(V_0) and FVA_C(V_0) on a fixed set of paths (common random numbers).

    With ``cache`` the prepared blocks are kept, so repeated evaluations for
    different premiums reuse identical paths.
    """

    def __init__(self, spec: EquityOptionSpec, env: MarketEnvironment, credit_B: PartyCredit,
                 credit_C: PartyCredit, terms: CollateralTerms, config: FvaConfig = FvaConfig(),
                 cache: bool = True):
        self.spec, self.env = spec, env
        self.credit_B, self.credit_C = credit_B, credit_C
        self.terms, self.config = terms, config
        self.times = time_grid(spec.maturity, config.dt)
        sizes = [config.block_size] * (config.n_paths // config.block_size)
        if config.n_paths % config.block_size:
            sizes.append(config.n_paths % config.block_size)
        self.block_sizes = sizes
        self.cache = cache
        self._blocks: list[_Prepared] | None = None
        lam_m = env.market_funding_spread
        self.spreads_zero = all(
            c.spread_at(t, lam_m) == 0.0 for c in (credit_B, credit_C) for t in self.times[:-1]
        )

    def _build(self, block: int) -> _Prepared:
        rng = _block_rng(self.config.seed, block)
        path = simulate_path(self.spec, self.env, self.terms, self.credit_B, self.credit_C, self.times,
                             rng, self.block_sizes[block], self.config.revision_dates)
        return _prepare(path, self.env, self.credit_B, self.credit_C, self.config.hedge_pnl)

    def _block_sums(self, block: int, V_0: float, prepared: _Prepared | None = None) -> np.ndarray:
        prep = prepared if prepared is not None else self._build(block)
        cost_B, cost_C = _evolve(prep, V_0, self.config.margin_model)
        fb, fc = -cost_B, cost_C
        return np.array([fb.sum(), fc.sum(), (fb * fb).sum(), (fc * fc).sum()])

    def evaluate(self, V_0: float) -> tuple[float, float, float, float]:
        """(FVA_B, FVA_C, standard error of FVA_B, standard error of FVA_C)."""
        if self.spreads_zero:
            return 0.0, 0.0, 0.0, 0.0
        n_blocks = len(self.block_sizes)
        workers = min(_workers(self.config.workers), n_blocks)
        if self.cache and self._blocks is None:
            with ThreadPoolExecutor(workers) as pool:
                self._blocks = list(pool.map(self._build, range(n_blocks)))
        blocks = self._blocks if self.cache else [None] * n_blocks
        with ThreadPoolExecutor(workers) as pool:
            sums = list(pool.map(lambda b: self._block_sums(b, V_0, blocks[b]), range(n_blocks)))
        # fixed block order keeps the reduction independent of scheduling
        total = np.sum(np.vstack(sums), axis=0)
        n = float(self.config.n_paths)
        mean_B, mean_C = total[0] / n, total[1] / n
        var_B = max(total[2] / n - mean_B * mean_B, 0.0) * n / (n - 1.0)
        var_C = max(total[3] / n - mean_C * mean_C, 0.0) * n / (n - 1.0)
        return float(mean_B) + 0.0, float(mean_C) + 0.0, math.sqrt(var_B / n), math.sqrt(var_C / n)


def fva_bc(spec: EquityOptionSpec, env: MarketEnvironment, credit_B: PartyCredit, credit_C: PartyCredit,
           terms: CollateralTerms, V_0: float, n_paths: int = 100_000, dt: float = 1.0 / 52.0,
           seed: int = 42, **options) -> tuple[float, float, float, float]:
    """Monte Carlo FVA_B and FVA_C for a given premium; returns (FVA_B, FVA_C, se_B, se_C)."""
    config = FvaConfig(n_paths=n_paths, dt=dt, seed=seed, **options)
    return FundingSimulation(spec, env, credit_B, credit_C, terms, config, cache=False).evaluate(V_0)


def solve_premium(spec: EquityOptionSpec, env: MarketEnvironment, credit_B: PartyCredit, credit_C: PartyCredit,
                  terms: CollateralTerms = CollateralTerms(), fva_config: FvaConfig = FvaConfig(),
                  solver: SolverConfig = SolverConfig()) -> ValuationReport:
    """Fair premium V_0 under default and funding risk, with its decomposition.

    Root of V_0 - FVA_B(V_0) - FVA_C(V_0) = V_e + CVA_B + CVA_C + FVA_S, an
    increasing function of V_0. Fixed-point steps are used while they stay
    inside the bisection bracket; otherwise the bracket is halved.
    """
    V_e = black_scholes_price(spec, env)
    cva = cva_equity(spec, env, credit_B, credit_C, terms)
    f_s = fva_s(spec, env, credit_B, credit_C)
    rhs = V_e + cva.cva_B + cva.cva_C + f_s
    sim = FundingSimulation(spec, env, credit_B, credit_C, terms, fva_config, cache=True)
    tol = solver.tol * spec.spot
    cache: dict[float, tuple] = {}

    def g(v):
        if v not in cache:
            cache[v] = sim.evaluate(v)
        fb, fc = cache[v][:2]
        return v - fb - fc - rhs

    def report(v, iterations):
        fb, fc, se_b, se_c = cache[v]
        return ValuationReport(V_e, cva.cva_B, cva.cva_C, f_s, fb, fc, v, iterations, g(v),
                               {"FVA_B": se_b, "FVA_C": se_c}, cva.quadrature_error_estimate)

    v = rhs
    res = g(v)
    iterations = 1
    if abs(res) <= tol:
        return report(v, iterations)

    lo, hi = V_e - spec.spot, V_e + spec.spot
    g_lo, g_hi = g(lo), g(hi)
    if not (g_lo <= 0.0 <= g_hi):
        lo, hi = V_e - 2.0 * spec.spot, V_e + 2.0 * spec.spot
        g_lo, g_hi = g(lo), g(hi)
        if not (g_lo <= 0.0 <= g_hi):
            raise SolverError(f"premium equation not bracketed: g({lo:.4g})={g_lo:.3e}, g({hi:.4g})={g_hi:.3e}")
    if lo < v < hi:
        lo, hi = (v, hi) if res < 0 else (lo, v)
    while iterations < solver.max_iter:
        candidate = v - res  # fixed-point step: rhs + FVA_B(v) + FVA_C(v)
        v = candidate if lo < candidate < hi else 0.5 * (lo + hi)
        res = g(v)
        iterations += 1
        log.debug("premium iteration %d: V_0=%.12g residual=%.3e", iterations, v, res)
        if abs(res) <= tol:
            return report(v, iterations)
        if res < 0:
            lo = v
        else:
            hi = v
        if hi - lo <= 1e-15 * max(1.0, abs(v)):
            break
    raise SolverError(f"premium solver stopped after {iterations} iterations, residual {res:.3e}")
