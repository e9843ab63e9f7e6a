"""Bilateral credit and funding valuation adjustments for equity options and swaps."""

from .analytic import (CompoundQuery, black_scholes_price, bs_delta, compound_call_plus_digital,
                       compound_mc, compound_put_plus_digital, critical_stock, repo_adjusted_value,
                       unit_compound_value, value_surface)
from .collateral import CollateralTerms, StepSchedule, collateral_value, default_payment, proportional_collateral
from .credit import (PartyCredit, default_in_interval_prob, first_default_density, first_default_prob,
                     survival_probability)
from .cva import CvaResult, QuadratureError, cva_closed_form, cva_equity
from .fva import (FundingSimulation, FvaConfig, MarginState, SolverConfig, SolverError, ValuationReport,
                  evolve_margins, fva_bc, fva_s, simulate_path, solve_premium)
from .lattice import PdeGrid, build_tree, solve_predefault_pde, tree_price_and_delta
from .market_data import (ConfigError, DiscountCurve, ForwardCurve, MarketEnvironment, discount_factor,
                          load_curve, load_market_config, write_curve)
from .normal import bivariate_normal_cdf
from .swap import (SwaptionVol, adjusted_swap_rate, annuity, black_swaption, forward_swap_rate,
                   swap_dva_cva, swap_value)
from .trades import EquityOptionSpec, SwapSpec

__version__ = "0.1.0"
