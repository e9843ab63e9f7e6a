"""Plain vs smoothed CRR error for the one-year ATM call, with the observed order in dt."""

from __future__ import annotations

import argparse
import math

from xva.analytic import black_scholes_price
from xva.lattice import build_tree, tree_price_and_delta
from xva.market_data import MarketEnvironment
from xva.trades import EquityOptionSpec


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, nargs="+", default=[13, 26, 52, 104, 208, 416, 1040])
    args = parser.parse_args()
    env = MarketEnvironment(volatility=0.2, risk_free_rate=0.03)
    spec = EquityOptionSpec(100, 100, 1)
    bs = black_scholes_price(spec, env)
    print(f"Black-Scholes {bs:.6f}")
    print(f"{'steps':>6} {'plain':>11} {'smoothed':>11} {'order':>6}")
    prev = None
    for n in args.steps:
        tree = build_tree(env, spec, 1.0 / n)
        plain = tree_price_and_delta(tree, spec, env, smooth=False).root_value - bs
        smooth = tree_price_and_delta(tree, spec, env).root_value - bs
        order = ""
        if prev is not None:
            order = f"{math.log(abs(prev[1] / smooth)) / math.log(n / prev[0]):6.2f}"
        print(f"{n:6d} {plain:+11.6f} {smooth:+11.6f} {order:>6}")
        prev = (n, smooth)


if __name__ == "__main__":
    main()
