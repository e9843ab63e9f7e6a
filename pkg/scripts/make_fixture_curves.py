"""Write the synthetic OIS / 6M-forward fixture used for the ten-year swap example.

Flat 1.2% continuously compounded OIS curve; the forward curve rises from the
short end like 1 - exp(-T / 4) and is shifted so that the ten-year
semi-annual par swap rate is exactly 1.45%.
"""

from __future__ import annotations

import math
from pathlib import Path

from scipy.optimize import brentq

from xva.market_data import DiscountCurve, ForwardCurve, write_curve
from xva.swap import forward_swap_rate

OIS_RATE = 0.012
TARGET = 0.0145
SLOPE = 0.012
OUT = Path(__file__).resolve().parents[1] / "src" / "xva" / "data"


def build():
    tenors = [0.5 * i for i in range(1, 61)]
    discount = DiscountCurve(tuple(tenors), tuple(math.exp(-OIS_RATE * t) for t in tenors))
    starts = [0.5 * i for i in range(60)]
    shape = [1.0 - math.exp(-s / 4.0) for s in starts]
    grid = [0.5 * i for i in range(21)]

    def curve(shift):
        return ForwardCurve(tuple(starts), tuple(s + 0.5 for s in starts), tuple(shift + SLOPE * x for x in shape))

    shift = brentq(lambda a: forward_swap_rate(discount, curve(a), grid, 0, 20) - TARGET, -0.05, 0.05, xtol=1e-16)
    return discount, curve(shift)


if __name__ == "__main__":
    discount, forwards = build()
    OUT.mkdir(parents=True, exist_ok=True)
    write_curve(discount, OUT / "ois_synthetic.csv")
    write_curve(forwards, OUT / "euribor6m_synthetic.csv")
    print("s_0,20 =", forward_swap_rate(discount, forwards, [0.5 * i for i in range(21)], 0, 20))
