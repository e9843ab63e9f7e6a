import math

import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from xva.analytic import black_scholes_price, unit_compound_value
from xva.collateral import CollateralTerms
from xva.credit import PartyCredit, first_default_density
from xva.cva import adaptive_simpson, cva_closed_form, cva_equity, funding_spread
from xva.market_data import MarketEnvironment
from xva.trades import EquityOptionSpec

from conftest import credit_pair

BS = 9.413403383853023


def test_defaultless_seller(env, call):
    res = cva_equity(call, env, *credit_pair(0.0, 0.015))
    assert res.cva_B == 0.0 and res.cva_C == 0.0


def test_long_call_has_no_buyer_cva(env, call):
    res = cva_equity(call, env, *credit_pair(0.02, 0.015), CollateralTerms(4.0, 2.0))
    assert res.cva_C == 0.0
    assert res.cva_B < 0.0


def test_quadrature_matches_closed_form(env, call):
    B, C = credit_pair(0.02, 0.015)
    quad_res = cva_equity(call, env, B, C)
    closed = cva_closed_form(BS, 0.0, B, C, 1.0)
    assert quad_res.cva_B == pytest.approx(closed.cva_B, rel=1e-6)
    assert closed.cva_B == pytest.approx(-0.1110, abs=5e-5)
    assert quad_res.quadrature_error_estimate < 1e-6


def test_short_call_closed_form(env, short_call):
    B, C = credit_pair(0.02, 0.015)
    res = cva_equity(short_call, env, B, C)
    closed = cva_closed_form(0.0, -BS, B, C, 1.0)
    assert res.cva_B == 0.0
    assert res.cva_C == pytest.approx(closed.cva_C, rel=1e-6) and res.cva_C > 0


def test_closed_form_limits():
    B, C = credit_pair(0.0, 0.015)
    uni = cva_closed_form(0.0, -5.0, B, C, 2.0)
    assert uni.cva_C == pytest.approx(-(1 - math.exp(-0.03)) * 0.6 * -5.0, rel=1e-14)
    assert cva_closed_form(5.0, 0.0, PartyCredit(0.02, 1.0), C, 1.0).cva_B == 0.0
    zero = cva_closed_form(5.0, -5.0, PartyCredit(0.0), PartyCredit(0.0), 1.0)
    assert zero.cva_B == 0.0 and zero.cva_C == 0.0
    assert abs(cva_closed_form(0.0, -5.0, B, PartyCredit(1e-12, 0.4), 1.0).cva_C) < 1e-11


def test_piecewise_intensity_against_scipy(env, call):
    B = PartyCredit((0.01, 0.04), 0.4, knots=(0.4,))
    C = PartyCredit(0.015, 0.4)
    res = cva_equity(call, env, B, C)
    ref = quad(lambda u: first_default_density("B", B, C, u) * 0.6 * unit_compound_value(call, env, u, 0, 0),
               0, 1, points=[0.4], epsabs=1e-12)[0]
    assert res.cva_B == pytest.approx(-ref, rel=1e-8)


def test_funding_spread_examples(env):
    assert funding_spread(PartyCredit(0.02, 0.4), env) == pytest.approx(0.012)
    assert funding_spread(PartyCredit(0.0, 0.4), env.replace(market_funding_spread=0.005)) == 0.005
    assert funding_spread(PartyCredit(0.0, 0.4), env) == 0.0


def test_pre_default_mtm_rejected(env, call):
    with pytest.raises(ValueError, match="pre"):
        cva_equity(call, env, *credit_pair(0.02), CollateralTerms(0.0, 0.0, "pre_default"))


def test_adaptive_simpson():
    v, err = adaptive_simpson(math.exp, 0.0, 1.0, 1e-12)
    assert v == pytest.approx(math.e - 1, abs=1e-12) and err < 1e-11
    assert adaptive_simpson(math.sin, 2.0, 2.0, 1e-9) == (0.0, 0.0)


def test_cva_vanishes_linearly_in_maturity(env):
    B, C = credit_pair(0.02, 0.015)
    vals = [cva_equity(EquityOptionSpec(100, 100, T), env, B, C).cva_B for T in (0.01, 0.005, 0.0025)]
    # the ATM value itself scales like sqrt(T), so CVA ~ T^{3/2}; ratio of halvings ~ 2^{3/2}
    assert all(abs(v) < 2e-4 for v in vals)
    short = EquityOptionSpec(100, 100, 1.0, position=-1.0)
    lin = [cva_closed_form(0.0, -BS, B, C, T).cva_C / T for T in (1e-3, 5e-4)]
    assert lin[0] == pytest.approx(lin[1], rel=1e-3)
    assert cva_equity(short, env, B, C).cva_C > 0


def test_cva_b_non_increasing_in_own_intensity():
    C = PartyCredit(0.015, 0.4)
    vals = [cva_closed_form(BS, 0.0, PartyCredit(lam, 0.4), C, 1.0).cva_B for lam in (0.0, 1e-4, 2e-4, 1e-3)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


@settings(max_examples=8, deadline=None)
@given(st.lists(st.floats(0.5, 15.0), min_size=2, max_size=4), st.floats(0.0, 1.0))
def test_collateral_monotonicity(Hs, x_frac):
    env = MarketEnvironment(volatility=0.2, risk_free_rate=0.03)
    call = EquityOptionSpec(100, 100, 1)
    B, C = credit_pair(0.02, 0.015)
    Hs = sorted(Hs)
    X = x_frac * Hs[0]
    cvas = [abs(cva_equity(call, env, B, C, CollateralTerms(H, X), tol=1e-9).cva_B) for H in Hs]
    assert all(b >= a - 1e-8 for a, b in zip(cvas, cvas[1:]))
    H = Hs[-1]
    cvas = [abs(cva_equity(call, env, B, C, CollateralTerms(H, x), tol=1e-9).cva_B) for x in (0.0, 0.5 * H, H)]
    assert all(b <= a + 1e-8 for a, b in zip(cvas, cvas[1:]))
