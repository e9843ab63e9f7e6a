import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from xva.credit import PartyCredit
from xva.market_data import DiscountCurve, ForwardCurve
from xva.swap import (SwaptionVol, adjusted_swap_rate, annuity, black_swaption, black_swaption_from_rate,
                      forward_swap_rate, swap_cashflow_value, swap_dva_cva, swap_value)
from xva.trades import SwapSpec

GRID = tuple(0.5 * i for i in range(21))


def flat_curves(r=0.03, f=0.02, n=20):
    tenors = tuple(0.5 * i for i in range(1, n + 1))
    disc = DiscountCurve(tenors, tuple(math.exp(-r * t) for t in tenors))
    fwd = ForwardCurve(tuple(t - 0.5 for t in tenors), tenors, (f,) * n)
    return disc, fwd


def test_annuity():
    assert annuity(DiscountCurve((0.5,), (1.0,)), (0.0, 0.5), 0, 1) == 0.5
    disc, _ = flat_curves()
    assert annuity(disc, GRID, 0, 20) == pytest.approx(sum(0.5 * math.exp(-0.03 * 0.5 * j) for j in range(1, 21)),
                                                       rel=1e-14)
    with pytest.raises(IndexError):
        annuity(disc, GRID, 3, 3)


def test_forward_swap_rate():
    disc, fwd = flat_curves(f=0.0213)
    assert forward_swap_rate(disc, fwd, GRID, 0, 20) == pytest.approx(0.0213, rel=1e-14)
    two = ForwardCurve((0.0, 0.5), (0.5, 1.0), (0.01, 0.03))
    d = DiscountCurve((0.5, 1.0), (0.99, 0.97))
    expect = (0.5 * 0.99 * 0.01 + 0.5 * 0.97 * 0.03) / (0.5 * 0.99 + 0.5 * 0.97)
    assert forward_swap_rate(d, two, (0.0, 0.5, 1.0), 0, 2) == pytest.approx(expect, rel=1e-14)
    with pytest.raises(ValueError):
        forward_swap_rate(d, two, (0.0, 0.5, 1.0, 1.5), 0, 3)


def test_fixture_par_rate(fixture_curves):
    disc, fwd = fixture_curves
    assert forward_swap_rate(disc, fwd, GRID, 0, 20) == pytest.approx(0.0145, abs=1e-15)
    assert disc.discount(10.0) == pytest.approx(math.exp(-0.012 * 10.0), rel=1e-15)


def test_swap_value(fixture_curves):
    disc, fwd = fixture_curves
    par = forward_swap_rate(disc, fwd, GRID, 0, 20)
    at_par = SwapSpec(GRID, par)
    assert swap_value(at_par, disc, fwd) == pytest.approx(0.0, abs=1e-17)
    low = replace(at_par, fixed_rate=par - 0.01)
    assert swap_value(low, disc, fwd) == pytest.approx(0.01 * annuity(disc, GRID, 0, 20), rel=1e-12)
    assert swap_value(replace(low, direction="receiver"), disc, fwd) == -swap_value(low, disc, fwd)


def test_swaption_limits(fixture_curves):
    disc, fwd = fixture_curves
    s = forward_swap_rate(disc, fwd, GRID, 4, 20)
    assert black_swaption("payer", disc, fwd, GRID, 4, 20, s, 0.3) == pytest.approx(
        black_swaption("receiver", disc, fwd, GRID, 4, 20, s, 0.3), rel=1e-13)
    a = annuity(disc, GRID, 4, 20)
    assert black_swaption("payer", disc, fwd, GRID, 4, 20, s - 0.002, 1e-9) == pytest.approx(a * 0.002, rel=1e-9)
    with pytest.raises(ValueError):
        black_swaption("payer", disc, fwd, GRID, 0, 20, s, 0.3)
    with pytest.raises(ValueError):
        SwaptionVol(0.0)


def test_swaption_against_lognormal_quadrature(fixture_curves):
    disc, fwd = fixture_curves
    m, n, sigma, K = 2, 20, 0.2, 0.0145  # expiry T_m = 1, 18 periods left
    s = forward_swap_rate(disc, fwd, GRID, m, n)
    a = annuity(disc, GRID, m, n)
    T = GRID[m]

    def density(x):
        mu = math.log(s) - 0.5 * sigma * sigma * T
        return math.exp(-((math.log(x) - mu) ** 2) / (2 * sigma * sigma * T)) / (x * sigma * math.sqrt(2 * math.pi * T))

    payer = a * quad(lambda x: (x - K) * density(x), K, s * 20, epsabs=1e-15, epsrel=1e-12, limit=200)[0]
    rec = a * quad(lambda x: (K - x) * density(x), 1e-12, K, epsabs=1e-15, epsrel=1e-12, limit=200)[0]
    assert black_swaption("payer", disc, fwd, GRID, m, n, K, sigma) == pytest.approx(payer, rel=1e-8)
    assert black_swaption("receiver", disc, fwd, GRID, m, n, K, sigma) == pytest.approx(rec, rel=1e-8)


def _fixture_spec(fixture_curves):
    disc, fwd = fixture_curves
    return SwapSpec(GRID, forward_swap_rate(disc, fwd, GRID, 0, 20))


def test_dva_cva_zero_cases(fixture_curves):
    disc, fwd = fixture_curves
    spec = _fixture_spec(fixture_curves)
    C = PartyCredit(0.00015, 0.4)
    assert swap_dva_cva(spec, disc, fwd, 0.2, PartyCredit(0.02, 1.0), C).dva == 0.0
    assert swap_dva_cva(spec, disc, fwd, 0.2, PartyCredit(0.0, 0.4), C).dva == 0.0
    both = swap_dva_cva(spec, disc, fwd, 0.2, PartyCredit(0.02, 1.0), PartyCredit(0.02, 1.0))
    assert both.dva == 0.0 and both.cva == 0.0
    adj = swap_dva_cva(spec, disc, fwd, 0.2, PartyCredit(0.02, 0.4), C)
    assert adj.dva < 0 < adj.cva
    assert adj.dva_terms[-1] == 0.0 and adj.cva_terms[-1] == 0.0
    assert len(adj.dva_terms) == 20


def test_receiver_mirrors_payer(fixture_curves):
    disc, fwd = fixture_curves
    spec = _fixture_spec(fixture_curves)
    B, C = PartyCredit(0.02, 0.4), PartyCredit(0.02, 0.4)
    pay = swap_dva_cva(spec, disc, fwd, 0.2, B, C)
    rec = swap_dva_cva(replace(spec, direction="receiver"), disc, fwd, 0.2, B, C)
    # identical parties: the payer's exposure to B is the receiver's exposure to C, negated
    assert rec.cva == pytest.approx(-pay.dva, rel=1e-13) and rec.dva == pytest.approx(-pay.cva, rel=1e-13)


def test_cva_changes_only_through_survival(fixture_curves):
    disc, fwd = fixture_curves
    spec = _fixture_spec(fixture_curves)
    C = PartyCredit(0.00015, 0.4)
    base = swap_dva_cva(spec, disc, fwd, 0.2, PartyCredit(0.0, 0.4), C)
    for lam in (0.005, 0.03):
        other = swap_dva_cva(spec, disc, fwd, 0.2, PartyCredit(lam, 0.4), C)
        for j, (b, o) in enumerate(zip(base.cva_terms, other.cva_terms)):
            assert o == pytest.approx(b * math.exp(-lam * GRID[j]), rel=1e-12)


def test_dva_decreasing_in_own_intensity(fixture_curves):
    disc, fwd = fixture_curves
    spec = _fixture_spec(fixture_curves)
    C = PartyCredit(0.00015, 0.4)
    dvas = [swap_dva_cva(spec, disc, fwd, 0.2, PartyCredit(lam, 0.4), C).dva for lam in np.arange(0, 0.0301, 0.005)]
    assert all(b < a for a, b in zip(dvas, dvas[1:]))


def test_adjusted_rate(fixture_curves):
    disc, fwd = fixture_curves
    spec = _fixture_spec(fixture_curves)
    zero = PartyCredit(0.0, 0.4)
    assert adjusted_swap_rate(spec, disc, fwd, 0.2, zero, zero) == pytest.approx(0.0145, abs=1e-15)
    s_star = adjusted_swap_rate(spec, disc, fwd, 0.2, PartyCredit(0.02, 0.4), zero)
    assert s_star < 0.0145
    residual = swap_value(replace(spec, fixed_rate=s_star), disc, fwd) + sum(
        swap_dva_cva(replace(spec, fixed_rate=s_star), disc, fwd, 0.2, PartyCredit(0.02, 0.4), zero))
    assert abs(residual) <= 1e-10
    C = PartyCredit(0.00015, 0.4)
    rates = [adjusted_swap_rate(spec, disc, fwd, 0.2, PartyCredit(lam, 0.4), C) for lam in np.arange(0, 0.0301, 0.005)]
    assert all(b < a for a, b in zip(rates, rates[1:]))
    with pytest.raises(ValueError, match="sign change"):
        adjusted_swap_rate(spec, disc, fwd, 0.2, PartyCredit(0.03, 0.4), C, width=1e-7)


rate = st.floats(0.001, 0.08)


@settings(max_examples=300, deadline=None)
@given(st.floats(0.1, 10.0), rate, rate, st.floats(0.01, 1.0), st.floats(0.05, 20.0))
def test_parity_random(a, s, k, sigma, T):
    bc = black_swaption_from_rate("payer", a, s, k, sigma, T)
    bp = black_swaption_from_rate("receiver", a, s, k, sigma, T)
    assert bc >= 0 and bp >= 0
    assert bc - bp == pytest.approx(a * (s - k), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-0.005, 0.06), min_size=20, max_size=20), st.floats(0.0, 0.05), st.floats(-0.01, 0.06),
       st.sampled_from(["payer", "receiver"]))
def test_cashflow_form(fwds, r, s, direction):
    disc, _ = flat_curves(r)
    fwd = ForwardCurve(GRID[:-1], GRID[1:], tuple(fwds))
    spec = SwapSpec(GRID, s, direction, notional=1.0)
    assert swap_value(spec, disc, fwd) == pytest.approx(swap_cashflow_value(spec, disc, fwd), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 0.2), st.floats(0.0, 0.2), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_adjustment_signs(lam_B, lam_C, R_B, R_C):
    disc, fwd = flat_curves(0.01, 0.02)
    spec = SwapSpec(GRID, 0.02)
    adj = swap_dva_cva(spec, disc, fwd, 0.3, PartyCredit(lam_B, R_B), PartyCredit(lam_C, R_C))
    assert adj.dva <= 0.0 <= adj.cva
