import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from xva.credit import (PartyCredit, default_in_interval_prob, first_default_density, first_default_prob,
                        survival_probability)


def pair(b, c):
    return PartyCredit(b, 0.4), PartyCredit(c, 0.4)


def test_survival_values():
    assert survival_probability(*pair(0, 0), 7.0) == 1.0
    assert survival_probability(*pair(0.02, 0.015), 0.0) == 1.0
    assert survival_probability(*pair(0.02, 0.015), 1.0) == pytest.approx(0.965605, abs=5e-7)


def test_density_constant_case():
    B, C = pair(0.02, 0.015)
    for u in (0.0, 0.3, 1.0, 4.0):
        assert first_default_density("B", B, C, u) == pytest.approx(0.02 * math.exp(-0.035 * u), rel=1e-14)
    assert first_default_density("B", *pair(0.0, 0.015), 0.5) == 0.0


def test_density_integrates_to_first_default_probability():
    B, C = PartyCredit((0.01, 0.03), 0.4, knots=(0.5,)), PartyCredit(0.015, 0.4)
    for T in (0.7, 1.0, 3.0):
        total = sum(quad(lambda u: first_default_density(w, B, C, u), 0, T, points=[0.5], epsabs=1e-12)[0]
                    for w in "BC")
        assert total == pytest.approx(1.0 - survival_probability(B, C, T), abs=1e-8)
        assert first_default_prob("B", B, C, T) + first_default_prob("C", B, C, T) == pytest.approx(total, abs=1e-12)


def test_interval_probability():
    B, C = pair(0.02, 0.0)
    assert default_in_interval_prob("B", B, C, 0.0, 0.5) == pytest.approx(1 - math.exp(-0.01), rel=1e-14)
    assert default_in_interval_prob("B", B, C, 0.3, 0.3) == 0.0
    assert default_in_interval_prob("C", B, C, 0.0, 5.0) == 0.0
    with pytest.raises(ValueError):
        default_in_interval_prob("B", B, C, 1.0, 0.5)


def test_invalid_party_parameters():
    with pytest.raises(ValueError):
        PartyCredit(-0.01, 0.4)
    with pytest.raises(ValueError):
        PartyCredit(0.01, 1.2)
    assert PartyCredit(0.02, 0.4).loss_rate == pytest.approx(0.6)


lam = st.floats(0.0, 0.2)


@settings(max_examples=100, deadline=None)
@given(lam, lam, st.lists(st.floats(0.0, 10.0), min_size=2, max_size=10))
def test_survival_non_increasing(b, c, ts):
    ts = sorted(ts)
    s = [survival_probability(*pair(b, c), t) for t in ts]
    assert all(0.0 <= y <= x <= 1.0 for x, y in zip(s, s[1:]))


@settings(max_examples=100, deadline=None)
@given(lam, lam, st.integers(1, 40), st.floats(0.5, 30.0))
def test_interval_sums_bounded_and_telescoping(b, c, n, T):
    B, C = pair(b, c)
    grid = np.linspace(0.0, T, n + 1)
    for w in "BC":
        assert sum(default_in_interval_prob(w, B, C, a, z) for a, z in zip(grid, grid[1:])) <= 1.0 + 1e-12
    # both parties together exceed the first-default probability only by the
    # chance that both default inside the same interval
    total = sum(default_in_interval_prob(w, B, C, a, z) for w in "BC" for a, z in zip(grid, grid[1:]))
    overlap = sum(math.exp(-(b + c) * a) * math.expm1(-b * (z - a)) * math.expm1(-c * (z - a))
                  for a, z in zip(grid, grid[1:]))
    assert total == pytest.approx(1.0 - survival_probability(B, C, T) + overlap, abs=1e-12)
    # the literal product form: survival to t0 times the party's own default over the interval
    for w, lam_i in (("B", b), ("C", c)):
        lhs = sum(default_in_interval_prob(w, B, C, a, z) for a, z in zip(grid, grid[1:]))
        rhs = sum(math.exp(-(b + c) * a) * -math.expm1(-lam_i * (z - a)) for a, z in zip(grid, grid[1:]))
        assert lhs == pytest.approx(rhs, abs=1e-12)
