import math
from importlib.resources import files

import pytest

from xva.credit import PartyCredit
from xva.market_data import MarketEnvironment, load_curve
from xva.trades import EquityOptionSpec

BS_ATM = 9.4134


@pytest.fixture
def env():
    return MarketEnvironment(volatility=0.20, risk_free_rate=0.03)


@pytest.fixture
def call():
    return EquityOptionSpec(100.0, 100.0, 1.0, "call")


@pytest.fixture
def short_call():
    return EquityOptionSpec(100.0, 100.0, 1.0, "call", position=-1.0)


@pytest.fixture
def repo_env():
    return MarketEnvironment(volatility=0.20, risk_free_rate=0.03, repo_spread=0.0075)


def credit_pair(lam_B=0.0, lam_C=0.015, rec=0.4):
    return PartyCredit(lam_B, rec), PartyCredit(lam_C, rec)


@pytest.fixture(scope="session")
def fixture_curves():
    data = files("xva") / "data"
    return load_curve(data / "ois_synthetic.csv", "discount"), load_curve(data / "euribor6m_synthetic.csv", "forward")


def close(a, b, rel=0.0, abs_=0.0):
    return math.isclose(a, b, rel_tol=rel, abs_tol=abs_)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("#")[1].split()[0])):
            terminalreporter.write_line(line)
