import numpy as np
import pytest

from depsplit import synth
from depsplit.core import BankRecord, Quarter


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_record(bank="A", quarter=Quarter(2010, 1), deposits=10_000.0, offices=2, accounts=1000,
                small=900, small_dep=4000.0, retail_loans=300.0, total_loans=1000.0):
    return BankRecord(bank, quarter, deposits, offices, accounts, small, small_dep,
                      retail_loans, total_loans)


@pytest.fixture(scope="session")
def small_synth():
    spec = synth.SynthSpec(n_banks=12, start=Quarter(2009, 3), end=Quarter(2010, 2), seed=3,
                           macro=False, accounts_range=(2000, 6000))
    return synth.generate_panel(spec)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
