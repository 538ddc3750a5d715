import pytest
from scipy.stats import chisquare

from rhea.core import SeededRng


@pytest.fixture
def rng():
    return SeededRng(20240917)


def uniform_p(counts):
    """Chi-square goodness-of-fit p-value against a uniform distribution."""
    return chisquare(list(counts)).pvalue


# criterion number -> (passed, detail); filled by test_acceptance.py
GATE: dict[int, tuple[bool | None, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not GATE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(GATE):
        passed, detail = GATE[k]
        mark = "INFO" if passed is None else "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{mark}] criterion {k}: {detail}")
