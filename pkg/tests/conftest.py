import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import annulus_table, chain_table, strata_demographic_table  # noqa: E402


@pytest.fixture(scope="session")
def ring():
    return annulus_table()


@pytest.fixture(scope="session")
def geo_chain():
    """88 counties x 213 months, zero deaths: geography only."""
    return chain_table()


@pytest.fixture(scope="session")
def city_chain():
    """Same chain with superlinear cumulative deaths in five designated counties."""
    from helpers import CITY_INDICES

    return chain_table(cities=CITY_INDICES)


@pytest.fixture(scope="session")
def strata_table():
    return strata_demographic_table()


# ---------------------------------------------------------------------------
# One pass/fail line per acceptance criterion at the end of the run.
# ---------------------------------------------------------------------------

_acceptance: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.skipped:
        _acceptance[name] = "SKIP"
    elif report.when == "call":
        _acceptance[name] = "PASS" if report.outcome == "passed" else "FAIL"
    elif report.when == "setup" and report.outcome == "failed":
        _acceptance[name] = "ERROR"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(_acceptance):
        terminalreporter.write_line(f"{_acceptance[name]:5s} {name}")
