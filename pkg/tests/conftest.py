import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from crnlyap import ProducingMatrix, parse_network  # noqa: E402

DATA = Path(__file__).parent / "data"
ORIGINAL_TEXT = (DATA / "original.crn").read_text()
CBP_TEXT = (DATA / "cbp.crn").read_text()


@pytest.fixture
def original():
    return parse_network(ORIGINAL_TEXT).network


@pytest.fixture
def cbp_net():
    return parse_network(CBP_TEXT).network


@pytest.fixture
def d_example():
    return ProducingMatrix.of("1/3, 1")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
