from pathlib import Path

import pytest

import roofkit
from roofkit.machine import read_machine_file

DATA = Path(roofkit.__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"
TEST_DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def v100():
    return read_machine_file(DATA / "machines" / "v100.json")


@pytest.fixture(scope="session")
def data_dir():
    return DATA


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[number])
