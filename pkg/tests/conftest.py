import numpy as np
import pytest

from locked_teleport.config import InputStateSpec
from locked_teleport.core import StateVector

SQ = 1 / np.sqrt(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def generic_specs():
    return (
        InputStateSpec(0.6, 0.8j),
        InputStateSpec((1 + 2j) / np.sqrt(10), (2 - 1j) / np.sqrt(10)),
    )


def ket(values, labels):
    v = np.asarray(values, dtype=complex)
    return StateVector(v / np.linalg.norm(v), labels)


# One line per acceptance criterion at the end of the run.
_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _acceptance[report.nodeid.split("::")[-1]] = report.outcome
    elif "test_acceptance.py" in report.nodeid and report.when == "setup" and report.outcome != "passed":
        _acceptance[report.nodeid.split("::")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_acceptance.items()):
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{mark}  {name}")
