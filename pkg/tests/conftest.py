import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from univalg import VarietyPresentation, load_algebra  # noqa: E402
from univalg.builtins import LATTICE_SIG, Z2_SIG  # noqa: E402


@pytest.fixture(scope="session")
def lattice2():
    return load_algebra("lattice2")


@pytest.fixture(scope="session")
def z2():
    return load_algebra("z2xor")


@pytest.fixture(scope="session")
def set2():
    return load_algebra("set2")


@pytest.fixture(scope="session")
def n5():
    return load_algebra("n5")


@pytest.fixture(scope="session")
def L():
    return VarietyPresentation(load_algebra("lattice2"))


@pytest.fixture(scope="session")
def Z():
    return VarietyPresentation(load_algebra("z2xor"))


@pytest.fixture(scope="session")
def S2():
    return VarietyPresentation(load_algebra("set2"))


@pytest.fixture(scope="session")
def lsig():
    return LATTICE_SIG


@pytest.fixture(scope="session")
def zsig():
    return Z2_SIG


# -- acceptance summary --------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    for name, value in report.user_properties:
        if name == "criterion":
            status = "PASS" if report.passed else "FAIL"
            ACCEPTANCE_LINES.append(f"{status}  {value}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
