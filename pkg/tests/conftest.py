import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pucci_radial import OperatorSpec  # noqa: E402

# (criterion, passed, detail) lines collected by the acceptance suite
CRITERIA: list[tuple[str, bool, str]] = []


def record(criterion: str, passed: bool, detail: str) -> bool:
    CRITERIA.append((criterion, bool(passed), detail))
    return bool(passed)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in CRITERIA:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")


@pytest.fixture(scope="session")
def pucci_spec():
    """lambda = 1, Lambda = 1.5, N = 4 (N~_- = 5.5, N~_+ = 3)."""
    return OperatorSpec(1.0, 1.5, 4)


@pytest.fixture(scope="session")
def laplace3():
    return OperatorSpec(1.0, 1.0, 3)
