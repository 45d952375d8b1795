import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from papersurf.schemefile import builtin  # noqa: E402


@pytest.fixture(scope="session")
def torus():
    return builtin("torus")


@pytest.fixture(scope="session")
def ex13():
    return builtin("example-1.3")


@pytest.fixture(scope="session")
def finite_w():
    return builtin("finite-w")


@pytest.fixture(scope="session")
def horseshoe():
    return builtin("tight-horseshoe")


@pytest.fixture(scope="session")
def four_rect():
    return builtin("four-rectangle")


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion."""
    def record(n: int, ok: bool, detail: str) -> bool:
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
