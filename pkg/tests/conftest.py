import shutil
from itertools import combinations
from pathlib import Path

import pytest

from qlayout.arch import build_line
from qlayout.program import make_program
from qlayout.solve.backends import Backend

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}

requires_z3 = pytest.mark.skipif(shutil.which("z3") is None, reason="z3 executable not on PATH")


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture
def a2a5():
    return make_program(5, combinations(range(5), 2), commuting=True)


@pytest.fixture
def triangle():
    return make_program(3, [(0, 1), (1, 2), (0, 2)], commuting=True)


@pytest.fixture
def one_gate():
    return make_program(2, [(0, 1)])


@pytest.fixture
def line5():
    return build_line(5)


@pytest.fixture
def z3():
    if shutil.which("z3") is None:
        pytest.skip("z3 executable not on PATH")
    return Backend()


@pytest.fixture
def internal():
    return Backend.internal()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
