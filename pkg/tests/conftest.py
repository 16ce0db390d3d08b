from __future__ import annotations

from pathlib import Path

import pytest

from carnotfas.framekit import build_quasi_normal
from carnotfas.ngla import heisenberg, make_algebra

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def h3():
    return heisenberg(3)


@pytest.fixture
def h3xh3(h3):
    return build_quasi_normal([(h3, [1, 0]), (h3, [1, 0])], alpha2=[1, 4])


@pytest.fixture
def h3x3(h3):
    return build_quasi_normal([(h3, [1, 0])] * 3, alpha2=[1, 4, 9])


@pytest.fixture
def h3_frame(h3):
    return build_quasi_normal([(h3, [1, 0])], alpha2=[1])


@pytest.fixture
def step1_fixture(h3):
    """(H3 + R) x H3 with alpha^2 = (1, 4); c^4_13 is free and injected separately."""
    h3r = make_algebra([3, 1], [(1, 2, 4, 1)])
    return build_quasi_normal([(h3r, [1, 0, 0]), (h3, [1, 0])], alpha2=[1, 4])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
