import functools
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nfclass import build_field  # noqa: E402


@functools.lru_cache(maxsize=None)
def _field(coeffs):
    return build_field(list(coeffs))


@pytest.fixture
def field():
    """field(1, 0, 5) -> cached NumberField for x^2 + 5."""
    return lambda *c: _field(tuple(c))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
