import functools

import pytest

from matterwave_om import BeamState
from matterwave_om.oracle import build_post_collision

_ACCEPTANCE_LINES = []


def record_acceptance(number: int, title: str, passed: bool, detail: str) -> None:
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    _ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.fixture
def acceptance():
    return record_acceptance


@functools.lru_cache(maxsize=4)
def oracle_density(N, mode, gamma, nbar, n_max=60):
    return build_post_collision(BeamState(N, mode), gamma, nbar, n_max)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
