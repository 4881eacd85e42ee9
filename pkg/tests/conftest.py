import numpy as np
import pytest

from yieldcrit import corpus
from yieldcrit.grid import DomainMasks, build_grid, rasterize


def masks_from_blocks(n, blocks, domain=None):
    """Masks with solid cell blocks ``(i0, i1, j0, j1)`` (half-open) and a
    fluid domain filling everything but the outer ring unless given."""
    solid = np.zeros((n, n), dtype=bool)
    for i0, i1, j0, j1 in blocks:
        solid[i0:i1, j0:j1] = True
    if domain is None:
        exterior = np.ones((n, n), dtype=bool)
        exterior[1:-1, 1:-1] = False
    else:
        i0, i1, j0, j1 = domain
        exterior = np.ones((n, n), dtype=bool)
        exterior[i0:i1, j0:j1] = False
    return DomainMasks.from_classes(exterior, solid)


@pytest.fixture(scope="session")
def ref16():
    return rasterize(corpus.reference(), build_grid(16))


@pytest.fixture(scope="session")
def ref32():
    return rasterize(corpus.reference(), build_grid(32))


@pytest.fixture(scope="session")
def disks32():
    return rasterize(corpus.two_disks(), build_grid(32))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_CRITERIA = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    detail = dict(report.user_properties).get("criterion", report.nodeid)
    _CRITERIA.append(f"{'PASS' if report.passed else 'FAIL'} criterion {detail}")


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
