import functools

import pytest

from fogalloc.catalog import Layout, default_catalog, make_scenario
from fogalloc.opt import formulate, solve_exact
from fogalloc.topology import Architecture, build_topology

ARCHS = (Architecture.PON, Architecture.SPINE_LEAF, Architecture.CLOUD)
LOADS = tuple(range(6, 21))


@functools.lru_cache(maxsize=None)
def canonical(arch: Architecture, load: float, margin: float = 0.0):
    """(topology, problem, solution) for the default 4x8 scenario."""
    from fogalloc.catalog import build_catalog

    cat = default_catalog() if margin == 0 else build_catalog(capacity_margin=margin)
    topo = build_topology(make_scenario(load, cat), arch)
    problem = formulate(topo)
    return topo, problem, solve_exact(problem)


@pytest.fixture(scope="session")
def solved():
    return canonical


@pytest.fixture
def pon6():
    return build_topology(make_scenario(6), Architecture.PON)


@pytest.fixture
def sl6():
    return build_topology(make_scenario(6), Architecture.SPINE_LEAF)


@pytest.fixture
def small_layout():
    return Layout(rooms=2, users_per_room=3, demanding_per_room=1)


@pytest.fixture(scope="session")
def default_comparison():
    from fogalloc.harness import compare

    return compare()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
