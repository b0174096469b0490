from __future__ import annotations

import pytest

from deposition import fixtures
from deposition.solver import SolverConfig, SolverRunner


@pytest.fixture(scope="session")
def runner():
    r = SolverRunner(SolverConfig())
    yield r
    r.close()


@pytest.fixture(scope="session")
def policies():
    return fixtures.build_intersection_policies()


@pytest.fixture(scope="session")
def crash_trace(policies):
    return fixtures.load_trace("crash", policies["standard"])


@pytest.fixture(scope="session")
def lpr_program():
    return fixtures.load_program("lpr")


@pytest.fixture(scope="session")
def dt_programs():
    return fixtures.build_dt_health()


@pytest.fixture(scope="session")
def dt_trace(dt_programs):
    return fixtures.load_trace("dt_factual", dt_programs[0])
