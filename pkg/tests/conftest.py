import sys
from fractions import Fraction as F
from pathlib import Path

import pytest
from hypothesis import settings, strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from symdyn import JointPMF, bsc_joint, build_pm_dual, functional_representation  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE: dict = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


def fractions_in_unit(max_den=64):
    return st.integers(2, max_den).flatmap(
        lambda q: st.integers(1, q - 1).map(lambda p: F(p, q)))


@st.composite
def distributions(draw, size=None, max_size=4, max_den=12):
    """Strictly positive rational pmfs."""
    k = size or draw(st.integers(2, max_size))
    weights = draw(st.lists(st.integers(1, max_den), min_size=k, max_size=k))
    total = sum(weights)
    return [F(w, total) for w in weights]


@st.composite
def joint_tables(draw, max_x=4, max_y=4, max_den=9):
    nx = draw(st.integers(2, max_x))
    ny = draw(st.integers(2, max_y))
    weights = draw(st.lists(st.integers(1, max_den), min_size=nx * ny, max_size=nx * ny))
    total = sum(weights)
    return JointPMF([[F(weights[x * ny + y], total) for y in range(ny)] for x in range(nx)])


@pytest.fixture(scope="session")
def bsc_model():
    return build_pm_dual(bsc_joint(F(1, 4)))


@pytest.fixture(scope="session")
def three_z_pmf():
    return JointPMF.from_test_channel([F(1, 2), F(1, 2)], [[F(3, 4), F(1, 4)], [F(1, 3), F(2, 3)]])


@pytest.fixture(scope="session")
def three_z_model(three_z_pmf):
    return build_pm_dual(three_z_pmf)


@pytest.fixture(scope="session")
def positive_3x3():
    return JointPMF.from_channel(
        [F(1, 2), F(1, 3), F(1, 6)],
        [[F(1, 2), F(1, 4), F(1, 4)], [F(1, 5), F(3, 5), F(1, 5)], [F(1, 6), F(1, 3), F(1, 2)]])


def oracle_for(pmf):
    from oracles import OracleSource
    fr = functional_representation(pmf)
    return OracleSource(pmf.table, fr.p_z, fr.xi)
