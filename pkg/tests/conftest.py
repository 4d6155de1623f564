import numpy as np
import pytest
from hypothesis import strategies as st

from gravcat.qmat import dagger


def random_hermitian(rng, scale=1.0):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    return scale * 0.5 * (a + dagger(a))


def random_density(rng, rank=4):
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


seeds = st.integers(min_value=0, max_value=2**32 - 1)


_criteria = []


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    props = dict(report.user_properties)
    if "criterion" in props:
        _criteria.append((props["criterion"], report.outcome, props.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, detail in sorted(_criteria):
        mark = "PASS" if outcome == "passed" else "FAIL"
        line = f"{mark}  {name}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
