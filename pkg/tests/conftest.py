import pytest

from blowup_lab import ModelParams, build_blowup_solution
from blowup_lab.model import ForceSign

# (C, T, kappa, alpha)
PARAM_SETS = [(1.0, 1.0, 1.0, 1.0), (2.0, 1.0, 0.5, 1.5), (0.3, 2.0, 3.0, 0.7)]


@pytest.fixture(scope="session")
def unit_solution():
    return build_blowup_solution(ModelParams())


@pytest.fixture(scope="session")
def solutions():
    """Attractive C > 0 sets, plus the C < 0 and repulsive variants."""
    out = {}
    for c, t, k, a in PARAM_SETS:
        out[("blowup", c, t, k, a)] = build_blowup_solution(
            ModelParams(big_c=c, big_t=t, kappa=k, alpha0=a))
    out["global"] = build_blowup_solution(ModelParams(big_c=-1.0))
    out["repulsive"] = build_blowup_solution(ModelParams(force_sign=ForceSign.REPULSIVE))
    return out


ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
