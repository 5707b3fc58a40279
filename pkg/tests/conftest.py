import pytest

from bankcap.hjb_solver import GridSpec, solve_vi
from bankcap.model import ModelParams, RegulatoryParams
from bankcap.policy import extract_policy

BASE = ModelParams()
BASE_REG = RegulatoryParams()
# r > r_L and a dearer issuance: the regime in which the value is concave and
# issuance happens only at y = 1
REGULAR = ModelParams(r=0.035, kappa_prime=0.2)


@pytest.fixture(scope="session")
def base_vf():
    return solve_vi(BASE, BASE_REG)


@pytest.fixture(scope="session")
def base_vf_no_issuance():
    return solve_vi(BASE, BASE_REG, with_issuance=False)


@pytest.fixture(scope="session")
def base_pol(base_vf):
    return extract_policy(base_vf)


@pytest.fixture(scope="session")
def regular_vf():
    return solve_vi(REGULAR, BASE_REG)


@pytest.fixture(scope="session")
def capped_vf():
    return solve_vi(BASE, RegulatoryParams(0.12, 0.05, 0.25, True))


def degenerate_params():
    """Immediate liquidation: -rho_L >= max(A, B) + gamma with rho above the growth bound."""
    return ModelParams(mu=0.011, r=0.01, mu_L=0.3, rho=0.31, gamma=0.001), RegulatoryParams(0.5, 0.05, 0.9)


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
