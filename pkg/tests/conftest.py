import pytest

from tfqkd import ChannelParams, ProtocolParams, make_budget

# Reference operating point used across the suite: the published channel
# parameters with the standard security budget.


@pytest.fixture(scope="session")
def channel():
    return ChannelParams(e_m=0.03, p_d=1e-8, xi=0.2, eta_d=0.3, f_ec=1.1)


@pytest.fixture(scope="session")
def budget_m8():
    return make_budget(n_phases=8, eps_cor=1e-10, eps_pa=1.6566e-10, eps_total_pe=4e-20)


@pytest.fixture(scope="session")
def budget_m2():
    return make_budget(n_phases=2, eps_cor=1e-10, eps_pa=1.6566e-10, eps_total_pe=4e-20)


@pytest.fixture(scope="session")
def protocol_m8():
    return ProtocolParams(0.05, 0.1, 0.6, 0.3, 0.1, 8, int(1e12))
