"""Shared random-LP generators for the solver/oracle comparison tests."""

import numpy as np

from tfqkd import ChannelParams, ProtocolParams, build_lp, expected_observations, make_budget
from tfqkd.constraints import LinearProgram

TABLE1 = ChannelParams(e_m=0.03, p_d=1e-8, xi=0.2, eta_d=0.3, f_ec=1.1)


def random_lp(rng) -> LinearProgram:
    """Dense instance (2..6 vars) anchored at a feasible point most of the
    time; the margin noise makes a fraction infeasible on purpose."""
    n = int(rng.integers(2, 7))
    m_eq = int(rng.integers(0, 3))
    m_ub = int(rng.integers(1, 6))
    a_eq = rng.normal(size=(m_eq, n))
    a_ub = rng.normal(size=(m_ub, n))
    upper = rng.uniform(0.5, 3.0, size=n)
    x0 = rng.uniform(0, 1, size=n) * upper
    return LinearProgram(
        objective=rng.normal(size=n),
        a_eq=a_eq,
        b_eq=a_eq @ x0,
        a_ub=a_ub,
        b_ub=a_ub @ x0 + rng.uniform(-0.5, 1.0, size=m_ub),
        lower=np.zeros(n),
        upper=upper,
    )


def paper_shaped_lp(rng) -> LinearProgram:
    """Rescaled two-phase-class phase-error instance at a randomized
    operating point (brute-forceable: 4 variables)."""
    mu, nu = sorted(rng.uniform(0.01, 0.4, size=2))
    p_mu, p_nu = rng.dirichlet([4, 2, 1])[:2]
    n_total = int(10 ** rng.uniform(9, 13))
    proto = ProtocolParams.make(mu, nu, p_mu, p_nu, 2, n_total)
    budget = make_budget(n_phases=2, eps_cor=1e-10, eps_pa=1.6566e-10, eps_total_pe=4e-20)
    counts = expected_observations(proto, TABLE1, float(rng.uniform(10, 250)))
    return build_lp(proto, counts, budget)
