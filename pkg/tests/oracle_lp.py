"""Independent high-precision assembly of the phase-error LP.

This is a test oracle: it recomputes every matrix entry straight from the
closed-form expressions with mpmath (50 digits), sharing no code with the
library's constraint builder. Running it as a script regenerates the golden
matrix file used by test_constraints.

    python tests/oracle_lp.py > tests/golden/lp_m8_table1_L100.txt
"""

from mpmath import mp, exp, factorial, log, mpf, sqrt

mp.dps = 50

# Channel (misalignment, dark counts, fiber loss, detector efficiency) and
# protocol operating point for the golden instance.
E_M = mpf("0.03")
P_D = mpf("1e-8")
XI = mpf("0.2")
ETA_D = mpf("0.3")
MU = mpf("0.05")
NU = mpf("0.1")
P_MU = mpf("0.6")
P_NU = mpf("0.3")
P_O = mpf("0.1")
M = 8
N_TOT = mpf("1e12")
L_KM = mpf("100")
EPS_A = mpf("4e-20") / 76


def pmf(k, mean):
    if mean == 0:
        return mpf(1) if k == 0 else mpf(0)
    return exp(-mean) * mean**k / factorial(k)


def folded(j, mean, terms=80):
    return sum(pmf(j + M * n, mean) for n in range(terms))


def fold_fid(j, int_a, int_b, terms=80):
    if int_a == int_b:
        return mpf(1)
    ma, mb = 2 * int_a, 2 * int_b
    num = sum(sqrt(pmf(j + M * n, ma) * pmf(j + M * n, mb)) for n in range(terms))
    return num / sqrt(folded(j, ma) * folded(j, mb))


def vac_fid(intensity):
    mean = 2 * intensity
    return pmf(0, mean) / folded(0, mean)


def delta(x, y, z):
    if x < 0:
        x = mpf(0)
    if x == 0 or y == 0:
        return mpf(0)
    return sqrt(3 * x * y * log(1 / z))


def clicks(beta, eta):
    qc = (1 - (1 - P_D) * exp(-2 * eta * (1 - E_M) * beta)) * exp(-2 * eta * E_M * beta) * (1 - P_D)
    qe = (1 - (1 - P_D) * exp(-2 * eta * E_M * beta)) * exp(-2 * eta * (1 - E_M) * beta) * (1 - P_D)
    return qc, qe


def observations():
    eta = mpf(10) ** (-XI * L_KM / 20) * ETA_D
    qc_mu, qe_mu = clicks(MU, eta)
    qc_nu, qe_nu = clicks(NU, eta)
    qc_0, qe_0 = clicks(mpf(0), eta)
    n_2mu = N_TOT * P_MU**2 * 2 * (qc_mu + qe_mu) / M
    n_2nu = N_TOT * P_NU**2 * 2 * (qc_nu + qe_nu) / M
    n_0 = N_TOT * P_O**2 * (qc_0 + qe_0)
    return n_2mu, n_2nu, n_0


def gap(p1, p2, fid, count_left, count_right):
    """Distinguishability bound between two preparations; returns
    (coeff_left, coeff_right, delta)."""
    s = sqrt(max(mpf(0), 1 - fid**2))
    if p1 > p2:
        cl, cr = p2 / p1, mpf(1)
        p_small, ratio, count_last = p2, p2 / p1, count_left
    else:
        ratio = p1 / p2 if p2 > 0 else mpf(1)
        cl, cr = mpf(1), ratio
        p_small, count_last = p1, count_right
    d_pair = delta(N_TOT, 2 * p_small, EPS_A)
    n1 = 2 * N_TOT * p_small + d_pair
    n2 = 2 * N_TOT * p_small - d_pair
    d = (
        n1 * s
        + 2 * delta(n1, (1 + s) / 2, EPS_A)
        - 2 * delta(n2 - count_left - count_right, mpf("0.5"), EPS_A)
        + delta(count_last, ratio, EPS_A)
    )
    return cl, cr, max(mpf(0), d)


def class_prob(j, intensity, p_label):
    return (2 * p_label**2 / M) * folded(j, 2 * intensity)


def decoy_gap(j, n_2mu, n_2nu):
    p1 = class_prob(j, MU, P_MU)
    p2 = class_prob(j, NU, P_NU)
    return gap(p1, p2, fold_fid(j, MU, NU), n_2mu, n_2nu)


def vacuum_gap(which, n_2mu, n_2nu, n_0):
    if which == "mu":
        beta, p_label, count_beta = MU, P_MU, n_2mu
    else:
        beta, p_label, count_beta = NU, P_NU, n_2nu
    p1 = P_O**2
    p2 = class_prob(0, beta, p_label)
    return gap(p1, p2, vac_fid(beta), n_0, count_beta)


def box(j, which):
    beta, p_label = (MU, P_MU) if which == "mu" else (NU, P_NU)
    mean = N_TOT * class_prob(j, beta, p_label)
    return mean + sqrt(3 * log(1 / EPS_A) * mean)


def assemble_lines():
    n_2mu, n_2nu, n_0 = observations()
    nvars = 2 * M

    def fmt(x):
        return format(float(x), ".17g")

    lines = ["tfqkd-lp 1", f"nvars\t{nvars}", "scale\t" + fmt(N_TOT)]
    obj = [mpf(0)] * nvars
    for j in range(0, M - 1, 2):
        obj[j] = mpf(1)
    lines.append("objective\t" + "\t".join(fmt(v) for v in obj))

    eq1 = [mpf(1)] * M + [mpf(0)] * M
    eq2 = [mpf(0)] * M + [mpf(1)] * M
    lines.append("eq\t" + "\t".join(fmt(v) for v in eq1) + "\t" + fmt(n_2mu / N_TOT))
    lines.append("eq\t" + "\t".join(fmt(v) for v in eq2) + "\t" + fmt(n_2nu / N_TOT))

    def le_row(coeffs, rhs):
        lines.append("le\t" + "\t".join(fmt(v) for v in coeffs) + "\t" + fmt(rhs))

    # Vacuum anchors first (mu then nu), each as two one-sided rows; the
    # constant vacuum-count term moves to the right-hand side.
    for which, var in (("mu", 0), ("nu", M)):
        cl, cr, d = vacuum_gap(which, n_2mu, n_2nu, n_0)
        row = [mpf(0)] * nvars
        row[var] = -cr
        le_row(row, d / N_TOT - cl * n_0 / N_TOT)
        row2 = [mpf(0)] * nvars
        row2[var] = cr
        le_row(row2, d / N_TOT + cl * n_0 / N_TOT)

    for j in range(M):
        cl, cr, d = decoy_gap(j, n_2mu, n_2nu)
        row = [mpf(0)] * nvars
        row[j] = cl
        row[M + j] = -cr
        le_row(row, d / N_TOT)
        le_row([-v for v in row], d / N_TOT)

    # Boxes follow the LP's variable order: all signal classes, then decoy.
    for which in ("mu", "nu"):
        for j in range(M):
            lines.append("bound\t" + fmt(0.0) + "\t" + fmt(box(j, which) / N_TOT))
    return lines


if __name__ == "__main__":
    print("\n".join(assemble_lines()))
