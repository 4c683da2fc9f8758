"""Optional cross-validation of the simplex against scipy's HiGHS interface.

Skipped when scipy is not installed; the in-repo vertex-enumeration oracle in
test_lp.py remains the primary reference.
"""
import numpy as np
import pytest

scipy_opt = pytest.importorskip("scipy.optimize")

from probarg import lp


def test_random_lps_match_highs():
    rng = np.random.default_rng(123)
    mismatches = []
    for trial in range(200):
        n = int(rng.integers(1, 8))
        m = int(rng.integers(0, 10))
        scale = 10.0 ** rng.integers(-3, 4)
        A = rng.uniform(-2, 2, size=(m, n)) * scale
        b = rng.uniform(-1, 2, size=m) * scale
        if m >= 2 and rng.random() < 0.5:
            A[1] = -A[0]
            b[1] = -b[0]  # plant an equality pair
        c = rng.uniform(-2, 2, size=n)
        sol = lp.solve_lp(lp.LPProblem(c, "min", A, b, np.zeros(n), np.ones(n)))
        ref = scipy_opt.linprog(c, A_ub=A, b_ub=b, bounds=[(0, 1)] * n, method="highs")
        if ref.status == 2:
            ok = sol.status == lp.INFEASIBLE
        elif ref.status == 0:
            ok = (sol.status == lp.OPTIMAL
                  and abs(sol.objective_value - ref.fun) <= 1e-6 * (1 + abs(ref.fun)))
        else:
            continue
        if not ok:
            mismatches.append((trial, sol.status, ref.status))
    assert not mismatches, mismatches
