"""Smoke tests for the _eqcycle python module."""
import math
import sys

import _eqcycle as eq


def approx(a, b, tol=1e-12):
    assert abs(a - b) <= tol * max(1.0, abs(a), abs(b)), (a, b)


def main():
    p = eq.nondimensionalize(M=1, kappa=1, L=1, a_f=2, b_f=20, v0=1)
    approx(p.eps, 1.0)
    approx(p.xi, 0.5)
    approx(p.alpha, 0.9)

    d = eq.slow_rhs(0.0, 0.0, 1.0, eq.Params(1e-2, 0.5, 0.9))
    approx(d[0], -1.9 * math.e, 1e-14)
    approx(d[2], -200.0 / math.e, 1e-14)

    approx(eq.H(0.0, 0.0, 0.5), 0.0)
    approx(eq.H(-2.0, 0.0, 0.5), 1.0, 1e-13)
    r = eq.lambert_roots(1.0, 0.5)
    approx(r["y_lower"], -2.0, 1e-11)
    assert "y_upper" not in r

    ls = eq.trace_level_set(0.4, 0.5)
    assert ls["kind"] == "closed"
    assert ls["closure_gap"] <= 1e-8
    worst = max(abs(eq.H(y, z, 0.5) - 0.4) for (y, z) in ls["points"])
    assert worst <= 1e-8, worst

    approx(eq.hopf_alpha(0.5, 1e-2), 0.4975)
    hd = eq.hopf_locate(0.5, 1e-2)
    assert abs(hd["alpha_H_numeric"] - 0.4975) <= 5e-4
    assert hd["criticality"] == "super"

    m = eq.alpha_M(0.3, 0.5, 1e-3, tol=1e-6)
    assert m["delta_alpha"] > 0
    assert 0.4 < m["alpha_M"] < 0.6
    m01 = eq.alpha_M(0.1, 0.5, 1e-3, tol=1e-6)
    assert m01["alpha_M"] < 0.5  # ratio positive below the sign change

    pts = eq.fixed_points_at_infinity(0.5, 0.9)
    assert len(pts) == 9
    q3 = [q for q in pts if q["name"] == "Q3"][0]
    approx(sorted(q3["eigenvalues"])[1], 0.9)

    assert eq.verify_heteroclinic_L0(0.9, 0.5, 1.8) <= 1e-12

    s = eq.project_to_sphere(0.0, 0.0, 0.0)
    approx(s[3], 1.0)

    sim = eq.simulate(1e-2, 0.5, 0.9, tmax=60.0)
    assert max(sim["y"]) > 1.0
    assert len(sim["t"]) > 100

    lc = eq.find_limit_cycle(1e-2, 0.5, 0.9)
    assert lc["stable"]
    assert lc["amplitude_y"] > 1.0
    assert abs(lc["multipliers"][0] - 1.0) <= 1e-4

    print("python smoke tests passed")


if __name__ == "__main__":
    sys.exit(main())
