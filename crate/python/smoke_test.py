"""Quick end-to-end check of the pyschwarzian extension module."""

import cmath
import math
from fractions import Fraction

import pyschwarzian as ps


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    e = ps.Function("exp(z)")
    assert close(ps.schwarzian(e, 3, 0), 1 / 9, 1e-14)
    assert close(ps.schwarzian(e, 2, 0.3, method="closed_form"), -0.5, 1e-14)

    lead, coeffs = ps.Function("1/z^2").jet(0, 3)
    assert lead == -2 and coeffs[0] == 1

    mob = ps.Function.catalog("mobius_power", n=3)
    z = 0.3 + 0.2j
    assert close(ps.schwarzian(mob, 2, z), (1 - 9) / (2 * z * z), 1e-9)

    hay = ps.Function.catalog("hayman", c=1 + 1j)
    c = 1 + 1j
    assert close(ps.schwarzian(hay, 2, z), -cmath.exp(2 * c * z) / 2 - c * c / 2, 1e-9)

    assert [ps.pole_order(ps.Function("z^2"), k, 0) for k in range(2, 7)] == [2, 3, 4, 5, 6]

    assert ps.partitions(3) == [[3, 0, 0], [1, 1, 0], [0, 0, 1]]
    assert [(t, Fraction(c)) for t, c in ps.coefficients(2)] == [([2, 0], Fraction(-1, 2)), ([0, 1], 1)]
    g = ps.grahl(5)
    assert g["ell"] == 4 and all(2 <= s <= 4 for _, _, s, _ in g["terms"])

    link = ps.verify_link(e, 2, 0)
    assert close(link["p0"], -0.25, 1e-14) and link["residual"] < 1e-12

    assert ps.disconjugacy_threshold(2, 1.0) == 2.0
    assert ps.count_solution_zeros("1", 2, [0, 1], 0, 8.0) == 3
    assert ps.count_solution_zeros("1", 2, [1, 0], 0, 1.0) == 0
    b = ps.pole_count_bound(2, 10.0)
    # k - 1 = 1 pole per cell
    assert b["n"] == b["cells"]

    assert abs(ps.bessel_zero("J0", 1) - 2.404825557695773) < 1e-9
    assert abs(ps.bessel_value("J0", 2.404825557695773)) < 1e-12
    for n in range(5, 9):
        assert abs(ps.bessel_zero("Y0", n) - (n - 0.75) * math.pi) <= 0.05

    q = ps.Function.catalog("bessel_quotient")
    assert close(ps.schwarzian(q, 2, 0.5 + 0.25j), cmath.exp(0.5 + 0.25j) / 2, 1e-8)

    assert close(ps.spherical_derivative(ps.Function("2*z"), 0), 2.0, 1e-15)
    m = ps.marty(hay, z)
    assert m["holds"] and m["lhs"] < m["rhs"]

    for name in ["faa-di-bruno", "classical", "grahl", "corollary"]:
        r = ps.run_suite(name, seed=3, trials=10)
        assert r["pass"], r

    try:
        ps.Function("exp(")
    except ValueError:
        pass
    else:
        raise AssertionError("parse error expected")

    print("pyschwarzian smoke test passed")


if __name__ == "__main__":
    main()
