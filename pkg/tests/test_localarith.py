import random
from fractions import Fraction
from math import gcd

import pytest

from conicpencil.errors import BadPrimeSkipped, HypothesisViolated, SingularFiber
from conicpencil.forms import fiber_matrix
from conicpencil.localarith import (D_y, bad_number, chi_infty, chi_p, count_lin_primitive, fC,
                                    fD, fM, fM_vs_quartic_roots, fS, hatS, hatS_brute, identity_suite,
                                    kappa, sigma_p_fiber, sigma_star, sigma_star_brute,
                                    singular_series_global, stabilization_exponent, tau_p,
                                    tauk_inequality, varpi_from_fM, varpi_truncated)


def test_linear_count_formula_vs_brute():
    for p, k in ((2, 1), (2, 3), (3, 2), (5, 1), (7, 2)):
        m = p ** k
        for a in range(m):
            for b in range(m):
                if gcd(gcd(a, b), m) == m:
                    with pytest.raises(HypothesisViolated):
                        count_lin_primitive(a, b, p, k)
                    continue
                assert count_lin_primitive(a, b, p, k) == count_lin_primitive(a, b, p, k, brute=True)


def test_identity_suite_small(eligible, diag):
    for p in (eligible, diag):
        entries = identity_suite(p, [5, 7, 11], 2)
        assert all(e["pass"] in (True, None) for e in entries)


def test_multiplicativity_small(eligible):
    for f in (fS, fM, fC, fD):
        for m, n in ((2, 3), (3, 5), (4, 5), (2, 7)):
            assert f(eligible, m * n) == f(eligible, m) * f(eligible, n)


def test_fM_against_quartic_roots(eligible):
    bad = bad_number(eligible)
    checked = 0
    for q in (5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if bad % q == 0:
            with pytest.raises(BadPrimeSkipped):
                fM_vs_quartic_roots(eligible, q)
            continue
        assert fM_vs_quartic_roots(eligible, q)["pass"]
        checked += 1
    assert checked >= 5


def test_varpi_from_fS_and_fM_agree(eligible):
    for q in (5, 7):
        for k in (1, 2):
            fm = [fM(eligible, q ** j) for j in range(1, k + 1)]
            rhs = (1 + Fraction(1, q) + Fraction(1, q * q) + Fraction(fm[-1], q ** (k + 1))
                   + (1 - Fraction(1, q)) * sum(Fraction(v, q ** j) for j, v in enumerate(fm, 1)))
            assert varpi_truncated(eligible, q, k) == rhs
        # at a good prime f_M(q^j) is constant, so the closed form is the limit
        if bad_number(eligible) % q:
            fm = [fM(eligible, q)]
            assert varpi_truncated(eligible, q, 2) == varpi_from_fM(q, fm)
        t = tau_p(eligible, q)
        assert t.value == (1 - Fraction(1, q)) ** 2 * t.varpi


def test_hatS_matches_brute(eligible, diag):
    for p in (eligible, diag):
        for q, k in ((2, 1), (2, 2), (3, 1), (2, 4)):
            if q ** k <= 16:
                assert hatS(p, q, k) == hatS_brute(p, q, k)


def test_chi_and_kappa(eligible):
    rng = random.Random(5)
    for _ in range(30):
        y = (rng.randint(1, 60), rng.randint(-60, 60))
        if gcd(*y) != 1:
            continue
        if eligible.cubic(y) == 0:
            with pytest.raises(SingularFiber):
                kappa(eligible, y)
            continue
        assert kappa(eligible, y) >= 0
        assert chi_infty(eligible, y) in (1, -1)
        assert D_y(eligible, y) >= 1


def test_sigma_star_brute(eligible):
    for y in ((1, 0), (0, 1), (2, -1), (3, 5)):
        for m in (5, 7, 9, 25, 27):
            assert sigma_star(eligible, m, y) == sigma_star_brute(eligible, m, y)


def test_sigma_p_fiber_stabilizes(eligible):
    for y in ((1, 0), (1, 1), (2, 3)):
        for q in (2, 3, 5):
            sigma_p_fiber(eligible, y, q, verify=True)
    assert stabilization_exponent(2, 0) == 3 and stabilization_exponent(5, 1) == 3


def test_series_positive(eligible):
    s = singular_series_global(eligible, 2000)
    assert 0 < s.value < 10 and s.band >= 0
    assert s.trace[-1][0] == 2000


def test_tauk_inequality():
    for n in range(1, 200):
        assert tauk_inequality(n, 2, 3)


def test_simple_bad_prime_formula(eligible):
    from conicpencil.forms import det3, fiber_matrix
    from conicpencil.localarith import _sigma_simple_odd, sigma_p_fiber
    from conicpencil.nt import factorint
    hits = 0
    for y0 in range(1, 30):
        for y1 in range(-30, 30):
            A = fiber_matrix(eligible, (y0, y1))
            c = det3(A)
            if c == 0:
                continue
            for q, e in factorint(abs(c)).items():
                if 2 < q <= 23 and e == 1 and hits < 12:
                    assert _sigma_simple_odd(A, q) == sigma_p_fiber(eligible, (y0, y1), q, verify=False)
                    hits += 1
    assert hits == 12


def test_D_y_sweep(eligible):
    # no bound is asserted; the maximum over all fibers of height <= 50 is recorded
    worst = (0, None)
    for y0 in range(0, 51):
        for y1 in range(-50, 51):
            if gcd(y0, y1) != 1 or (y0 == 0 and y1 < 0) or eligible.cubic((y0, y1)) == 0:
                continue
            worst = max(worst, (D_y(eligible, (y0, y1)), (y0, y1)))
    print("max D_y over height <= 50:", worst)
    assert worst[0] >= 1
