import itertools
import math
import random
from math import gcd

import numpy as np
import pytest

from conicpencil.errors import BudgetExceeded, NonPrimitiveDirection
from conicpencil.lattice import (build_lattice, congruence_minima, count_primitive_in_square,
                                 gauss_reduce, hnf_basis, lattice_law_sweep, lll_reduce,
                                 primitive_main_term, projective_classes, successive_minima)


def test_build_lattice_dim2_and_dim3():
    L = build_lattice((1, 3), 7)
    assert L.det == 7
    assert L.contains((2, 6)) and not L.contains((1, 0))
    L3 = build_lattice((1, 2, 3), 5)
    assert L3.det == 25
    for b in L3.basis:
        assert L3.contains(b)
    with pytest.raises(NonPrimitiveDirection):
        build_lattice((2, 4), 6)


def test_membership_matches_definition():
    L = build_lattice((2, 5), 9)
    for v in itertools.product(range(-9, 10), repeat=2):
        expect = any((v[0] - k * 2) % 9 == 0 and (v[1] - k * 5) % 9 == 0 for k in range(9))
        assert L.contains(v) == expect


def test_minima_brute_force():
    rng = random.Random(0)
    for _ in range(10):
        m = rng.randint(2, 12)
        a = (1, rng.randint(0, m - 1), rng.randint(0, m - 1))
        L = build_lattice(a, m)
        mins = successive_minima(L)
        assert mins == tuple(int(t) for t in congruence_minima(np.array(a, dtype=np.int64), m))
        assert mins[2] <= m
        # brute: shortest nonzero member of the box
        best = min(max(map(abs, v)) for v in itertools.product(range(-m, m + 1), repeat=3)
                   if any(v) and L.contains(v))
        assert mins[0] == best


def test_reduction_helpers():
    u, v = gauss_reduce((1, 0), (1000, 1))
    assert sorted([u, v]) == sorted([(1, 0), (0, 1)])
    R = lll_reduce([(1, 0, 0), (57, 1, 0), (13, 29, 1)])
    assert abs(round(math.prod(1 for _ in R))) == 1
    H = hnf_basis([(3, 1), (0, 3), (3, 0)], 2)
    assert abs(H[0][0] * H[1][1]) == 3


def test_projective_classes_count():
    # number of points of P^1 and P^2 over Z/m
    for m in (2, 3, 4, 6, 12):
        n1 = len(projective_classes(m, 2))
        expect = m * math.prod(1 + 1 / p for p in {p for p in range(2, m + 1) if m % p == 0
                                                     and all(p % r for r in range(2, p))})
        assert n1 == round(expect)


def test_lattice_laws_small():
    n, bad_det, bad_lam = lattice_law_sweep(20, 3)
    assert n > 0 and bad_det == 0 and bad_lam == 0
    n, bad_det, bad_lam = lattice_law_sweep(40, 2)
    assert bad_det == 0


def test_primitive_square_counts():
    Z = build_lattice((1, 0), 1)
    c = count_primitive_in_square(Z, (0, 0), 2)
    assert c.count == 8     # the 3x3 square minus the origin
    c = count_primitive_in_square(Z, (0, 0), 200)
    assert abs(c.count / 200 ** 2 - 6 / math.pi ** 2) < 0.01
    assert primitive_main_term(7, 49.0) == pytest.approx(6 / math.pi ** 2 * 7 / 8 * 7)
    with pytest.raises(BudgetExceeded):
        count_primitive_in_square(Z, (10 ** 7, 0), 10)
