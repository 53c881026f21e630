import random
from math import gcd

import pytest

from conicpencil.conic import (INF, count_conic_points, find_zero, is_locally_solvable,
                               isotropy_local, kappa_consistency, local_obstructions,
                               minimal_zero, obstruction_certificate, param_count, param_points,
                               parametrize, reduce_param_basis)
from conicpencil.errors import SingularForm
from conicpencil.forms import det3, fiber_matrix
from conicpencil.localarith import kappa_matrix


def diag3(a, b, c):
    return ((a, 0, 0), (0, b, 0), (0, 0, c))


def q(A, x):
    return sum(A[i][j] * x[i] * x[j] for i in range(3) for j in range(3))


def test_isotropy_examples():
    assert isotropy_local(diag3(1, 1, 1), INF) == -1
    assert isotropy_local(diag3(1, 1, -1), INF) == 1
    # x^2 + y^2 = 3 z^2 fails at 3 and 2, nowhere else
    assert set(local_obstructions(diag3(1, 1, -3))) == {2, 3}
    assert is_locally_solvable(diag3(1, 1, -2))
    with pytest.raises(SingularForm):
        isotropy_local(diag3(1, 1, 0), 2)


def test_minimal_zero_examples():
    s = minimal_zero(diag3(1, 1, -1))
    assert s.zero.coords == (1, 0, 1)
    s = minimal_zero(diag3(1, 1, -3))
    assert s.zero is None and sorted(s.obstruction_places) == [2, 3]
    assert obstruction_certificate(diag3(1, 1, -3), 3) is not None


def test_find_zero_on_random_forms():
    rng = random.Random(4)
    found = 0
    for _ in range(60):
        a, b, c = (rng.choice([-1, 1]) * rng.randint(1, 60) for _ in range(3))
        A = diag3(a, b, c)
        z = find_zero(A)
        if is_locally_solvable(A):
            assert z is not None and q(A, z.coords) == 0
            found += 1
        else:
            assert z is None
    assert found > 5


def test_counts_small_examples():
    # x^2 + y^2 = z^2 with height <= 5: (1,0,1) (0,1,1) and the (3,4,5) family, sign-normalized
    assert count_conic_points(diag3(1, 1, -1), 5) == count_conic_points(diag3(1, 1, -1), 5, method="slow")
    assert count_conic_points(diag3(1, 1, -1), 5) == 12
    assert count_conic_points(diag3(1, 1, -3), 100) == 0
    assert count_conic_points(diag3(1, 1, 1), 100) == 0


def test_parametrization_covers_all_points():
    for A in (diag3(1, 1, -1), diag3(1, 2, -3), ((2, 1, 0), (1, -3, 2), (0, 2, 5))):
        if not is_locally_solvable(A):
            continue
        P = parametrize(A, certify_to=60)
        assert P.covering_certificate == 60
        assert all(q(A, x) == 0 for x in param_points(P, 40))
        assert param_count(P, 40)[0] == count_conic_points(A, 40, method="slow")


def test_fast_slow_agreement_random_fibers(eligible):
    rng = random.Random(0)
    n = 0
    while n < 40:
        y = (rng.randint(0, 40), rng.randint(-40, 40))
        if y == (0, 0) or gcd(*y) != 1:
            continue
        A = fiber_matrix(eligible, y)
        if det3(A) == 0:
            continue
        n += 1
        X = rng.choice([50, 300])
        lo = rng.randint(0, 20)
        assert count_conic_points(A, X, lo) == count_conic_points(A, X, lo, method="slow")


def test_large_descent_zero_fiber(eligible):
    # descent returns a zero of height ~2e7 here; the reduced scan must still be exact
    A = fiber_matrix(eligible, (39, -14))
    assert count_conic_points(A, 1000) == count_conic_points(A, 1000, method="slow") == 81


def test_kappa_zero_means_no_points(eligible):
    rng = random.Random(9)
    for _ in range(40):
        y = (rng.randint(1, 30), rng.randint(-30, 30))
        if gcd(*y) != 1:
            continue
        A = fiber_matrix(eligible, y)
        if det3(A) == 0:
            continue
        assert kappa_consistency(A)
        if kappa_matrix(A) == 0:
            assert count_conic_points(A, 200, method="slow") == 0


def test_reduce_param_basis_keeps_lattice():
    coef = ((3, 7, -2), (1, 0, 5), (-4, 2, 1))
    b1, b2 = reduce_param_basis(coef, (5, 0), (0, 1))
    assert abs(b1[0] * b2[1] - b1[1] * b2[0]) == 5
    assert b1[0] % 5 == 0 and b2[0] % 5 == 0
