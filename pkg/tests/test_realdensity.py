import math

import numpy as np
import pytest

from conicpencil.errors import SmoothnessRequired
from conicpencil.forms import Pencil
from conicpencil.realdensity import (GenzMalik, adaptive_cubature, h_values, sublevel_measure,
                                     tau_infty_formula_A, tau_infty_formula_B, tau_infty_mc,
                                     tau_infty_region)


def test_genz_malik_exact_on_polynomials():
    gm = GenzMalik(2)
    f = lambda V: V[:, 0] ** 4 * V[:, 1] ** 2 + 3 * V[:, 1] ** 6
    val, _, _ = gm.apply(f, np.array([[0.0, 0.0]]), np.array([[1.0, 1.0]]))
    exact = 4 * (1 / 5 * 1 / 3) + 3 * 2 * 2 / 7
    assert abs(val[0] - exact) < 1e-12


def test_adaptive_cubature_gaussian():
    f = lambda V: np.exp(-(V ** 2).sum(axis=1))
    val, est, evals, ok, nflag = adaptive_cubature(f, [-3, -3], [3, 3], tol=1e-8)
    assert ok and abs(val - math.pi * math.erf(3) ** 2) < 1e-7


def test_h_values(diag):
    A0 = np.array(diag.q0.matrix, dtype=float)
    A1 = np.array(diag.q1.matrix, dtype=float)
    V = np.array([[1.0, 0, 0], [0, 0, 1.0]])
    assert np.allclose(h_values(A0, A1, V), [1.0, 3.0])


def test_formulas_agree_and_match_mc(diag):
    a = tau_infty_formula_A(diag)
    b = tau_infty_formula_B(diag)
    mean, se = tau_infty_mc(diag, samples=10 ** 6, seed=1)
    assert abs(a.value - b.value) / a.value < 1e-2
    assert abs(a.value - mean) < 5 * se + 1e-2 * a.value


def test_scaling_law(diag):
    base = tau_infty_formula_A(diag).value
    for lam in (2, 3):
        m0 = [[lam * v for v in r] for r in diag.q0.matrix]
        m1 = [[lam * v for v in r] for r in diag.q1.matrix]
        sc = tau_infty_formula_A(Pencil.from_matrices(m0, m1)).value
        assert abs(sc * lam - base) / base < 2e-2


def test_region_additivity(diag):
    whole = tau_infty_region(diag, (-1, 1, -1, 1)).value
    left = tau_infty_region(diag, (-1, 0, -1, 1)).value
    right = tau_infty_region(diag, (0, 1, -1, 1)).value
    assert abs(whole - left - right) < 2e-2 * whole
    assert tau_infty_region(diag, (1, 1, 0, 1)).value == 0.0


def test_mc_is_deterministic(diag):
    assert tau_infty_mc(diag, samples=10 ** 5, seed=7) == tau_infty_mc(diag, samples=10 ** 5, seed=7)
    assert sublevel_measure(diag, 0.01, samples=10 ** 5, seed=3) == \
        sublevel_measure(diag, 0.01, samples=10 ** 5, seed=3)


def test_not_smooth():
    p = Pencil.from_matrices([[1, 0, 0], [0, 1, 0], [0, 0, 1]], [[1, 0, 0], [0, 1, 0], [0, 0, 2]])
    with pytest.raises(SmoothnessRequired):
        tau_infty_formula_A(p)
