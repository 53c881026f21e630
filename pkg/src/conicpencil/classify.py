"""Blow-up type of the base locus, Picard rank, eligibility and alpha."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

import sympy

from .errors import (FactorizationInconclusive, NotFound, ProportionalFormsError,
                     SmoothnessRequired)
from .forms import (Pencil, QuadForm3, _binary_rational_roots, _divisors_abs, adjugate3,
                    det3, eval_form, fiber_matrix, is_smooth, is_square, make_primitive)


class _Unavailable:
    def __repr__(self):
        return "Unavailable"

    def __bool__(self):
        return False


Unavailable = _Unavailable()


@dataclass(frozen=True)
class BlowupType:
    degrees: tuple
    has_rational_point: bool
    quartic: tuple
    transform: tuple
    rational_points: tuple = ()


@dataclass(frozen=True)
class Eligibility:
    m_has_qpoint: bool
    c_has_qroot: bool
    eligible: bool
    galois: str
    rho: int


ALPHA = {
    (1, 1, 1, 1): Fraction(1, 144),
    (1, 1, 2): Fraction(1, 24),
    (1, 3): Fraction(5, 24),
    (2, 2): Fraction(1, 6),
    (4,): Fraction(2, 3),
}


def _require_smooth(p):
    if not is_smooth(p):
        raise SmoothnessRequired("pencil is not smooth")


def unimodular_sequence(seed=0, bound=3):
    """Deterministic stream of 3x3 integer matrices with determinant +-1."""
    rng = random.Random(seed)
    yield ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    while True:
        M = tuple(tuple(rng.randint(-bound, bound) for _ in range(3)) for _ in range(3))
        if abs(det3(M)) == 1:
            yield M


def _poly_x2(A, x0, x1):
    """Coefficients (a, b, c) of Q(x0, x1, t) = a t^2 + b t + c, as polynomials in x0, x1."""
    a = A[2][2]
    b = 2 * (A[0][2] * x0 + A[1][2] * x1)
    c = A[0][0] * x0 ** 2 + 2 * A[0][1] * x0 * x1 + A[1][1] * x1 ** 2
    return a, b, c


def resultant_quartic(p: Pencil):
    """Binary quartic Res_{x2}(Q0, Q1) as coefficients of x0^4, x0^3 x1, ..., x1^4."""
    X0, X1 = sympy.symbols("X0 X1")
    a0, b0, c0 = _poly_x2(p.q0.matrix, X0, X1)
    a1, b1, c1 = _poly_x2(p.q1.matrix, X0, X1)
    # resultant of two quadratics in t
    r = (a0 * c1 - a1 * c0) ** 2 - (a0 * b1 - a1 * b0) * (b0 * c1 - b1 * c0)
    poly = sympy.Poly(sympy.expand(r), X0, X1)
    return tuple(int(poly.coeff_monomial(X0 ** (4 - i) * X1 ** i)) for i in range(4 + 1))


def binary_disc(coeffs):
    t = sympy.symbols("t")
    f = sum(c * t ** (len(coeffs) - 1 - i) for i, c in enumerate(coeffs))
    return int(sympy.discriminant(sympy.Poly(f, t)))


def _has_quadratic_factor(f):
    """Does the primitive quartic f (no rational roots, f(1,0) f(0,1) != 0) split as two quadratics?"""
    a0, a1, a2, a3, a4 = f
    R = 1 + max(abs(Fraction(c, a0)) for c in f[1:])
    for a in _divisors_abs(a0):
        d = a0 // a
        for cabs in _divisors_abs(a4):
            for c in (cabs, -cabs):
                fc = a4 // c
                # (a X^2 + b XY + c Y^2)(d X^2 + e XY + fc Y^2)
                det = d * c - a * fc
                if det != 0:
                    bn = a1 * c - a * a3
                    en = d * a3 - fc * a1
                    if bn % det or en % det:
                        continue
                    cands = [(bn // det, en // det)]
                else:
                    bmax = int(2 * abs(a) * R) + 1
                    cands = []
                    for b in range(-bmax, bmax + 1):
                        num = a1 - d * b
                        if num % a == 0:
                            cands.append((b, num // a))
                for b, e in cands:
                    if (a * e + b * d == a1 and b * fc + c * e == a3
                            and a * fc + b * e + c * d == a2):
                        return True
    return False


def factor_quartic_degrees(f):
    """Degrees of the irreducible factors of a squarefree binary quartic over Q."""
    g = 0
    for c in f:
        g = gcd(g, c)
    f = tuple(c // g for c in f)
    roots = _binary_rational_roots(f)
    r = len(roots)
    if r == 4:
        return (1, 1, 1, 1), roots
    if r == 2:
        return (1, 1, 2), roots
    if r == 1:
        return (1, 3), roots
    if r == 0:
        return ((2, 2) if _has_quadratic_factor(f) else (4,)), roots
    raise FactorizationInconclusive(f"quartic with {r} rational roots is not squarefree")


def _lift_root(p: Pencil, x0, x1):
    """Common rational zeros (x0:x1:t) of Q0 and Q1, if any."""
    sols = []
    for A in (p.q0.matrix, p.q1.matrix):
        a, b, c = _poly_x2(A, x0, x1)
        cand = set()
        if a == 0:
            if b != 0:
                cand.add(Fraction(-c, b))
            elif c == 0:
                cand = None
        else:
            disc = b * b - 4 * a * c
            if is_square(disc):
                s = isqrt(disc)
                cand.add(Fraction(-b + s, 2 * a))
                cand.add(Fraction(-b - s, 2 * a))
        sols.append(cand)
    if sols[0] is None and sols[1] is None:
        return []
    common = sols[0] if sols[1] is None else sols[1] if sols[0] is None else sols[0] & sols[1]
    pts = []
    for t in common:
        v = make_primitive((x0 * t.denominator, x1 * t.denominator, t.numerator))
        if eval_form(p.q0, v.coords) == 0 and eval_form(p.q1, v.coords) == 0:
            pts.append(v)
    return pts


def _apply(M, v):
    return tuple(sum(M[i][j] * v[j] for j in range(3)) for i in range(3))


def mscheme(p: Pencil, seed=0) -> BlowupType:
    _require_smooth(p)
    for n, M in enumerate(unimodular_sequence(seed)):
        if n >= 20:
            break
        pt = p.transform_x(M)
        f = resultant_quartic(pt)
        if f[0] == 0 or f[4] == 0 or binary_disc(f) == 0:
            continue
        degrees, roots = factor_quartic_degrees(f)
        pts = []
        for (r0, r1) in roots:
            for v in _lift_root(pt, r0, r1):
                pts.append(make_primitive(_apply(M, v.coords)))
        if len(pts) != degrees.count(1):
            raise FactorizationInconclusive("rational roots of the quartic failed to lift")
        return BlowupType(tuple(sorted(degrees)), 1 in degrees, f, M, tuple(pts))
    raise FactorizationInconclusive("20 coordinate changes gave degenerate quartics")


def rho(p: Pencil) -> int:
    return len(mscheme(p).degrees) + 1


def fiber_splits_over_Q(A) -> bool:
    """For a rank-2 rational form: does it factor into rational linear forms?"""
    adj = adjugate3(A)
    for i in range(3):
        if adj[i][i] != 0:
            return is_square(-adj[i][i])
    # all diagonal adjugate entries vanish only if adj = 0, impossible at rank 2
    raise ValueError("form does not have rank 2")


def rho_via_fibers(p: Pencil):
    _require_smooth(p)
    roots = p.cubic.rational_roots()
    if len(roots) < 3:
        return Unavailable
    return 2 + sum(fiber_splits_over_Q(fiber_matrix(p, y)) for y in roots)


def eligibility(p: Pencil) -> Eligibility:
    _require_smooth(p)
    bt = mscheme(p)
    c_root = len(p.cubic.rational_roots()) > 0
    elig = (not bt.has_rational_point) and (not c_root)
    if elig:
        galois = "A4" if is_square(p.cubic.disc) else "S4"
    else:
        galois = "not-applicable"
    return Eligibility(bt.has_rational_point, c_root, elig, galois, len(bt.degrees) + 1)


def _random_sym(rng, b):
    m = [[0] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(i, 3):
            m[i][j] = m[j][i] = rng.randint(-b, b)
    return m


def find_eligible(coeff_bound: int, seed: int = 0, max_tries: int = 200000) -> Pencil:
    if coeff_bound < 1:
        raise NotFound("no nonzero pencils with this coefficient bound")
    rng = random.Random(seed)
    for _ in range(max_tries):
        A0, A1 = _random_sym(rng, coeff_bound), _random_sym(rng, coeff_bound)
        try:
            p = Pencil(QuadForm3(A0), QuadForm3(A1))
        except ProportionalFormsError:
            continue
        if not is_smooth(p):
            continue
        if p.cubic.rational_roots():
            continue
        if eligibility(p).eligible:
            return Pencil(p.q0, p.q1, f"eligible-b{coeff_bound}-s{seed}")
    raise NotFound("search budget exhausted")


def alpha(bt) -> Fraction:
    degrees = bt.degrees if isinstance(bt, BlowupType) else bt
    return ALPHA[tuple(sorted(degrees))]


def alpha_cone_integral(restrict_e_le_f=False):
    """(closed form, quadrature) for 1/2 times the integral of exp(-(e+3f)/2) over e, f >= 0."""
    from scipy.integrate import dblquad
    import math

    g = lambda e, f: 0.5 * math.exp(-(e + 3 * f) / 2)
    if restrict_e_le_f:
        exact = Fraction(1, 6)
        # outer variable f, inner e in [0, f]
        val, _ = dblquad(lambda e, f: g(e, f), 0, math.inf, 0, lambda f: f,
                         epsabs=1e-13, epsrel=1e-12)
    else:
        exact = Fraction(2, 3)
        val, _ = dblquad(lambda e, f: g(e, f), 0, math.inf, 0, math.inf,
                         epsabs=1e-13, epsrel=1e-12)
    return exact, val


def cone_split_fractions():
    return Fraction(1, 4), Fraction(3, 4)
