"""Rational points on a single conic Q(x) = 0: local isotropy, zeros, parametrization, counts."""
from __future__ import annotations

import math
import types
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

import numpy as np
import sympy
from sympy.solvers.diophantine.diophantine import descent

from . import _conickernels as K
from .errors import BudgetExceeded, SingularForm
from .forms import QuadForm3, adjugate3, det3, make_primitive
from .localarith import chi_infty_matrix, kappa_matrix
from .nt import factorint, hilbert_symbol, legendre, sqrt_mod
from .padic import count_zeros_primitive, jordan_blocks

INF = "inf"
INT64_SAFE = 2 ** 62


def _matrix(f):
    A = f.matrix if isinstance(f, QuadForm3) else f
    return tuple(tuple(int(v) for v in row) for row in A)


def _primitive_matrix(A):
    g = 0
    for r in A:
        for v in r:
            g = gcd(g, v)
    return tuple(tuple(v // g for v in r) for r in A)


def _q(A, x):
    return sum(A[i][j] * x[i] * x[j] for i in range(3) for j in range(3))


# ---------------------------------------------------------------------------
# local isotropy

def diagonalize_rational(A):
    """Integer diagonal D and integer matrix T (columns) with T^t A T = diag(D), T invertible."""
    A = _matrix(A)
    if det3(A) == 0:
        raise SingularForm("singular form")

    def B(u, v):
        return sum(A[i][j] * u[i] * v[j] for i in range(3) for j in range(3))

    rem = [[Fraction(int(i == j)) for i in range(3)] for j in range(3)]
    cols, D = [], []
    while rem:
        idx = next((i for i, r in enumerate(rem) if B(r, r) != 0), None)
        if idx is None:
            i, j = next((i, j) for i in range(len(rem)) for j in range(i + 1, len(rem))
                        if B(rem[i], rem[j]) != 0)
            rem[i] = [a + b for a, b in zip(rem[i], rem[j])]
            idx = i
        w = rem.pop(idx)
        bw = B(w, w)
        rem = [[a - B(r, w) / bw * b for a, b in zip(r, w)] for r in rem]
        den = 1
        for t in w:
            den = den * t.denominator // gcd(den, t.denominator)
        wi = [int(t * den) for t in w]
        g = 0
        for t in wi:
            g = gcd(g, t)
        wi = [t // g for t in wi]
        cols.append(wi)
        D.append(B(wi, wi))
    T = tuple(tuple(cols[j][i] for j in range(3)) for i in range(3))
    return tuple(D), T


def _padic_diagonal(A, p):
    """Diagonal entries of a p-adic diagonalization of A (odd p), exact in valuation and unit mod p."""
    k = _vp(det3(A), p) + 2
    blocks = jordan_blocks(A, p, k)
    return [b[0][0] for b in blocks]


def _vp(n, p):
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _iso_from_diag(d, p):
    a, b, c = d
    return hilbert_symbol(-a * c, -b * c, p)


def isotropy_local(f, place) -> int:
    """+1 if f is isotropic over Q_v, else -1."""
    A = _matrix(f)
    if det3(A) == 0:
        raise SingularForm("singular form")
    A = _primitive_matrix(A)
    if place == INF or place == math.inf:
        return chi_infty_matrix(A)
    p = int(place)
    if p != 2:
        if det3(A) % p:
            return 1
        return _iso_from_diag(_padic_diagonal(A, p), p)
    D, _ = diagonalize_rational(A)
    return _iso_from_diag(D, 2)


def relevant_places(f):
    A = _primitive_matrix(_matrix(f))
    d = det3(A)
    return [INF, 2] + sorted(q for q in factorint(abs(d)) if q != 2)


def local_obstructions(f):
    return [v for v in relevant_places(f) if isotropy_local(f, v) == -1]


def is_locally_solvable(f) -> bool:
    return not local_obstructions(f)


def obstruction_certificate(f, place):
    """For a finite obstructed place p, the least k with no primitive zero mod p^k (or None)."""
    A = _primitive_matrix(_matrix(f))
    p = int(place)
    kmax = _vp(det3(A), p) + (5 if p == 2 else 3)
    for k in range(1, kmax + 1):
        if count_zeros_primitive(A, p, k) == 0:
            return k
    return None


# ---------------------------------------------------------------------------
# Legendre descent

def _sqfree(n):
    s, r = 1, 1
    for p, e in factorint(abs(n)).items():
        if e % 2:
            s *= p
        r *= p ** (e // 2)
    return (s if n > 0 else -s), r


def _solve_diagonal(a, b, c):
    """Integer zero (x, y, z) != 0 of a x^2 + b y^2 + c z^2, or None."""
    if a == 0 or b == 0 or c == 0:
        raise SingularForm("zero diagonal coefficient")
    if (a > 0) == (b > 0) == (c > 0):
        return None
    g = gcd(gcd(a, b), c)
    co = [a // g, b // g, c // g]
    scale = [Fraction(1)] * 3
    # squarefree coefficients
    for i in range(3):
        s, r = _sqfree(co[i])
        co[i] = s
        scale[i] /= r
    # make coefficients pairwise coprime
    changed = True
    while changed:
        changed = False
        for i, j in ((0, 1), (1, 2), (0, 2)):
            k = 3 - i - j
            h = gcd(co[i], co[j])
            if h > 1:
                co[i] //= h
                co[j] //= h
                co[k] *= h
                scale[k] *= h
                s, r = _sqfree(co[k])
                co[k] = s
                scale[k] /= r
                changed = True
    a, b, c = co
    # Legendre's conditions
    for (u, v, w) in ((a, b, c), (b, c, a), (c, a, b)):
        m = abs(u)
        if m > 1 and sqrt_mod(-v * w % m, m) is None:
            return None
    A, Bc = -a * c, -b * c
    if A == 1:
        w, x, y = 1, 1, 0
    elif Bc == 1:
        w, x, y = 1, 0, 1
    else:
        w, x, y = descent(A, Bc)
    assert w * w == A * x * x + Bc * y * y and (w, x, y) != (0, 0, 0)
    # a x^2 + b y^2 + c z^2 = 0 with z = w / c
    X, Y, Z = c * x, c * y, w
    sol = [Fraction(X) * scale[0], Fraction(Y) * scale[1], Fraction(Z) * scale[2]]
    den = 1
    for t in sol:
        den = den * t.denominator // gcd(den, t.denominator)
    return tuple(int(t * den) for t in sol)


def find_zero(f):
    """Some primitive zero (sign-normalized) of a nonsingular form, or None if none exists."""
    A = _matrix(f)
    D, T = diagonalize_rational(A)
    v = _solve_diagonal(*D)
    if v is None:
        return None
    x = tuple(sum(T[i][j] * v[j] for j in range(3)) for i in range(3))
    z = make_primitive(x)
    assert _q(A, z.coords) == 0
    return z


@dataclass
class ConicSolution:
    zero: object
    locally_solvable: bool
    obstruction_places: list
    search_bound_used: int


def minimal_zero(f, max_box=1 << 14) -> ConicSolution:
    """Certified sup-norm-minimal primitive zero via doubling boxes."""
    A = _matrix(f)
    if det3(A) == 0:
        raise SingularForm("singular form")
    obs = local_obstructions(A)
    if obs:
        return ConicSolution(None, False, obs, 0)
    anchor = find_zero(A)
    if anchor is None:
        raise AssertionError("locally solvable form without a rational zero")
    cap = max(abs(t) for t in anchor.coords)
    An = np.array(A, dtype=np.int64)
    R = 1
    while True:
        Rb = min(R, cap)
        if Rb > max_box:
            raise BudgetExceeded(f"minimal zero search box {Rb} exceeds {max_box}")
        best = K.box_min_zero(An, Rb)
        if best.any():
            return ConicSolution(make_primitive(tuple(int(t) for t in best)), True, [], Rb)
        if Rb == cap:
            return ConicSolution(anchor, True, [], Rb)
        R *= 2


# ---------------------------------------------------------------------------
# normal-form parametrization

def _to_e1(r):
    """Unimodular U with r^t U = (1, 0, 0) for a primitive integer vector r."""
    row = list(r)
    U = [[int(i == j) for j in range(3)] for i in range(3)]
    while sum(1 for t in row if t) > 1:
        i = min((j for j in range(3) if row[j]), key=lambda j: abs(row[j]))
        for j in range(3):
            if j != i and row[j]:
                q = row[j] // row[i]
                row[j] -= q * row[i]
                for k in range(3):
                    U[k][j] -= q * U[k][i]
    i = next(j for j in range(3) if row[j])
    assert abs(row[i]) == 1, "vector is not primitive"
    if row[i] < 0:
        for k in range(3):
            U[k][i] = -U[k][i]
    order = [i] + [j for j in range(3) if j != i]
    return [[U[k][j] for j in order] for k in range(3)]


def _egcd(a, b):
    if b == 0:
        return (abs(a), (1 if a >= 0 else -1), 0)
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y


def _inv3(M):
    adj = adjugate3(M)
    d = det3(M)
    assert abs(d) == 1
    return [[adj[i][j] * d for j in range(3)] for i in range(3)]


@dataclass
class ConicParam:
    base_zero: tuple
    M: tuple            # columns z, m1, m2
    c: int
    a: int
    b: int
    d: int
    coef: tuple         # F_i(u, v) = coef[i][0] u^2 + coef[i][1] u v + coef[i][2] v^2
    urow: int           # l1 norm of the second row of M^-1 (bounds u)
    vrow: int           # l1 norm of the third row of M^-1 (bounds v)
    covering_certificate: int = 0

    def point(self, u, v):
        F = [self.coef[i][0] * u * u + self.coef[i][1] * u * v + self.coef[i][2] * v * v
             for i in range(3)]
        if u == 0:
            return make_primitive(self.base_zero)
        return make_primitive(F)


def _size_reduce(z, m2, m1):
    """Shorten m2 modulo z, then m1 modulo the span of z and m2 (keeps the basis unimodular)."""
    def dot(u, v):
        return sum(a * b for a, b in zip(u, v))
    zz = dot(z, z)
    k = round(Fraction(dot(m2, z), zz))
    m2 = [a - k * b for a, b in zip(m2, z)]
    # least squares of m1 on (z, m2), rounded
    g11, g12, g22 = zz, dot(z, m2), dot(m2, m2)
    det = g11 * g22 - g12 * g12
    b1, b2 = dot(m1, z), dot(m1, m2)
    s = round(Fraction(b1 * g22 - b2 * g12, det))
    t = round(Fraction(b2 * g11 - b1 * g12, det))
    m1 = [a - s * b - t * c for a, b, c in zip(m1, z, m2)]
    return m2, m1


def parametrize(f, zero=None, certify_to=0) -> ConicParam:
    A = _matrix(f)
    if det3(A) == 0:
        raise SingularForm("singular form")
    z = zero if zero is not None else find_zero(A)
    if z is None:
        raise ValueError("form has no rational zero")
    z = tuple(int(t) for t in z)
    assert _q(A, z) == 0
    r = [sum(A[i][j] * z[j] for j in range(3)) for i in range(3)]
    c = 0
    for t in r:
        c = gcd(c, t)
    rp = [t // c for t in r]
    U = _to_e1(rp)
    Uinv = _inv3(U)
    s, t = (sum(Uinv[1][j] * z[j] for j in range(3)), sum(Uinv[2][j] * z[j] for j in range(3)))
    g, al, be = _egcd(s, t)
    assert g == 1
    k1 = [U[i][1] for i in range(3)]
    k2 = [U[i][2] for i in range(3)]
    m1 = [U[i][0] for i in range(3)]
    m2 = [-be * k1[i] + al * k2[i] for i in range(3)]
    m2, m1 = _size_reduce(z, m2, m1)
    M = tuple(tuple((z[i], m1[i], m2[i])) for i in range(3))
    assert abs(det3(M)) == 1

    def bil(u, v):
        return sum(A[i][j] * u[i] * v[j] for i in range(3) for j in range(3))

    assert bil(z, m1) == c and bil(z, m2) == 0
    a, b, d = bil(m1, m1), bil(m1, m2), bil(m2, m2)
    assert c * c * d == -det3(A)
    coef = tuple((-z[i] * a + 2 * c * m1[i], -2 * b * z[i] + 2 * c * m2[i], -d * z[i])
                 for i in range(3))
    Minv = _inv3(M)
    P = ConicParam(z, M, c, a, b, d, coef, sum(abs(v) for v in Minv[1]),
                   sum(abs(v) for v in Minv[2]))
    if certify_to:
        sweep = set(map(tuple, _slow_points(A, certify_to, 0)))
        got = set(map(tuple, param_points(P, certify_to, 0)))
        if sweep != got:
            raise AssertionError("parametrization failed its covering check")
        P.covering_certificate = certify_to
    return P


def _divisors_upto(n, bound, fac=None):
    fac = factorint(n) if fac is None else fac
    divs = [1]
    for p, e in fac.items():
        divs = [d * p ** k for d in divs for k in range(e + 1) if d * p ** k <= bound]
    return sorted(divs)


_NO_GAMMA = np.zeros((2, 4), dtype=np.int64)
_NO_CLASS = np.zeros(3, dtype=np.int64)


def _py_kernel():
    """Pure-Python twin of the scanning kernel (arbitrary-size integers)."""
    ns = dict(K.param_scan.py_func.__globals__)
    ns.update(_gcd=lambda a, b: gcd(int(a), int(b)), _sign_ok=K._sign_ok.py_func,
              _quad_le=K._quad_le.py_func, _rung=K._rung.py_func,
              _region_ok=K._region_ok.py_func, _x_class_ok=K._x_class_ok.py_func)
    fn = K.param_scan.py_func
    return types.FunctionType(fn.__code__, ns, fn.__name__, fn.__defaults__, fn.__closure__)


_PY_PARAM_SCAN = None


def _fvals(coef, u, v):
    return [c0 * u * u + c1 * u * v + c2 * v * v for c0, c1, c2 in coef]


def _pnorm(coef, w):
    return max(abs(t) for t in _fvals(coef, w[0], w[1]))


def reduce_param_basis(coef, b1, b2, max_iter=500):
    """Gauss-style reduction of a basis of a planar lattice for the quasi-norm max_i |F_i|.

    All norms are exact integers; floating point only proposes candidate shifts.
    """
    b1, b2 = tuple(b1), tuple(b2)
    n1, n2 = _pnorm(coef, b1), _pnorm(coef, b2)
    for _ in range(max_iter):
        if n2 < n1:
            b1, b2, n1, n2 = b2, b1, n2, n1
        cands = {0}
        for i in range(3):
            a = _fvals(coef[i:i + 1], *b1)[0]
            c = _fvals(coef[i:i + 1], *b2)[0]
            bb = _fvals(coef[i:i + 1], b1[0] + b2[0], b1[1] + b2[1])[0] - a - c
            # F_i(b2 - k b1) = a k^2 - bb k + c
            if a:
                cands.add(math.floor(bb / (2 * a)))
                disc = bb * bb - 4 * a * c
                if disc >= 0:
                    r = isqrt(disc)
                    cands.add(math.floor((bb + r) / (2 * a)))
                    cands.add(math.floor((bb - r) / (2 * a)))
            elif bb:
                cands.add(math.floor(c / bb))
        best_k, best = 0, n2
        for k0 in cands:
            for k in (k0, k0 + 1):
                w = (b2[0] - k * b1[0], b2[1] - k * b1[1])
                nw = _pnorm(coef, w)
                if nw < best:
                    best_k, best = k, nw
        if best_k == 0:
            break
        b2 = (b2[0] - best_k * b1[0], b2[1] - best_k * b1[1])
        n2 = best
    return b1, b2


def _reduce(coef, b1, b2):
    if max(abs(v) for r in coef for v in r) < INT64_SAFE:
        ok, *bb = K.reduce_basis(np.array(coef, dtype=np.int64), b1[0], b1[1], b2[0], b2[1])
        if ok:
            return (int(bb[0]), int(bb[1])), (int(bb[2]), int(bb[3]))
    return reduce_param_basis(coef, b1, b2)


def _transform_coef(coef, b1, b2):
    """Coefficients of F_i(s b1 + t b2) as a form in (s, t)."""
    rc = []
    for i in range(3):
        f1 = _fvals(coef[i:i + 1], *b1)[0]
        f2 = _fvals(coef[i:i + 1], *b2)[0]
        f12 = _fvals(coef[i:i + 1], b1[0] + b2[0], b1[1] + b2[1])[0]
        rc.append((f1, f12 - f1 - f2, f2))
    return tuple(rc)


def _sublattice_basis(al, be, e):
    """Basis of {(s, t): al s + be t = 0 mod e}."""
    if e == 1:
        return (1, 0), (0, 1)
    h = gcd(al, e)
    t0 = h // gcd(be, h)
    eh = e // h
    s0 = (-(be * t0) // h * pow(al // h, -1, eh)) % eh if eh > 1 else 0
    return (eh, 0), (s0, t0)


def param_count(P: ConicParam, X, lower=0, Hy=1, rungs=None, filt=None, d_fac=None):
    """Count sign-normalized primitive zeros with lower < H <= X via the parametrization.

    Coprime (u, v) with u != 0 are split by e = gcd(u, d).  For each e the lattice e | u is
    reduced for the quasi-norm max |F_i| and handed to the scanning kernel, with the
    pure-Python twin taking over whenever int64 headroom is in doubt.
    Returns (total, per-rung counts).  `filt` is None or (gamma int array (2,4), q, a-class).
    """
    global _PY_PARAM_SCAN
    X = int(X)
    if X <= lower:
        return 0, np.zeros(1 if rungs is None else len(rungs), dtype=np.int64)
    if rungs is None:
        rungs = np.array([X * Hy], dtype=np.int64)
    rungs = np.asarray(rungs, dtype=np.int64)
    out = np.zeros(len(rungs), dtype=np.int64)
    dabs = abs(P.d)
    divs = _divisors_upto(dabs, P.urow * X, d_fac)
    gam, q, acls = (_NO_GAMMA, 1, _NO_CLASS) if filt is None else filt
    total = 0
    # reduce Z^2 once; each sublattice e | u is then set up in the reduced coordinates
    W1, W2 = _reduce(P.coef, (1, 0), (0, 1))
    rc1 = _transform_coef(P.coef, W1, W2)
    for e in divs:
        s1, s2 = _sublattice_basis(W1[0], W2[0], e)
        s1, s2 = _reduce(rc1, s1, s2)
        b1 = (s1[0] * W1[0] + s1[1] * W2[0], s1[0] * W1[1] + s1[1] * W2[1])
        b2 = (s2[0] * W1[0] + s2[1] * W2[0], s2[0] * W1[1] + s2[1] * W2[1])
        rc = _transform_coef(P.coef, b1, b2)
        T = 2 * abs(P.c) * e
        n = -1
        if max(abs(v) for r in rc for v in r) < INT64_SAFE and max(map(abs, b1 + b2)) < INT64_SAFE:
            sub = np.zeros(len(rungs), dtype=np.int64)
            n = K.param_scan(np.array(rc, dtype=np.int64), b1[0], b1[1], b2[0], b2[1], e, dabs,
                             T, X, lower, Hy, rungs, sub, filt is not None, gam, q, acls)
        if n < 0:
            if _PY_PARAM_SCAN is None:
                _PY_PARAM_SCAN = _py_kernel()
            sub = np.zeros(len(rungs), dtype=object)
            n = _PY_PARAM_SCAN(np.array(rc, dtype=object), b1[0], b1[1], b2[0], b2[1], e, dabs,
                               T, X, lower, Hy, rungs, sub, filt is not None, gam, q, acls, True)
        total += n
        out += sub.astype(np.int64)
    # the base point itself (u = 0)
    z = make_primitive(P.base_zero).coords
    h = max(abs(t) for t in z)
    if lower < h <= X:
        ok = True
        if filt is not None:
            ok = K._region_ok.py_func(*z, gam) and K._x_class_ok.py_func(*z, q, *acls)
        if ok:
            total += 1
            out[K._rung.py_func(h * Hy, rungs)] += 1
    return int(total), out


def param_points(P: ConicParam, X, lower=0):
    """Explicit list of sign-normalized zeros with lower < H <= X (small X only)."""
    pts = set()
    z = make_primitive(P.base_zero).coords
    if lower < max(abs(t) for t in z) <= X:
        pts.add(z)
    ebound = P.urow * X
    for e in _divisors_upto(abs(P.d), ebound):
        umax = isqrt(P.urow * e * X) + 1
        vmax = P.vrow * X + 1
        for u in range(e, umax + 1, e):
            if gcd(u, abs(P.d)) != e:
                continue
            for v in range(-vmax, vmax + 1):
                if gcd(u, v) != 1:
                    continue
                x = P.point(u, v).coords
                if lower < max(abs(t) for t in x) <= X:
                    pts.add(x)
    return sorted(pts)


# ---------------------------------------------------------------------------
# counting zeros

def _sweep_matrix(A):
    """Permute coordinates so that the last diagonal entry is nonzero when possible."""
    for k in (2, 1, 0):
        if A[k][k] != 0:
            perm = [i for i in range(3) if i != k] + [k]
            return tuple(tuple(A[perm[i]][perm[j]] for j in range(3)) for i in range(3)), perm
    return A, [0, 1, 2]


def _slow_points(A, X, lower):
    As, perm = _sweep_matrix(_matrix(A))
    arr, n = K.slow_list(np.array(As, dtype=np.int64), int(X), int(lower), 1 << 16)
    if n > arr.shape[0]:
        arr, n = K.slow_list(np.array(As, dtype=np.int64), int(X), int(lower), n)
    pts = []
    for row in arr[:n]:
        x = [0, 0, 0]
        for i in range(3):
            x[perm[i]] = int(row[i])
        pts.append(make_primitive(x).coords)
    return sorted(pts)


def count_conic_points(f, X, lower=0, method="fast", zero=None) -> int:
    """Sign-normalized primitive zeros with lower < ||x|| <= X."""
    A = _matrix(f)
    if det3(A) == 0:
        raise SingularForm("singular form")
    X, lower = int(math.floor(X)), int(lower)
    if X <= lower or X < 1:
        return 0
    if method == "slow":
        As, _ = _sweep_matrix(A)
        return int(K.slow_count(np.array(As, dtype=np.int64), X, lower))
    if zero is None:
        if not is_locally_solvable(A):
            return 0
        zero = find_zero(A)
        if zero is None:
            return 0
    P = parametrize(A, zero.coords if hasattr(zero, "coords") else zero)
    return param_count(P, X, lower)[0]


def kappa_consistency(f) -> bool:
    """kappa = 0 forces no zeros up to height 50 and an obstruction at a finite odd place."""
    A = _primitive_matrix(_matrix(f))
    if kappa_matrix(A) != 0:
        return True
    if count_conic_points(A, 50, 0, method="slow") != 0:
        return False
    return any(v not in (INF, 2) for v in local_obstructions(A))
