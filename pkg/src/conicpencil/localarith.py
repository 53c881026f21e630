"""Congruence counts, local symbols and p-adic densities of the surface."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd

import numpy as np

from . import _lockernels as K
from .classify import mscheme, rho as rho_of
from .errors import (BadPrimeSkipped, BudgetExceeded, HypothesisViolated, OddPrimeRequired,
                     SingularFiber, StabilizationUncertain)
from .forms import Pencil, adjugate3, det3, fiber_matrix, make_primitive, minors2
from .nt import factorint, legendre, phi, primes_upto, tau_k
from .padic import count_zeros_primitive, count_zeros_total, jordan_blocks

SWEEP_BUDGET = 1000          # plain x-sweeps mod composite m cost m^3
PP_BUDGET = 50000            # projective sweeps mod p^k cost about p^(2k)


@dataclass
class LocalData:
    p: int
    fM: list = field(default_factory=list)
    fC: list = field(default_factory=list)
    fD: list = field(default_factory=list)
    fS: list = field(default_factory=list)
    tau_p: Fraction | None = None
    stabilized_at: int | None = None


@dataclass
class FiberLocalData:
    y: tuple
    C_y: int
    D_y: int
    kappa: int
    chi_by_p: dict
    chi_infty: int


@dataclass
class TauResult:
    value: Fraction
    varpi: Fraction
    fM: list
    stabilized_at: int
    certified: bool


def _mats(p: Pencil, m: int):
    A0 = np.array(p.q0.matrix, dtype=np.int64) % m
    A1 = np.array(p.q1.matrix, dtype=np.int64) % m
    return A0, A1


def _prime_power(m):
    f = factorint(m)
    if len(f) == 1:
        (q, k), = f.items()
        return q, k
    return None


def count_lin_primitive(A0: int, A1: int, p: int, k: int, brute: bool = False) -> int:
    pk = p ** k
    g = gcd(gcd(A0, A1), pk)
    j = 0
    while g % p == 0:
        g //= p
        j += 1
    if j >= k:
        raise HypothesisViolated("p^k divides both coefficients")
    if brute:
        if pk > 64:
            raise BudgetExceeded("brute linear count only for p^k <= 64")
        return int(K.brute_lin(A0 % pk, A1 % pk, pk))
    return p ** j * (pk - pk // p)


# ---------------------------------------------------------------------------
# f_S, f_M, f_C, f_D

@lru_cache(maxsize=None)
def _pp_x(pencil, q, k):
    if q ** k > PP_BUDGET:
        raise BudgetExceeded(f"{q}^{k} above the projective sweep budget")
    A0, A1 = _mats(pencil, q ** k)
    return K.pp_counts_x(A0, A1, q, k)


def _split(m):
    return [(q, k) for q, k in factorint(m).items()]


def fS(p: Pencil, m: int) -> int:
    pp = _prime_power(m)
    if pp:
        s, _ = _pp_x(p, *pp)
        return int(s)
    if m > SWEEP_BUDGET:
        return math.prod(fS(p, q ** k) for q, k in _split(m))
    A0, A1 = _mats(p, m)
    parts = _split(m)
    tot = int(K.gen_fS(A0, A1, m, np.array([q for q, _ in parts], dtype=np.int64),
                       np.array([k for _, k in parts], dtype=np.int64)))
    ph = phi(m)
    assert tot % (ph * ph) == 0
    return tot // (ph * ph)


def fM(p: Pencil, m: int) -> int:
    pp = _prime_power(m)
    if pp:
        _, c = _pp_x(p, *pp)
        return int(c)
    if m > SWEEP_BUDGET:
        return math.prod(fM(p, q ** k) for q, k in _split(m))
    A0, A1 = _mats(p, m)
    tot = int(K.gen_fM(A0, A1, m))
    assert tot % phi(m) == 0
    return tot // phi(m)


def fC(p: Pencil, m: int) -> int:
    c = np.array(p.cubic.coeffs, dtype=np.int64) % m
    pp = _prime_power(m)
    if pp:
        if m > 10 ** 6:
            raise BudgetExceeded("f_C modulus too large")
        return int(K.pp_fC(c, *pp))
    if m > 10 ** 4:
        return math.prod(fC(p, q ** k) for q, k in _split(m))
    tot = int(K.gen_fC(c, m))
    assert tot % phi(m) == 0
    return tot // phi(m)


def _y_classes(p: Pencil, m: int):
    """One representative per unit-orbit of primitive y mod m with C(y) = 0 mod m."""
    reps = []
    seen = set()
    units = [u for u in range(1, m) if gcd(u, m) == 1] if m > 1 else [0]
    cub = p.cubic
    for y0 in range(m):
        for y1 in range(m):
            if gcd(gcd(y0, y1), m) != 1 or cub((y0, y1)) % m:
                continue
            if (y0, y1) in seen:
                continue
            orbit = {((u * y0) % m, (u * y1) % m) for u in units}
            seen |= orbit
            reps.append((y0, y1))
    return reps


def fD(p: Pencil, m: int) -> int:
    pp = _prime_power(m)
    if pp:
        q, k = pp
        if m > PP_BUDGET:
            raise BudgetExceeded("f_D modulus too large")
        tot = 0
        for y in _y_classes(p, m):
            A = np.array(fiber_matrix(p, y), dtype=np.int64) % m
            tot += int(K.pp_proj_zero_count(A, q, k))
        return tot
    if m > SWEEP_BUDGET:
        return math.prod(fD(p, q ** k) for q, k in _split(m))
    tot = 0
    for y in _y_classes(p, m):
        A = np.array(fiber_matrix(p, y), dtype=np.int64) % m
        tot += int(K.count_x_for_form(A, m))
    assert tot % phi(m) == 0
    return tot // phi(m)


def fM_lifted(p: Pencil, q: int, kmax: int):
    """f_M(q^j) for j = 1..kmax by lifting projective solutions, plus Jacobian data.

    Returns (values, s_max) where s_max[j-1] is the largest valuation over the
    solutions mod q^j of the gcd of the 2x2 Jacobian minors (capped at j).
    """
    A0, A1 = p.q0.matrix, p.q1.matrix

    def Q(A, x):
        return sum(A[i][j] * x[i] * x[j] for i in range(3) for j in range(3))

    def grad(A, x):
        return [2 * sum(A[i][j] * x[j] for j in range(3)) for i in range(3)]

    sols = []
    for x in _proj_reps(q, 1):
        if Q(A0, x) % q == 0 and Q(A1, x) % q == 0:
            sols.append(x)
    values, smax = [], []
    j = 1
    while True:
        mod = q ** j
        values.append(len(sols))
        s = 0
        for x in sols:
            g0, g1 = grad(A0, x), grad(A1, x)
            mins = [g0[a] * g1[b] - g0[b] * g1[a] for a, b in ((0, 1), (1, 2), (2, 0))]
            v = min(_vcap(t % mod, q, j) for t in mins)
            s = max(s, v)
        smax.append(s)
        if j == kmax:
            break
        nxt = []
        mod1 = mod * q
        for x in sols:
            # the normalized coordinate is the first unit coordinate, equal to 1
            fixed = next(i for i in range(3) if x[i] % q)
            free = [i for i in range(3) if i != fixed]
            for s0 in range(q):
                for s1 in range(q):
                    z = list(x)
                    z[free[0]] += mod * s0
                    z[free[1]] += mod * s1
                    if Q(A0, z) % mod1 == 0 and Q(A1, z) % mod1 == 0:
                        nxt.append(tuple(z))
        sols = nxt
        j += 1
    return values, smax


def _vcap(n, q, cap):
    if n == 0:
        return cap
    v = 0
    while n % q == 0 and v < cap:
        n //= q
        v += 1
    return v


def _proj_reps(q, k):
    m = q ** k
    out = [(1, a, b) for a in range(m) for b in range(m)]
    out += [(q * c, 1, b) for c in range(m // q) for b in range(m)]
    out += [(q * c, q * d, 1) for c in range(m // q) for d in range(m // q)]
    return out


# ---------------------------------------------------------------------------
# fibre symbols

def _fiber(p, y):
    y = make_primitive(y).coords
    return y, fiber_matrix(p, y)


def chi_p(p: Pencil, y, q: int) -> int:
    if q == 2:
        raise OddPrimeRequired("chi(p; y) needs an odd prime")
    _, A = _fiber(p, y)
    blocks = jordan_blocks(A, q, 1)
    diag = [b[0][0] % q for b in blocks]
    nz = [d for d in diag if d]
    if len(nz) != 2:
        return 0
    return legendre(-nz[0] * nz[1], q)


def chi_p_adj(A, q) -> int:
    """Same symbol through the adjugate: rank 2 gives adj = lambda k k^T."""
    if det3(A) % q:
        return 0
    adj = adjugate3(A)
    for i in range(3):
        if adj[i][i] % q:
            return legendre(-adj[i][i], q)
    return 0


def chi_infty_matrix(A) -> int:
    d = det3(A)
    if d == 0:
        return 0
    m1 = A[0][0]
    m2 = A[0][0] * A[1][1] - A[0][1] * A[1][0]
    if m1 > 0 and m2 > 0 and d > 0:
        return -1
    if m1 < 0 and m2 > 0 and d < 0:
        return -1
    return 1


def chi_infty(p: Pencil, y) -> int:
    _, A = _fiber(p, y)
    return chi_infty_matrix(A)


def D_y(p: Pencil, y) -> int:
    _, A = _fiber(p, y)
    if det3(A) == 0:
        raise SingularFiber("C(y) = 0")
    g = 0
    for t in minors2(A):
        g = gcd(g, t)
    return g


def kappa_matrix(A, fac=None) -> int:
    d = det3(A)
    if d == 0:
        raise SingularFiber("singular form")
    fac = factorint(d) if fac is None else fac
    k = 1
    for q, e in fac.items():
        if q == 2 or e >= 2:
            k *= e + 1
        else:
            k *= 1 + chi_p_adj(A, q)
    return k


def kappa(p: Pencil, y) -> int:
    _, A = _fiber(p, y)
    return kappa_matrix(A)


def fiber_local_data(p: Pencil, y) -> FiberLocalData:
    y, A = _fiber(p, y)
    c = det3(A)
    if c == 0:
        raise SingularFiber("C(y) = 0")
    fac = factorint(c)
    chis = {q: chi_p(p, y, q) for q in fac if q != 2}
    return FiberLocalData(y, c, D_y(p, y), kappa_matrix(A, fac), chis, chi_infty_matrix(A))


def sigma_star(p: Pencil, m: int, y) -> Fraction:
    _, A = _fiber(p, y)
    val = Fraction(1)
    for q, k in factorint(m).items():
        if q ** k > 2 ** 16:
            raise BudgetExceeded("sigma* modulus too large")
        val *= Fraction(count_zeros_primitive(A, q, k), q ** (2 * k))
    return val


def sigma_star_brute(p: Pencil, m: int, y) -> Fraction:
    _, A = _fiber(p, y)
    if m > 200:
        raise BudgetExceeded("brute sigma* only for m <= 200")
    arr = np.array(A, dtype=np.int64) % m
    return Fraction(int(K.count_x_for_form(arr, m)), m * m)


def stabilization_exponent(q: int, d: int) -> int:
    return 2 * d + 3 if q == 2 else 2 * d + 1


def _sigma_simple_odd(A, q: int) -> Fraction:
    # q odd, q || det: Q mod q has rank 2 and only its smooth zeros lift, giving
    # (1 + e)(q - 1)/q with e the quadratic character of minus the nonzero 2x2 minor
    for i, j in ((0, 1), (0, 2), (1, 2)):
        m = (A[i][i] * A[j][j] - A[i][j] ** 2) % q
        if m:
            e = legendre(-m % q, q)
            return Fraction((1 + e) * (q - 1), q)
    raise ValueError("rank below 2 mod q")


def sigma_p_fiber(p: Pencil, y, q: int, verify: bool = True) -> Fraction:
    y, A = _fiber(p, y)
    c = det3(A)
    if c == 0:
        raise SingularFiber("C(y) = 0")
    d = 0
    while c % q == 0:
        c //= q
        d += 1
    k = stabilization_exponent(q, d)
    if q ** k > 2 ** 15:
        if q == 2 or d != 1:
            raise BudgetExceeded("stabilization exponent beyond budget")
        return _sigma_simple_odd(A, q)
    val = Fraction(count_zeros_primitive(A, q, k), q ** (2 * k))
    if verify and q ** (k + 1) <= 2 ** 15:
        nxt = Fraction(count_zeros_primitive(A, q, k + 1), q ** (2 * k + 2))
        assert nxt == val, (y, q, k)
    return val


# ---------------------------------------------------------------------------
# densities

def quartic_roots_mod(f, primes):
    return K.quartic_root_counts(np.array(f, dtype=np.int64), np.asarray(primes, dtype=np.int64))


@lru_cache(maxsize=None)
def bad_number(p: Pencil) -> int:
    """Product of primes where the base locus may fail to be etale.

    Any prime not dividing this number reduces M to four distinct geometric
    points, so Hensel lifting gives f_M(q^j) = f_M(q).
    """
    from .classify import binary_disc
    bt = mscheme(p)
    f = bt.quartic
    n = 6 * f[0] * f[4] * binary_disc(f) * p.cubic.disc
    return abs(n)


def bad_primes(p: Pencil):
    return sorted(factorint(bad_number(p)))


def varpi_from_fM(q: int, values) -> Fraction:
    """1 + 1/q + 1/q^2 + (1 - 1/q) sum_j f_M(q^j)/q^j, tail constant = last value."""
    s = Fraction(0)
    for j, v in enumerate(values[:-1], start=1):
        s += Fraction(v, q ** j)
    J = len(values)
    s += Fraction(values[-1], q ** J) * Fraction(q, q - 1)
    return 1 + Fraction(1, q) + Fraction(1, q * q) + (1 - Fraction(1, q)) * s


def tau_p(p: Pencil, q: int, rho: int | None = None, kmax: int = 12, strict=False) -> TauResult:
    rho = rho_of(p) if rho is None else rho
    if bad_number(p) % q:
        c = int(quartic_roots_mod(mscheme(p).quartic, [q])[0]) if q > 1000 else fM(p, q)
        varpi = 1 + Fraction(c + 1, q) + Fraction(1, q * q)
        return TauResult((1 - Fraction(1, q)) ** rho * varpi, varpi, [c], 1, True)
    values, smax = fM_lifted(p, q, kmax)
    stab, cert = None, False
    for j in range(1, len(values)):
        if values[j] == values[j - 1] and j >= 2 * smax[j - 1] + 1:
            # the solution set mod q^j has Jacobian valuation <= s with j >= 2s+1
            if all(v == values[j] for v in values[j:]):
                stab, cert = j, True
                break
    if stab is None:
        if strict:
            raise StabilizationUncertain(f"f_M(q^j) not certified stable at q={q}")
        stab = len(values)
    varpi = varpi_from_fM(q, values[:stab])
    return TauResult((1 - Fraction(1, q)) ** rho * varpi, varpi, values[:stab], stab, cert)


def varpi_truncated(p: Pencil, q: int, k: int) -> Fraction:
    return Fraction(fS(p, q ** k), q ** (2 * k))


def hatS(p: Pencil, q: int, k: int) -> int:
    """Unrestricted count of (x, y) mod q^k on the surface, by gcd strata of y."""
    m = q ** k
    total = m ** 3                  # y = 0
    for b in range(k):
        j = k - b
        for v in _p1_reps(q, j):
            A = fiber_matrix(p, v)
            # x mod q^k with q^b Q_v(x) = 0 mod q^k
            total += phi(q ** j) * q ** (3 * b) * count_zeros_total(A, q, j)
    return total


def hatS_brute(p: Pencil, q: int, k: int) -> int:
    m = q ** k
    if m > 16:
        raise BudgetExceeded("brute Shat only for q^k <= 16")
    A0, A1 = _mats(p, m)
    cnt = 0
    for y0 in range(m):
        for y1 in range(m):
            A = (y0 * A0 + y1 * A1) % m
            cnt += int(_all_x(A, m))
    return cnt


def _all_x(A, m):
    from .padic import brute_count_zeros
    return brute_count_zeros(A, m, 0)


def _p1_reps(q, j):
    m = q ** j
    return [(1, t) for t in range(m)] + [(q * t, 1) for t in range(m // q)]


def varpi_congruence(p: Pencil, q: int, qmod: int, a, b, n: int) -> Fraction:
    e = 0
    t = qmod
    while t % q == 0:
        t //= q
        e += 1
    if e > n:
        raise BudgetExceeded("n must be at least the q-adic valuation of the modulus")
    if q ** n > 2000:
        raise BudgetExceeded("congruence density sweep too large")
    a = make_primitive(a).coords
    b = make_primitive(b).coords
    qe = q ** e
    ys = []
    for y in _p1_reps(q, n):
        if e and not _same_class(y, b, qe):
            continue
        ys.append(y)
    if not ys:
        return Fraction(0)
    m = q ** n
    A0, A1 = _mats(p, m)
    ya = np.array([y[0] for y in ys], dtype=np.int64)
    yb = np.array([y[1] for y in ys], dtype=np.int64)
    cnt = int(K.congr_pairs(A0, A1, q, n, ya, yb, a[0] % m, a[1] % m, a[2] % m, e))
    return Fraction(cnt, q ** (2 * n))


def _same_class(v, w, mod):
    """Is v = lambda w mod `mod` for some lambda?"""
    return any(all((vi - lam * wi) % mod == 0 for vi, wi in zip(v, w)) for lam in range(mod))


# ---------------------------------------------------------------------------
# identities and diagnostics

def identity_suite(p: Pencil, primes, max_k: int):
    entries = []
    disc = p.cubic.disc
    for q in primes:
        for k in range(1, max_k + 1):
            lhs = Fraction(fS(p, q ** k), q ** (2 * k))
            fm = [fM(p, q ** j) for j in range(1, k + 1)]
            rhs = (1 + Fraction(1, q) + Fraction(1, q * q) + Fraction(fm[-1], q ** (k + 1))
                   + (1 - Fraction(1, q)) * sum(Fraction(v, q ** j) for j, v in enumerate(fm, 1)))
            entries.append({"identity": "fS_from_fM", "p": q, "k": k, "lhs": str(lhs),
                            "rhs": str(rhs), "pass": lhs == rhs})
            # linear congruence count: formula against brute force, small moduli
            if q ** k <= 64:
                ok = True
                for A0 in range(q ** k):
                    for A1 in range(q ** k):
                        if gcd(gcd(A0, A1), q ** k) == q ** k:
                            continue
                        ok &= (count_lin_primitive(A0, A1, q, k)
                               == count_lin_primitive(A0, A1, q, k, brute=True))
                entries.append({"identity": "linear_count", "p": q, "k": k, "pass": ok})
        fmq, fcq, fdq = fM(p, q), fC(p, q), fD(p, q)
        lhs = q * fmq + (q + 1) * fcq
        entries.append({"identity": "fD_relation", "p": q, "k": 1, "lhs": lhs, "rhs": fdq + q,
                        "pass": lhs == fdq + q})
        if disc % q == 0:
            entries.append({"identity": "chi_sums", "p": q, "k": 1, "pass": None,
                            "note": "not applicable: p divides Disc(C)"})
        else:
            roots = [y for y in _p1_reps(q, 1) if p.cubic(y) % q == 0]
            chis = [chi_p(p, y, q) for y in roots]
            ok = (fmq == 1 + sum(chis)
                  and fmq + fcq == 1 + sum(1 + c for c in chis)
                  and fdq == fcq + q * sum(1 + c for c in chis))
            entries.append({"identity": "chi_sums", "p": q, "k": 1, "pass": ok})
    return entries


def fM_vs_quartic_roots(p: Pencil, q: int):
    if bad_number(p) % q == 0:
        raise BadPrimeSkipped(f"{q} divides the bad-prime product")
    roots = int(quartic_roots_mod(mscheme(p).quartic, [q])[0])
    val = fM(p, q)
    return {"p": q, "fM": val, "quartic_roots": roots, "pass": val == roots}


def tauk_inequality(n: int, k1: int, k2: int) -> bool:
    lhs = tau_k(n, k1) * tau_k(n, k2)
    rhs = tau_k(n, k1 * k2)
    assert lhs <= rhs
    return lhs <= rhs


@dataclass
class SeriesResult:
    value: float
    band: float
    trace: list
    flagged: list


def singular_series_global(p: Pencil, P: int) -> SeriesResult:
    import bisect
    rho = rho_of(p)
    bt = mscheme(p)
    primes = primes_upto(P)
    bad = bad_number(p)
    roots = quartic_roots_mod(bt.quartic, primes)
    logs, flagged = [], []
    for q, r in zip(primes, roots):
        if bad % q == 0:
            res = tau_p(p, q, rho)
            t = float(res.value)
            if not res.certified:
                flagged.append(q)
        else:
            t = (1 - 1 / q) ** rho * (1 + (int(r) + 1) / q + 1 / (q * q))
        logs.append(math.log(t) if t > 0 else -math.inf)
    cum = np.cumsum(logs)
    marks = sorted({2 ** j for j in range(1, int(math.log2(P)) + 1)} | {P})
    trace = [(c, float(math.exp(cum[bisect.bisect_right(primes, c) - 1]))) for c in marks]
    value = float(math.exp(cum[-1]))
    # heuristic tail band c / log P, with c from the spread of the partial products
    cst = 0.0
    for x, s in trace:
        if math.sqrt(P) <= x < P and s > 0:
            cst = max(cst, abs(math.log(value / s)) * math.log(x))
    band = cst / math.log(P)
    return SeriesResult(value, band, trace, flagged)


def singular_series_fiber(p: Pencil, y, P: int = 1000) -> float:
    y, A = _fiber(p, y)
    c = det3(A)
    if c == 0:
        raise SingularFiber("C(y) = 0")
    bad = set(factorint(2 * c))
    val = 1.0
    for q in bad:
        s = sigma_p_fiber(p, y, q, verify=False)
        if s == 0:
            return 0.0
        val *= float(s)
    for q in primes_upto(P):
        if q not in bad:
            val *= 1 - 1 / (q * q)
    tail = (6 / math.pi ** 2)
    for q in primes_upto(P):
        tail /= 1 - 1 / (q * q)
    return val * tail
