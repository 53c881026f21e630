"""numba kernels for congruence counts modulo m."""
import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _q(A, x0, x1, x2, m):
    return (A[0, 0] * (x0 * x0 % m) + A[1, 1] * (x1 * x1 % m) + A[2, 2] * (x2 * x2 % m)
            + 2 * (A[0, 1] * (x0 * x1 % m) + A[0, 2] * (x0 * x2 % m)
                   + A[1, 2] * (x1 * x2 % m))) % m


@njit(cache=True, inline="always")
def _vp(n, p, k):
    # valuation of n mod p^k, capped at k
    if n == 0:
        return k
    v = 0
    while n % p == 0 and v < k:
        n //= p
        v += 1
    return v


@njit(cache=True)
def _gcd(a, b):
    a = abs(a)
    b = abs(b)
    while b:
        a, b = b, a % b
    return a


@njit(cache=True)
def pp_counts_x(A0, A1, p, k):
    """Sweep projective reps x mod p^k.

    Returns (sum over reps of #y / phi(p^k), number of reps with Q0 = Q1 = 0)
    where #y counts primitive y with y0 Q0(x) + y1 Q1(x) = 0 mod p^k.
    """
    m = p ** k
    pk1 = p ** (k - 1)
    full = pk1 * (p + 1)
    s_sum = 0
    m_cnt = 0
    for typ in range(3):
        if typ == 0:
            n1, n2 = m, m
        elif typ == 1:
            n1, n2 = pk1, m
        else:
            n1, n2 = pk1, pk1
        for i in range(n1):
            for j in range(n2):
                if typ == 0:
                    x0, x1, x2 = 1, i, j
                elif typ == 1:
                    x0, x1, x2 = p * i, 1, j
                else:
                    x0, x1, x2 = p * i, p * j, 1
                a = _q(A0, x0, x1, x2, m)
                b = _q(A1, x0, x1, x2, m)
                v = min(_vp(a, p, k), _vp(b, p, k))
                if v >= k:
                    m_cnt += 1
                    s_sum += full
                else:
                    s_sum += p ** v
    return s_sum, m_cnt


@njit(cache=True)
def pp_fC(c, p, k):
    m = p ** k
    cnt = 0
    for t in range(m):
        y0, y1 = 1, t
        v = (c[0] * (y0 * y0 % m * y0 % m) + c[1] * (y0 * y0 % m * y1 % m)
             + c[2] * (y0 * y1 % m * y1 % m) + c[3] * (y1 * y1 % m * y1 % m)) % m
        if v == 0:
            cnt += 1
    for t in range(p ** (k - 1)):
        y0, y1 = p * t, 1
        v = (c[0] * (y0 * y0 % m * y0 % m) + c[1] * (y0 * y0 % m * y1 % m)
             + c[2] * (y0 * y1 % m * y1 % m) + c[3] * (y1 * y1 % m * y1 % m)) % m
        if v == 0:
            cnt += 1
    return cnt


@njit(cache=True)
def pp_proj_zero_count(A, p, k):
    """Number of projective reps x mod p^k with x^T A x = 0 mod p^k."""
    m = p ** k
    pk1 = p ** (k - 1)
    cnt = 0
    for typ in range(3):
        if typ == 0:
            n1, n2 = m, m
        elif typ == 1:
            n1, n2 = pk1, m
        else:
            n1, n2 = pk1, pk1
        for i in range(n1):
            for j in range(n2):
                if typ == 0:
                    x0, x1, x2 = 1, i, j
                elif typ == 1:
                    x0, x1, x2 = p * i, 1, j
                else:
                    x0, x1, x2 = p * i, p * j, 1
                if _q(A, x0, x1, x2, m) == 0:
                    cnt += 1
    return cnt


@njit(cache=True)
def gen_fM(A0, A1, m):
    """Primitive x mod m with Q0 = Q1 = 0 mod m (plain sweep)."""
    cnt = 0
    for x0 in range(m):
        for x1 in range(m):
            g01 = _gcd(_gcd(x0, x1), m)
            for x2 in range(m):
                if _gcd(g01, x2) != 1:
                    continue
                if _q(A0, x0, x1, x2, m) == 0 and _q(A1, x0, x1, x2, m) == 0:
                    cnt += 1
    return cnt


@njit(cache=True)
def gen_fC(c, m):
    cnt = 0
    for y0 in range(m):
        for y1 in range(m):
            if _gcd(_gcd(y0, y1), m) != 1:
                continue
            v = (c[0] * (y0 * y0 % m * y0 % m) + c[1] * (y0 * y0 % m * y1 % m)
                 + c[2] * (y0 * y1 % m * y1 % m) + c[3] * (y1 * y1 % m * y1 % m)) % m
            if v == 0:
                cnt += 1
    return cnt


@njit(cache=True)
def gen_fS(A0, A1, m, ps, ks):
    """Sum over primitive x mod m of the number of primitive y mod m on the line.

    The y count is the product over p^k || m of the single-prime-power count.
    """
    total = 0
    for x0 in range(m):
        for x1 in range(m):
            g01 = _gcd(_gcd(x0, x1), m)
            for x2 in range(m):
                if _gcd(g01, x2) != 1:
                    continue
                a = _q(A0, x0, x1, x2, m)
                b = _q(A1, x0, x1, x2, m)
                cnt = 1
                for t in range(ps.shape[0]):
                    p = ps[t]
                    k = ks[t]
                    pk = p ** k
                    v = min(_vp(a % pk, p, k), _vp(b % pk, p, k))
                    if v >= k:
                        cnt *= pk * pk - pk * pk // (p * p)
                    else:
                        cnt *= p ** v * (pk - pk // p)
                total += cnt
    return total


@njit(cache=True)
def count_x_for_form(A, m):
    """Primitive x mod m with x^T A x = 0 mod m."""
    cnt = 0
    for x0 in range(m):
        for x1 in range(m):
            g01 = _gcd(_gcd(x0, x1), m)
            for x2 in range(m):
                if _gcd(g01, x2) != 1:
                    continue
                if _q(A, x0, x1, x2, m) == 0:
                    cnt += 1
    return cnt


@njit(cache=True)
def brute_lin(A0, A1, m):
    cnt = 0
    for y0 in range(m):
        for y1 in range(m):
            if _gcd(_gcd(y0, y1), m) != 1:
                continue
            if (A0 * y0 + A1 * y1) % m == 0:
                cnt += 1
    return cnt


@njit(cache=True)
def quartic_root_counts(f, primes):
    """Projective roots mod p of the binary quartic sum f_i X^(4-i) Y^i, for each p."""
    out = np.zeros(primes.shape[0], dtype=np.int64)
    for t in range(primes.shape[0]):
        p = primes[t]
        c0, c1, c2, c3, c4 = f[0] % p, f[1] % p, f[2] % p, f[3] % p, f[4] % p
        cnt = 1 if c0 == 0 else 0
        for s in range(p):
            v = (((c0 * s + c1) % p * s + c2) % p * s + c3) % p * s % p
            v = (v + c4) % p
            if v == 0:
                cnt += 1
        out[t] = cnt
    return out


@njit(cache=True)
def congr_pairs(A0, A1, p, n, ya, yb, ax, ay, az, e):
    """Projective pairs mod p^n with [x] = [a] and [y] = [b] mod p^e and Q_y(x) = 0.

    ya/yb hold the y reps already filtered by class; the x class test is done here.
    """
    m = p ** n
    pk1 = p ** (n - 1)
    qe = p ** e
    # a unit coordinate of a
    ia = 0
    if ax % p == 0:
        ia = 1 if ay % p != 0 else 2
    av = (ax, ay, az)
    ainv = 1
    if e > 0:
        ainv = 0
        for t in range(1, qe):
            if (av[ia] * t) % qe == 1:
                ainv = t
                break
    cnt = 0
    for typ in range(3):
        if typ == 0:
            n1, n2 = m, m
        elif typ == 1:
            n1, n2 = pk1, m
        else:
            n1, n2 = pk1, pk1
        for i in range(n1):
            for j in range(n2):
                if typ == 0:
                    x0, x1, x2 = 1, i, j
                elif typ == 1:
                    x0, x1, x2 = p * i, 1, j
                else:
                    x0, x1, x2 = p * i, p * j, 1
                if e > 0:
                    xv = (x0, x1, x2)
                    lam = xv[ia] * ainv % qe
                    if (x0 - lam * ax) % qe or (x1 - lam * ay) % qe or (x2 - lam * az) % qe:
                        continue
                a = _q(A0, x0, x1, x2, m)
                b = _q(A1, x0, x1, x2, m)
                for r in range(ya.shape[0]):
                    if (ya[r] * a + yb[r] * b) % m == 0:
                        cnt += 1
    return cnt
