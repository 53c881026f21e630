"""numba kernels for the hyperbola-method point counts."""
import numpy as np
from numba import njit

from ._conickernels import _gcd, _rung, _region_ok, _x_class_ok


@njit(cache=True, inline="always")
def _q(A, x0, x1, x2):
    return (A[0, 0] * x0 * x0 + A[1, 1] * x1 * x1 + A[2, 2] * x2 * x2
            + 2 * (A[0, 1] * x0 * x1 + A[0, 2] * x0 * x2 + A[1, 2] * x1 * x2))


@njit(cache=True, inline="always")
def _is_root(y0, y1, roots):
    for i in range(roots.shape[0]):
        if roots[i, 0] == y0 and roots[i, 1] == y1:
            return True
    return False


@njit(cache=True, inline="always")
def _y_class_ok(y0, y1, q, b0, b1):
    if q == 1:
        return True
    for lam in range(q):
        if (y0 - lam * b0) % q == 0 and (y1 - lam * b1) % q == 0:
            return True
    return False


@njit(cache=True)
def n1_sweep(A0, A1, R, x0lo, x0hi, Bmax, rungs, out, roots, hints,
             filt, gam, q, acls, bcls):
    """Sweep sign-normalized primitive x with x0 in [x0lo, x0hi) and H(x) <= R.

    Each x off the base locus gives y = (-Q1(x), Q0(x)) / gcd.  Pairs with C(y) != 0,
    H(x) <= H(y) and H(x) H(y) <= Bmax are binned into out by rung.  Whenever
    H(y)^2 < Bmax, x is recorded as a zero of the fiber Q_y in hints[y0, y1 + R]
    (first one found wins).  Returns the number of primitive x that pass the gcd test.
    """
    seen = 0
    for x0 in range(x0lo, x0hi):
        x1lo = -R if x0 > 0 else 0
        for x1 in range(x1lo, R + 1):
            if x0 == 0 and x1 == 0:
                x2lo, x2hi = 1, 1
            else:
                x2lo, x2hi = -R, R
            g01 = _gcd(x0, x1)
            for x2 in range(x2lo, x2hi + 1):
                a = _q(A0, x0, x1, x2)
                b = _q(A1, x0, x1, x2)
                if a == 0 and b == 0:
                    continue
                hx = max(abs(x0), abs(x1), abs(x2))
                # Euclid with early exit: H(y) = max(|a|, |b|) / g is only useful when
                # g >= max(|a|, |b|) H(x) / Bmax, and g never exceeds a nonzero remainder
                need = max(abs(a), abs(b)) * hx
                u, v = abs(a), abs(b)
                while v != 0 and v * Bmax >= need:
                    u, v = v, u % v
                if v != 0:
                    continue
                if u * Bmax < need:
                    continue
                # primitivity is checked only on the few survivors
                if _gcd(g01, x2) != 1:
                    continue
                seen += 1
                g = u
                y0 = -b // g
                y1 = a // g
                if y0 < 0 or (y0 == 0 and y1 < 0):
                    y0 = -y0
                    y1 = -y1
                hy = max(abs(y0), abs(y1))
                if hy * hy < Bmax and hy <= R:
                    k = y1 + R
                    if hints[y0, k, 0] == 0 and hints[y0, k, 1] == 0 and hints[y0, k, 2] == 0:
                        hints[y0, k, 0] = x0
                        hints[y0, k, 1] = x1
                        hints[y0, k, 2] = x2
                if hx > hy or hx * hy > Bmax:
                    continue
                if _is_root(y0, y1, roots):
                    continue
                if filt:
                    if not _region_ok(x0, x1, x2, gam):
                        continue
                    if not _x_class_ok(x0, x1, x2, q, acls[0], acls[1], acls[2]):
                        continue
                    if not _y_class_ok(y0, y1, q, bcls[0], bcls[1]):
                        continue
                out[_rung(hx * hy, rungs)] += 1
    return seen


@njit(cache=True)
def fiber_list(R, Bmax, roots, filt, q, bcls):
    """Sign-normalized primitive y with H(y)^2 < Bmax, H(y) <= R, off the roots of C."""
    n = 0
    cap = 16
    res = np.zeros((cap, 2), dtype=np.int64)
    for y0 in range(0, R + 1):
        for y1 in range(-R if y0 > 0 else 1, R + 1):
            hy = max(y0, abs(y1))
            if hy * hy >= Bmax:
                continue
            if _gcd(y0, y1) != 1 or _is_root(y0, y1, roots):
                continue
            if filt and not _y_class_ok(y0, y1, q, bcls[0], bcls[1]):
                continue
            if n == cap:
                cap *= 2
                new = np.zeros((cap, 2), dtype=np.int64)
                new[:n] = res[:n]
                res = new
            res[n, 0] = y0
            res[n, 1] = y1
            n += 1
    return res[:n]


@njit(cache=True)
def trial_factor(n, primes):
    """Prime factors of |n| by trial division; returns (primes, exponents, cofactor)."""
    n = abs(n)
    ps = np.zeros(64, dtype=np.int64)
    es = np.zeros(64, dtype=np.int64)
    k = 0
    for i in range(primes.shape[0]):
        p = primes[i]
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            ps[k] = p
            es[k] = e
            k += 1
    if n > 1:
        ps[k] = n
        es[k] = 1
        k += 1
    return ps[:k], es[:k]


@njit(cache=True)
def brute_pairs(A0, A1, B, roots, rungs, out, filt, gam, q, acls, bcls):
    """Oracle: all sign-normalized primitive (x, y) with H(x)H(y) <= B on the surface, in U."""
    for y0 in range(0, B + 1):
        for y1 in range(-B if y0 > 0 else 1, B + 1):
            hy = max(y0, abs(y1))
            if hy > B or _gcd(y0, y1) != 1 or _is_root(y0, y1, roots):
                continue
            X = B // hy
            for x0 in range(0, X + 1):
                for x1 in range(-X if x0 > 0 else 0, X + 1):
                    lo = -X
                    if x0 == 0 and x1 == 0:
                        lo = 1
                    for x2 in range(lo, X + 1):
                        if _gcd(_gcd(x0, x1), x2) != 1:
                            continue
                        a = _q(A0, x0, x1, x2)
                        b = _q(A1, x0, x1, x2)
                        if y0 * a + y1 * b != 0:
                            continue
                        if a == 0 and b == 0:
                            continue
                        if filt:
                            if not _region_ok(x0, x1, x2, gam):
                                continue
                            if not _x_class_ok(x0, x1, x2, q, acls[0], acls[1], acls[2]):
                                continue
                            if not _y_class_ok(y0, y1, q, bcls[0], bcls[1]):
                                continue
                        hx = max(x0, abs(x1), abs(x2))
                        which = 0 if hx <= hy else 1
                        out[which, _rung(hx * hy, rungs)] += 1
