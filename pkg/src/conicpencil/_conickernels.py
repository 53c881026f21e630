"""numba kernels for zeros of a single ternary quadratic form."""
import math

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _gcd(a, b):
    a = abs(a)
    b = abs(b)
    while b:
        a, b = b, a % b
    return a


@njit(cache=True)
def _isqrt(n):
    if n < 0:
        return -1
    r = np.int64(math.sqrt(float(n)))
    while r * r > n:
        r -= 1
    while (r + 1) * (r + 1) <= n:
        r += 1
    return r


@njit(cache=True, inline="always")
def _sign_ok(x0, x1, x2):
    # first nonzero coordinate positive
    if x0 != 0:
        return x0 > 0
    if x1 != 0:
        return x1 > 0
    return x2 > 0


@njit(cache=True, inline="always")
def _qform(A, x0, x1, x2):
    return (A[0, 0] * x0 * x0 + A[1, 1] * x1 * x1 + A[2, 2] * x2 * x2
            + 2 * (A[0, 1] * x0 * x1 + A[0, 2] * x0 * x2 + A[1, 2] * x1 * x2))


@njit(cache=True)
def _solve_third(A, x0, x1, X, out):
    """Integer x2 with |x2| <= X and Q(x0, x1, x2) = 0; returns how many were written."""
    a = A[2, 2]
    b = 2 * (A[0, 2] * x0 + A[1, 2] * x1)
    c = A[0, 0] * x0 * x0 + 2 * A[0, 1] * x0 * x1 + A[1, 1] * x1 * x1
    n = 0
    if a == 0:
        if b == 0:
            return 0
        if c % b == 0:
            t = -c // b
            if abs(t) <= X:
                out[0] = t
                n = 1
        return n
    disc = b * b - 4 * a * c
    if disc < 0:
        return 0
    s = _isqrt(disc)
    if s * s != disc:
        return 0
    for sg in (1, -1):
        num = -b + sg * s
        if num % (2 * a) == 0:
            t = num // (2 * a)
            if abs(t) <= X and (n == 0 or out[0] != t):
                out[n] = t
                n += 1
        if s == 0:
            break
    return n


@njit(cache=True)
def slow_count(A, X, lower):
    """Sign-normalized primitive zeros with lower < ||x|| <= X; A has A[2,2] != 0 or is handled linearly."""
    cnt = 0
    buf = np.zeros(2, dtype=np.int64)
    for x0 in range(0, X + 1):
        for x1 in range(-X, X + 1):
            if x0 == 0 and x1 == 0:
                # only (0,0,1) can qualify
                if A[2, 2] == 0 and 1 > lower and X >= 1:
                    cnt += 1
                continue
            n = _solve_third(A, x0, x1, X, buf)
            for i in range(n):
                x2 = buf[i]
                if not _sign_ok(x0, x1, x2):
                    continue
                if _gcd(_gcd(x0, x1), x2) != 1:
                    continue
                h = max(abs(x0), abs(x1), abs(x2))
                if h > lower:
                    cnt += 1
    return cnt


@njit(cache=True)
def slow_list(A, X, lower, cap):
    out = np.zeros((cap, 3), dtype=np.int64)
    cnt = 0
    buf = np.zeros(2, dtype=np.int64)
    for x0 in range(0, X + 1):
        for x1 in range(-X, X + 1):
            if x0 == 0 and x1 == 0:
                if A[2, 2] == 0 and 1 > lower and X >= 1:
                    if cnt < cap:
                        out[cnt, 2] = 1
                    cnt += 1
                continue
            n = _solve_third(A, x0, x1, X, buf)
            for i in range(n):
                x2 = buf[i]
                if not _sign_ok(x0, x1, x2):
                    continue
                if _gcd(_gcd(x0, x1), x2) != 1:
                    continue
                h = max(abs(x0), abs(x1), abs(x2))
                if h > lower:
                    if cnt < cap:
                        out[cnt, 0] = x0
                        out[cnt, 1] = x1
                        out[cnt, 2] = x2
                    cnt += 1
    return out, cnt


@njit(cache=True)
def box_min_zero(A, R):
    """A primitive zero of minimal sup-norm inside the box of radius R, or zeros if none."""
    best = np.zeros(3, dtype=np.int64)
    bh = R + 1
    buf = np.zeros(2, dtype=np.int64)
    for x0 in range(0, R + 1):
        for x1 in range(-R, R + 1):
            if max(x0, abs(x1)) > bh:
                continue
            if x0 == 0 and x1 == 0:
                if A[2, 2] == 0 and bh > 1:
                    best[0] = 0
                    best[1] = 0
                    best[2] = 1
                    bh = 1
                continue
            n = _solve_third(A, x0, x1, R, buf)
            for i in range(n):
                x2 = buf[i]
                if not _sign_ok(x0, x1, x2):
                    continue
                if _gcd(_gcd(x0, x1), x2) != 1:
                    continue
                h = max(abs(x0), abs(x1), abs(x2))
                # ties go to the lexicographically largest vector
                if h < bh or (h == bh and (x0 > best[0] or (x0 == best[0] and (
                        x1 > best[1] or (x1 == best[1] and x2 > best[2]))))):
                    bh = h
                    best[0] = x0
                    best[1] = x1
                    best[2] = x2
    return best


@njit(cache=True)
def _quad_le(g, b, a, T, lo, hi):
    """Real v with g v^2 + b v + a <= T intersected with [lo, hi] (g != 0 or b != 0).

    Returns (lo, hi, hole_lo, hole_hi); an empty result has lo > hi, no hole has hole_lo > hole_hi.
    """
    hl, hh = 1.0, -1.0
    if g == 0.0:
        if b > 0:
            hi = min(hi, (T - a) / b)
        elif b < 0:
            lo = max(lo, (T - a) / b)
        elif a > T:
            return 1.0, -1.0, hl, hh
        return lo, hi, hl, hh
    disc = b * b - 4.0 * g * (a - T)
    if disc < 0 or (g < 0 and disc == 0):
        if g > 0:
            return 1.0, -1.0, hl, hh
        return lo, hi, hl, hh
    # numerically stable pair of roots
    s = math.sqrt(disc)
    qq = -0.5 * (b + (s if b >= 0 else -s))
    if qq == 0.0:
        r1 = r2 = 0.0
    else:
        r1 = qq / g
        r2 = (a - T) / qq
    if r1 > r2:
        r1, r2 = r2, r1
    if g > 0:
        return max(lo, r1), min(hi, r2), hl, hh
    # g < 0: complement of an open interval
    return lo, hi, r1, r2


@njit(cache=True)
def _x_class_ok(x0, x1, x2, q, a0, a1, a2):
    if q == 1:
        return True
    for lam in range(q):
        if (x0 - lam * a0) % q == 0 and (x1 - lam * a1) % q == 0 and (x2 - lam * a2) % q == 0:
            return True
    return False


@njit(cache=True, inline="always")
def _fv(coef, i, u, v):
    return coef[i, 0] * u * u + coef[i, 1] * u * v + coef[i, 2] * v * v


@njit(cache=True)
def _pn(coef, u, v):
    # exact max_i |F_i(u, v)|, or -1 if a term could overflow int64
    fu, fv = abs(float(u)), abs(float(v))
    m = 0
    for i in range(3):
        if abs(float(coef[i, 0])) * fu * fu + abs(float(coef[i, 1])) * fu * fv \
                + abs(float(coef[i, 2])) * fv * fv > 4e18:
            return -1
        t = abs(_fv(coef, i, u, v))
        if t > m:
            m = t
    return m


@njit(cache=True)
def reduce_basis(coef, b1u, b1v, b2u, b2v):
    """int64 twin of the exact quasi-norm reduction; ok = False means overflow risk."""
    n1 = _pn(coef, b1u, b1v)
    n2 = _pn(coef, b2u, b2v)
    if n1 < 0 or n2 < 0:
        return False, b1u, b1v, b2u, b2v
    cands = np.zeros(16)
    for _ in range(500):
        if n2 < n1:
            b1u, b1v, b2u, b2v = b2u, b2v, b1u, b1v
            n1, n2 = n2, n1
        nc = 0
        for i in range(3):
            a = _fv(coef, i, b1u, b1v)
            c = _fv(coef, i, b2u, b2v)
            s12 = _pn(coef, b1u + b2u, b1v + b2v)
            if s12 < 0:
                return False, b1u, b1v, b2u, b2v
            bb = float(_fv(coef, i, b1u + b2u, b1v + b2v) - a - c)
            fa, fc = float(a), float(c)
            if a != 0:
                cands[nc] = bb / (2 * fa)
                nc += 1
                disc = bb * bb - 4 * fa * fc
                if disc >= 0:
                    r = math.sqrt(disc)
                    cands[nc] = (bb + r) / (2 * fa)
                    cands[nc + 1] = (bb - r) / (2 * fa)
                    nc += 2
            elif bb != 0:
                cands[nc] = fc / bb
                nc += 1
        best_k = 0
        best = n2
        for j in range(nc):
            if not abs(cands[j]) < 1e15:
                continue
            k0 = int(math.floor(cands[j]))
            for k in range(k0 - 1, k0 + 2):
                if k == 0:
                    continue
                wu = b2u - k * b1u
                wv = b2v - k * b1v
                nw = _pn(coef, wu, wv)
                if nw < 0:
                    return False, b1u, b1v, b2u, b2v
                if nw < best:
                    best = nw
                    best_k = k
        if best_k == 0:
            break
        b2u -= best_k * b1u
        b2v -= best_k * b1v
        n2 = best
    return True, b1u, b1v, b2u, b2v


@njit(cache=True)
def param_scan(rc, b1u, b1v, b2u, b2v, e, dabs, T, X, lower, Hy, rungs, out,
               filt, gam, q, acls, exact=False):
    """Count zeros x = F(u, v) / gcd over one sublattice of the parameter plane.

    (u, v) = s b1 + t b2 runs over the lattice e | u, where rc[i] holds the coefficients
    of F_i(s b1 + t b2) = rc[i,0] s^2 + rc[i,1] s t + rc[i,2] t^2.  Only (u, v) with
    u != 0, gcd(u, v) = 1 and gcd(u, d) = e are used; for them gcd(F) divides a number
    <= T, so the candidates lie in the region max_i |F_i| <= T X, which is star-shaped and
    is scanned slice by slice in s until a slice is empty.  Counted points satisfy
    lower < H(x) <= X and are binned into the first rung with H(x) Hy <= rung.  With filt
    set, also x0 != 0, the box test and the class test modulo q.  Returns -1 when int64
    headroom may be insufficient, unless `exact` is set (pure-Python integer twin).
    """
    holes = np.zeros((6, 2))
    cmax = 0.0
    for i in range(3):
        for j in range(3):
            cmax = max(cmax, abs(float(rc[i, j])))
    Tf = float(T) * float(X)
    Tp = Tf * (1 + 1e-9) + 1.0
    total = 0
    s = -1
    while True:
        s += 1
        fs = float(s)
        lo, hi = -1e300, 1e300
        nh = 0
        empty = False
        for i in range(3):
            al, be, ga = float(rc[i, 0]), float(rc[i, 1]), float(rc[i, 2])
            if be * fs == 0.0 and ga == 0.0:
                if abs(al) * fs * fs > Tp:
                    empty = True
                    break
                continue
            l1, h1, hl1, hh1 = _quad_le(ga, be * fs, al * fs * fs, Tp, lo, hi)
            if l1 > h1:
                empty = True
                break
            l2, h2, hl2, hh2 = _quad_le(-ga, -be * fs, -al * fs * fs, Tp, l1, h1)
            if l2 > h2:
                empty = True
                break
            lo, hi = l2, h2
            if hl1 < hh1:
                holes[nh, 0] = hl1
                holes[nh, 1] = hh1
                nh += 1
            if hl2 < hh2:
                holes[nh, 0] = hl2
                holes[nh, 1] = hh2
                nh += 1
        if not empty:
            # holes covering an end of [lo, hi] shrink it
            for _r in range(nh):
                for h_ in range(nh):
                    if holes[h_, 0] <= lo < holes[h_, 1]:
                        lo = holes[h_, 1]
                    if holes[h_, 0] < hi <= holes[h_, 1]:
                        hi = holes[h_, 0]
            if lo > hi + 1e-9 * max(abs(lo), abs(hi)) + 1e-6:
                empty = True
        if empty:
            if s == 0:
                continue
            break
        if s == 0:
            lo = max(lo, 0.5)
            if lo > hi:
                continue
        pad = 1e-9 * max(abs(lo), abs(hi)) + 1.0
        t = int(math.floor(lo - pad))
        thi = int(math.ceil(hi + pad))
        if s == 0 and t < 1:
            t = 1
        if not exact:
            w = fs + max(abs(float(t)), abs(float(thi)))
            if cmax * w * w > 2e18 or Tf > 1e18:
                return -1
            if w * (abs(b1u) + abs(b1v) + abs(b2u) + abs(b2v)) > 1e18:
                return -1
        while t <= thi:
            jumped = False
            for h_ in range(nh):
                a_h = holes[h_, 0] + 1e-9 * abs(holes[h_, 0]) + 1.0
                b_h = holes[h_, 1] - 1e-9 * abs(holes[h_, 1]) - 1.0
                if a_h < t < b_h:
                    t = int(math.ceil(b_h))
                    jumped = True
            if jumped:
                continue
            u = s * b1u + t * b2u
            v = s * b1v + t * b2v
            if u != 0 and _gcd(u, v) == 1 and _gcd(u, dabs) == e:
                F0 = rc[0, 0] * s * s + rc[0, 1] * s * t + rc[0, 2] * t * t
                F1 = rc[1, 0] * s * s + rc[1, 1] * s * t + rc[1, 2] * t * t
                F2 = rc[2, 0] * s * s + rc[2, 1] * s * t + rc[2, 2] * t * t
                g = _gcd(_gcd(F0, F1), F2)
                x0, x1, x2 = F0 // g, F1 // g, F2 // g
                h = max(abs(x0), abs(x1), abs(x2))
                if lower < h <= X:
                    if not _sign_ok(x0, x1, x2):
                        x0, x1, x2 = -x0, -x1, -x2
                    ok = True
                    if filt:
                        ok = _region_ok(x0, x1, x2, gam) and \
                            _x_class_ok(x0, x1, x2, q, acls[0], acls[1], acls[2])
                    if ok:
                        total += 1
                        out[_rung(h * Hy, rungs)] += 1
            t += 1
    return total


@njit(cache=True, inline="always")
def _rung(b, rungs):
    lo, hi = 0, rungs.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if rungs[mid] >= b:
            hi = mid
        else:
            lo = mid + 1
    return lo


@njit(cache=True)
def _region_ok(x0, x1, x2, gam):
    # x0 != 0 and n_lo/d_lo <= x_i/x0 <= n_hi/d_hi with d > 0; gam rows (n_lo, d_lo, n_hi, d_hi)
    if x0 == 0:
        return False
    s = 1 if x0 > 0 else -1
    for i in range(2):
        xi = x1 if i == 0 else x2
        nl, dl, nh, dh = gam[i, 0], gam[i, 1], gam[i, 2], gam[i, 3]
        # xi/x0 >= nl/dl  <=>  xi*dl*s >= nl*|x0|
        if dl > 0 and xi * dl * s < nl * abs(x0):
            return False
        if dh > 0 and xi * dh * s > nh * abs(x0):
            return False
    return True
