"""Counting zeros of ternary quadratic forms modulo prime powers.

The form is first split into Jordan blocks over Z/p^k (diagonal for odd p,
1x1 and 2x2 blocks for p = 2).  The zero count is then the value at 0 of the
cyclic convolution of the per-block value distributions.  This is exact and
costs O(p^(2k)) instead of the O(p^(3k)) of a plain sweep.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from numba import njit


def _val(n, p, cap):
    if n == 0:
        return cap
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def jordan_blocks(A, p, k):
    """Blocks (tuples of tuples) whose orthogonal sum is equivalent to A over Z/p^k."""
    P = p ** k
    M = [[int(A[i][j]) % P for j in range(3)] for i in range(3)]
    live = [0, 1, 2]
    blocks = []

    def rowcol_sub(r, i, f):
        # x_i <- x_i - f x_r : row r -= f row i, col r -= f col i
        for c in range(3):
            M[r][c] = (M[r][c] - f * M[i][c]) % P
        for c in range(3):
            M[c][r] = (M[c][r] - f * M[c][i]) % P

    while live:
        best = None
        for a in live:
            for b in live:
                if b < a:
                    continue
                v = _val(M[a][b], p, k)
                if best is None or v < best[0] or (v == best[0] and a == b and best[1] != best[2]):
                    best = (v, a, b)
        vmin, i, j = best
        if vmin >= k:
            blocks.extend(((0,),) for _ in live)
            break
        if i != j and p != 2:
            # x_i <- x_i + x_j makes the diagonal entry attain the minimum
            for c in range(3):
                M[i][c] = (M[i][c] + M[j][c]) % P
            for c in range(3):
                M[c][i] = (M[c][i] + M[c][j]) % P
            j = i
        if i == j:
            pv = p ** vmin
            u_inv = pow(M[i][i] // pv, -1, P)
            for r in live:
                if r != i and M[r][i]:
                    f = (M[r][i] // pv) * u_inv % P
                    rowcol_sub(r, i, f)
            blocks.append(((M[i][i],),))
            live.remove(i)
        else:
            pv = p ** vmin
            a, b, c = M[i][i] // pv, M[i][j] // pv, M[j][j] // pv
            det_inv = pow(a * c - b * b, -1, P)
            for r in live:
                if r in (i, j):
                    continue
                si, sj = M[r][i] // pv, M[r][j] // pv
                fi = (c * si - b * sj) * det_inv % P
                fj = (a * sj - b * si) * det_inv % P
                for cc in range(3):
                    M[r][cc] = (M[r][cc] - fi * M[i][cc] - fj * M[j][cc]) % P
                for cc in range(3):
                    M[cc][r] = (M[cc][r] - fi * M[cc][i] - fj * M[cc][j]) % P
            blocks.append(((M[i][i], M[i][j]), (M[j][i], M[j][j])))
            live.remove(i)
            live.remove(j)
    return blocks


@njit(cache=True)
def _dist2(a, b, c, m):
    out = np.zeros(m, dtype=np.int64)
    for x in range(m):
        ax = a * x % m * x % m
        bx = 2 * b * x % m
        for y in range(m):
            out[(ax + (bx + c * y) % m * y) % m] += 1
    return out


@njit(cache=True)
def _cyc_conv(d1, d2, m):
    out = np.zeros(m, dtype=np.int64)
    for s in range(m):
        if d1[s] == 0:
            continue
        w = d1[s]
        for t in range(m):
            if d2[t]:
                out[(s + t) % m] += w * d2[t]
    return out


def _block_dist(block, m):
    if len(block) == 1:
        a = block[0][0] % m
        x = np.arange(m, dtype=np.int64)
        return np.bincount((a * (x * x % m)) % m, minlength=m).astype(np.int64)
    (a, b), (_, c) = block
    return _dist2(a % m, b % m, c % m, m)


@lru_cache(maxsize=4096)
def _count_total_cached(A, p, k):
    if k == 0:
        return 1
    m = p ** k
    dists = [_block_dist(b, m) for b in jordan_blocks(A, p, k)]
    acc = dists[0]
    for d in dists[1:-1]:
        acc = _cyc_conv(acc, d, m)
    if len(dists) == 1:
        return int(acc[0])
    last = dists[-1]
    neg = (-np.arange(m)) % m
    return int(np.dot(acc, last[neg]))


def count_zeros_total(A, p, k):
    """#{x mod p^k : x^T A x = 0 mod p^k}."""
    A = tuple(tuple(int(v) for v in r) for r in A)
    return _count_total_cached(A, p, k)


def count_zeros_primitive(A, p, k):
    """#{x mod p^k primitive : x^T A x = 0 mod p^k}."""
    if k == 1:
        return count_zeros_total(A, p, 1) - 1
    return count_zeros_total(A, p, k) - p ** 3 * count_zeros_total(A, p, k - 2)


@njit(cache=True)
def brute_count_zeros(A, m, primitive_p):
    """Plain sweep over x mod m; primitive_p > 0 drops x = 0 mod primitive_p."""
    cnt = 0
    for x0 in range(m):
        for x1 in range(m):
            for x2 in range(m):
                if primitive_p > 0 and x0 % primitive_p == 0 and x1 % primitive_p == 0 \
                        and x2 % primitive_p == 0:
                    continue
                v = (A[0, 0] * x0 * x0 + A[1, 1] * x1 * x1 + A[2, 2] * x2 * x2
                     + 2 * (A[0, 1] * x0 * x1 + A[0, 2] * x0 * x2 + A[1, 2] * x1 * x2))
                if v % m == 0:
                    cnt += 1
    return cnt
