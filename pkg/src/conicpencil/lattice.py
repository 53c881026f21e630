"""Congruence lattices Lambda(a, m) and primitive point counts in squares."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np
from numba import njit

from .errors import BudgetExceeded, NonPrimitiveDirection
from .nt import factorint


def _egcd(a, b):
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y


def hnf_basis(gens, dim):
    """Lower-triangular Hermite basis of the lattice spanned by `gens`.

    Returns columns b_0..b_{dim-1} with b_i[j] = 0 for j < i, b_i[i] > 0 and
    0 <= b_j[i] < b_i[i] for j < i.
    """
    vecs = [list(map(int, g)) for g in gens if any(g)]
    basis = []
    for i in range(dim):
        piv = None
        rest = []
        for v in vecs:
            if v[i] == 0:
                rest.append(v)
                continue
            if piv is None:
                piv = v
                continue
            g, s, t = _egcd(piv[i], v[i])
            a, b = piv[i] // g, v[i] // g
            new_piv = [s * x + t * y for x, y in zip(piv, v)]
            other = [b * x - a * y for x, y in zip(piv, v)]
            piv = new_piv
            if any(other):
                rest.append(other)
        if piv is None:
            raise ValueError("generators do not span a full-rank lattice")
        if piv[i] < 0:
            piv = [-x for x in piv]
        basis.append(piv)
        vecs = rest
    for i in range(dim):
        for j in range(i):
            q = basis[j][i] // basis[i][i]
            if q:
                basis[j] = [x - q * y for x, y in zip(basis[j], basis[i])]
    return [tuple(b) for b in basis]


def lll_reduce(basis, delta=Fraction(3, 4)):
    """Textbook LLL on a handful of integer vectors (exact rationals)."""
    b = [list(v) for v in basis]
    n = len(b)

    def dot(u, v):
        return sum(x * y for x, y in zip(u, v))

    def gso():
        bs, mu = [], [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            v = [Fraction(x) for x in b[i]]
            for j in range(i):
                mu[i][j] = Fraction(dot(b[i], bs[j])) / dot(bs[j], bs[j])
                v = [x - mu[i][j] * y for x, y in zip(v, bs[j])]
            bs.append(v)
        return bs, mu

    k = 1
    bs, mu = gso()
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                bs, mu = gso()
        if dot(bs[k], bs[k]) >= (delta - mu[k][k - 1] ** 2) * dot(bs[k - 1], bs[k - 1]):
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            bs, mu = gso()
            k = max(k - 1, 1)
    return [tuple(v) for v in b]


@dataclass(frozen=True)
class CongruenceLattice:
    dim: int
    modulus: int
    direction: tuple
    basis: tuple        # Hermite basis, one tuple per basis vector
    reduced: tuple      # LLL-reduced basis of the same lattice
    det: int

    def contains(self, v):
        m = self.modulus
        return any(all((vi - k * ai) % m == 0 for vi, ai in zip(v, self.direction))
                   for k in range(m))


def build_lattice(a, m: int) -> CongruenceLattice:
    a = tuple(int(t) for t in a)
    dim = len(a)
    g = m
    for t in a:
        g = gcd(g, t)
    if g != 1:
        raise NonPrimitiveDirection("direction is not primitive modulo m")
    gens = [a] + [tuple(m if j == i else 0 for j in range(dim)) for i in range(dim)]
    H = hnf_basis(gens, dim)
    det = math.prod(H[i][i] for i in range(dim))
    assert det == m ** (dim - 1), (a, m, det)
    R = lll_reduce(H)
    return CongruenceLattice(dim, m, a, tuple(H), tuple(R), det)


def gauss_reduce(u, v):
    """Lagrange-Gauss reduction of a planar basis (Euclidean norm)."""
    def n2(w):
        return w[0] * w[0] + w[1] * w[1]
    if n2(u) > n2(v):
        u, v = v, u
    while True:
        q = round(Fraction(u[0] * v[0] + u[1] * v[1], n2(u)))
        v = (v[0] - q * u[0], v[1] - q * u[1])
        if n2(v) >= n2(u):
            return u, v
        u, v = v, u


def _sup(v):
    return max(abs(x) for x in v)


def _vectors_upto(basis, R):
    """All nonzero lattice vectors with sup-norm <= R."""
    B = np.array(basis, dtype=float).T
    Binv = np.linalg.inv(B)
    cb = int(math.floor(np.abs(Binv).sum(axis=1).max() * R + 1e-9)) + 1
    dim = len(basis)
    out = []
    for c in itertools.product(range(-cb, cb + 1), repeat=dim):
        if not any(c):
            continue
        v = tuple(sum(c[i] * basis[i][j] for i in range(dim)) for j in range(dim))
        if _sup(v) <= R:
            out.append(v)
    return out


def _rank(vs):
    return np.linalg.matrix_rank(np.array(vs, dtype=float)) if vs else 0


def successive_minima(L: CongruenceLattice):
    """Exact sup-norm successive minima.

    Dimension 2 uses Lagrange-Gauss reduction first.  Every vector of norm up
    to the largest reduced-basis norm is enumerated, so the greedy choice of
    independent vectors in order of norm returns the exact minima.
    """
    basis = gauss_reduce(*L.reduced) if L.dim == 2 else L.reduced
    R = max(_sup(v) for v in basis)
    vecs = sorted(_vectors_upto(basis, R), key=_sup)
    chosen, mins = [], []
    for v in vecs:
        if _rank(chosen + [v]) > len(chosen):
            chosen.append(v)
            mins.append(_sup(v))
            if len(chosen) == L.dim:
                break
    return tuple(mins)


@njit(cache=True)
def _count_prim_2d(d1, t, d2, xlo, xhi, ylo, yhi):
    # lattice points (k d1, k t + j d2) inside [xlo,xhi] x [ylo,yhi]
    cnt = 0
    k0 = -((-xlo) // d1)
    k1 = xhi // d1
    for k in range(k0, k1 + 1):
        x = k * d1
        base = k * t
        j0 = -((-(ylo - base)) // d2)
        j1 = (yhi - base) // d2
        for j in range(j0, j1 + 1):
            y = base + j * d2
            a, b = abs(x), abs(y)
            while b:
                a, b = b, a % b
            if a == 1:
                cnt += 1
    return cnt


@dataclass
class SquareCount:
    count: int
    main_term: float
    residual: float


def primitive_main_term(m: int, area: float) -> float:
    f = 1.0
    if m > 1:
        for p in factorint(m):
            f *= p / (p + 1)
    return 6 / math.pi ** 2 * f * area / m


def count_primitive_in_square(L: CongruenceLattice, center, side) -> SquareCount:
    """Primitive lattice points in the closed square center + [-side/2, side/2]^2."""
    if L.dim != 2:
        raise ValueError("planar lattices only")
    cx, cy = (Fraction(c) for c in center)
    h = Fraction(side) / 2
    if max(abs(cx), abs(cy)) + h > 10 ** 7:
        raise BudgetExceeded("square outside the supported range")
    (d1, t), (_, d2) = L.basis
    xlo, xhi = math.ceil(cx - h), math.floor(cx + h)
    ylo, yhi = math.ceil(cy - h), math.floor(cy + h)
    if side < 0 or xlo > xhi or ylo > yhi:
        return SquareCount(0, 0.0, 0.0)
    cnt = int(_count_prim_2d(d1, t, d2, xlo, xhi, ylo, yhi))
    main = primitive_main_term(L.modulus, float(side) ** 2)
    return SquareCount(cnt, main, cnt - main)


# ---------------------------------------------------------------------------
# batch kernels for the exhaustive lattice-law sweep

@njit(cache=True)
def _hnf_diag_prod(a, m):
    """Product of the HNF diagonal for the generators {a, m e_i} (int64)."""
    d = a.shape[0]
    n = d + 1
    G = np.zeros((n, d), dtype=np.int64)
    for j in range(d):
        G[0, j] = a[j] % m
        G[j + 1, j] = m
    alive = np.ones(n, dtype=np.bool_)
    prod = 1
    for i in range(d):
        piv = -1
        for r in range(n):
            if not alive[r] or G[r, i] == 0:
                continue
            if piv < 0:
                piv = r
                continue
            # Euclid on column i between rows piv and r
            while G[r, i] != 0:
                q = G[piv, i] // G[r, i]
                for c in range(d):
                    G[piv, c] -= q * G[r, c]
                for c in range(d):
                    t = G[piv, c]
                    G[piv, c] = G[r, c]
                    G[r, c] = t
        if piv < 0:
            return 0
        prod *= abs(G[piv, i])
        alive[piv] = False
    return prod


@njit(cache=True)
def _indep(vs, cnt, v):
    # is v independent of the first cnt rows of vs (cnt < dim)?
    d = v.shape[0]
    if cnt == 0:
        for j in range(d):
            if v[j] != 0:
                return True
        return False
    if cnt == 1:
        for i in range(d):
            for j in range(i + 1, d):
                if vs[0, i] * v[j] - vs[0, j] * v[i] != 0:
                    return True
        return False
    # cnt == 2, d == 3
    c0 = vs[0, 1] * vs[1, 2] - vs[0, 2] * vs[1, 1]
    c1 = vs[0, 2] * vs[1, 0] - vs[0, 0] * vs[1, 2]
    c2 = vs[0, 0] * vs[1, 1] - vs[0, 1] * vs[1, 0]
    return c0 * v[0] + c1 * v[1] + c2 * v[2] != 0


@njit(cache=True)
def congruence_minima(a, m):
    """Exact sup-norm minima of Lambda(a, m) by enumerating the box of radius m.

    The radius m is a certificate: m e_i lie in the lattice, so every minimum
    is at most m and all minimizing vectors lie inside the box.
    """
    d = a.shape[0]
    cap = m * 3 ** d + 1
    norms = np.empty(cap, dtype=np.int64)
    vecs = np.empty((cap, d), dtype=np.int64)
    cnt = 0
    choice = np.zeros(d, dtype=np.int64)
    vals = np.zeros((d, 3), dtype=np.int64)
    nv = np.zeros(d, dtype=np.int64)
    for k in range(m):
        for j in range(d):
            r = k * a[j] % m
            if r == 0:
                vals[j, 0] = 0
                vals[j, 1] = m
                vals[j, 2] = -m
                nv[j] = 3
            else:
                vals[j, 0] = r
                vals[j, 1] = r - m
                nv[j] = 2
        total = 1
        for j in range(d):
            total *= nv[j]
        for idx in range(total):
            t = idx
            nrm = 0
            nz = False
            for j in range(d):
                c = vals[j, t % nv[j]]
                t //= nv[j]
                choice[j] = c
                if c != 0:
                    nz = True
                if abs(c) > nrm:
                    nrm = abs(c)
            if nz:
                norms[cnt] = nrm
                for j in range(d):
                    vecs[cnt, j] = choice[j]
                cnt += 1
    order = np.argsort(norms[:cnt], kind="mergesort")
    out = np.zeros(d, dtype=np.int64)
    chosen = np.zeros((d, d), dtype=np.int64)
    got = 0
    for t in range(cnt):
        v = vecs[order[t]]
        if _indep(chosen, got, v):
            for j in range(d):
                chosen[got, j] = v[j]
            out[got] = norms[order[t]]
            got += 1
            if got == d:
                break
    return out


def projective_classes(m: int, dim: int):
    """One representative per class of primitive vectors mod m up to units (CRT-assembled)."""
    from .nt import factorint as _fi
    reps = [np.zeros((1, dim), dtype=np.int64)]
    mods = [1]
    for p, e in _fi(m).items():
        q = p ** e
        loc = []
        for lead in range(dim):
            # first unit coordinate at position lead; earlier coords divisible by p
            ranges = [range(0, q, p)] * lead + [[1]] + [range(q)] * (dim - lead - 1)
            loc.extend(itertools.product(*ranges))
        loc = np.array(loc, dtype=np.int64)
        reps.append(loc)
        mods.append(q)
    cur = reps[0]
    M = 1
    for loc, q in zip(reps[1:], mods[1:]):
        # CRT combine cur (mod M) with loc (mod q)
        inv = pow(M, -1, q) if M > 1 else 1
        A = cur[:, None, :]
        Bv = loc[None, :, :]
        comb = (A + M * ((Bv - A) * inv % q)) % (M * q)
        cur = comb.reshape(-1, dim)
        M *= q
    if m == 1:
        cur = np.array([[1] + [0] * (dim - 1)], dtype=np.int64)
    return cur


@njit(cache=True)
def _sweep_kernel(reps, m):
    d = reps.shape[1]
    bad_det = 0
    bad_l = 0
    target = 1
    for _ in range(d - 1):
        target *= m
    for i in range(reps.shape[0]):
        a = reps[i]
        if _hnf_diag_prod(a, m) != target:
            bad_det += 1
        mins = congruence_minima(a, m)
        if mins[d - 1] > m:
            bad_l += 1
    return bad_det, bad_l


def lattice_law_sweep(mmax: int, dim: int):
    """(#lattices, #det failures, #lambda_dim > m failures) over all classes, m <= mmax."""
    n = bd = bl = 0
    for m in range(1, mmax + 1):
        reps = projective_classes(m, dim)
        a, b = _sweep_kernel(reps, m)
        n += reps.shape[0]
        bd += int(a)
        bl += int(b)
    return n, bd, bl
