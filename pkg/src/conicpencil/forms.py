"""Integral ternary quadratic forms, pencils and the discriminant cubic.

All arithmetic here is on Python integers, so nothing can overflow.  A form
is stored by its symmetric integral matrix A with Q(x) = x^T A x.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd, isqrt
from pathlib import Path

from .errors import (IdenticallyZero, NonSymmetricError, ProportionalFormsError,
                     ZeroVectorError)


def _as_matrix(rows):
    m = tuple(tuple(int(v) for v in r) for r in rows)
    if len(m) != 3 or any(len(r) != 3 for r in m):
        raise ValueError("expected a 3x3 matrix")
    return m


def det3(m):
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def adjugate3(m):
    """Classical adjoint, adj(A) A = det(A) I."""
    c = [[0] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            r = [k for k in range(3) if k != i]
            s = [k for k in range(3) if k != j]
            minor = m[r[0]][s[0]] * m[r[1]][s[1]] - m[r[0]][s[1]] * m[r[1]][s[0]]
            c[j][i] = (-1) ** (i + j) * minor
    return tuple(tuple(r) for r in c)


def minors2(m):
    """All nine 2x2 minors of a 3x3 matrix."""
    out = []
    for r0, r1 in ((0, 1), (0, 2), (1, 2)):
        for c0, c1 in ((0, 1), (0, 2), (1, 2)):
            out.append(m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0])
    return out


def matmul3(a, b):
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3))
                 for i in range(3))


def transpose3(a):
    return tuple(tuple(a[j][i] for j in range(3)) for i in range(3))


@dataclass(frozen=True)
class QuadForm3:
    matrix: tuple

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        for i in range(3):
            for j in range(i):
                if m[i][j] != m[j][i]:
                    raise NonSymmetricError(f"matrix not symmetric at ({i},{j})")
        object.__setattr__(self, "matrix", m)

    @cached_property
    def content(self):
        g = 0
        for r in self.matrix:
            for v in r:
                g = gcd(g, v)
        return g

    @cached_property
    def det(self):
        return det3(self.matrix)

    def __call__(self, x):
        return eval_form(self, x)

    def scaled(self, k):
        return QuadForm3(tuple(tuple(k * v for v in r) for r in self.matrix))

    def primitive_part(self):
        g = self.content
        if g == 0:
            return self
        return QuadForm3(tuple(tuple(v // g for v in r) for r in self.matrix))

    def transform(self, M):
        """The form x -> Q(Mx), i.e. matrix M^T A M."""
        M = _as_matrix(M)
        return QuadForm3(matmul3(transpose3(M), matmul3(self.matrix, M)))

    def is_zero(self):
        return self.content == 0


def eval_form(f: QuadForm3, x) -> int:
    a = f.matrix
    x0, x1, x2 = (int(v) for v in x)
    return (a[0][0] * x0 * x0 + a[1][1] * x1 * x1 + a[2][2] * x2 * x2
            + 2 * (a[0][1] * x0 * x1 + a[0][2] * x0 * x2 + a[1][2] * x1 * x2))


def bilinear(f: QuadForm3, x, z) -> int:
    a = f.matrix
    return sum(int(x[i]) * a[i][j] * int(z[j]) for i in range(3) for j in range(3))


@dataclass(frozen=True)
class BinaryCubic:
    """C(y0, y1) = c0 y0^3 + c1 y0^2 y1 + c2 y0 y1^2 + c3 y1^3."""
    coeffs: tuple

    @cached_property
    def disc(self):
        a, b, c, d = self.coeffs
        return b * b * c * c - 4 * a * c ** 3 - 4 * b ** 3 * d - 27 * a * a * d * d + 18 * a * b * c * d

    def __call__(self, y):
        c0, c1, c2, c3 = self.coeffs
        y0, y1 = int(y[0]), int(y[1])
        return c0 * y0 ** 3 + c1 * y0 * y0 * y1 + c2 * y0 * y1 * y1 + c3 * y1 ** 3

    def rational_roots(self):
        """Projective rational roots, each as a sign-normalized primitive pair."""
        return _binary_rational_roots(self.coeffs)


@dataclass(frozen=True)
class ProjVec:
    coords: tuple
    height: int = field(default=0)

    def __post_init__(self):
        c = tuple(int(v) for v in self.coords)
        object.__setattr__(self, "coords", c)
        object.__setattr__(self, "height", max(abs(v) for v in c))

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]


def make_primitive(v) -> ProjVec:
    v = [int(t) for t in v]
    g = 0
    for t in v:
        g = gcd(g, t)
    if g == 0:
        raise ZeroVectorError("zero vector has no projective class")
    v = [t // g for t in v]
    for t in v:
        if t != 0:
            if t < 0:
                v = [-s for s in v]
            break
    return ProjVec(tuple(v))


@dataclass(frozen=True)
class Pencil:
    q0: QuadForm3
    q1: QuadForm3
    name: str | None = None

    def __post_init__(self):
        q0 = self.q0 if isinstance(self.q0, QuadForm3) else QuadForm3(self.q0)
        q1 = self.q1 if isinstance(self.q1, QuadForm3) else QuadForm3(self.q1)
        object.__setattr__(self, "q0", q0)
        object.__setattr__(self, "q1", q1)
        a = [v for r in q0.matrix for v in r]
        b = [v for r in q1.matrix for v in r]
        if all(a[i] * b[j] - a[j] * b[i] == 0 for i in range(9) for j in range(i + 1, 9)):
            raise ProportionalFormsError("Q0 and Q1 are proportional")

    @classmethod
    def from_matrices(cls, A0, A1, name=None):
        return cls(QuadForm3(A0), QuadForm3(A1), name)

    @cached_property
    def cubic(self):
        return disc_cubic(self)

    def to_dict(self):
        d = {}
        if self.name is not None:
            d["name"] = self.name
        d["Q0"] = [list(r) for r in self.q0.matrix]
        d["Q1"] = [list(r) for r in self.q1.matrix]
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(QuadForm3(d["Q0"]), QuadForm3(d["Q1"]), d.get("name"))

    def dumps(self):
        return json.dumps(self.to_dict())

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    def transform_x(self, M):
        return Pencil(self.q0.transform(M), self.q1.transform(M), self.name)

    def change_basis(self, a, b, c, d):
        """New pencil (a Q0 + b Q1, c Q0 + d Q1)."""
        m0, m1 = self.q0.matrix, self.q1.matrix
        n0 = [[a * m0[i][j] + b * m1[i][j] for j in range(3)] for i in range(3)]
        n1 = [[c * m0[i][j] + d * m1[i][j] for j in range(3)] for i in range(3)]
        return Pencil(QuadForm3(n0), QuadForm3(n1), self.name)


def load_pencil(path) -> Pencil:
    return Pencil.from_dict(json.loads(Path(path).read_text()))


def fiber_form(p: Pencil, y) -> QuadForm3:
    y0, y1 = int(y[0]), int(y[1])
    if y0 == 0 and y1 == 0:
        raise ZeroVectorError("y must be nonzero")
    a, b = p.q0.matrix, p.q1.matrix
    return QuadForm3(tuple(tuple(y0 * a[i][j] + y1 * b[i][j] for j in range(3)) for i in range(3)))


def fiber_matrix(p: Pencil, y):
    a, b = p.q0.matrix, p.q1.matrix
    y0, y1 = int(y[0]), int(y[1])
    return tuple(tuple(y0 * a[i][j] + y1 * b[i][j] for j in range(3)) for i in range(3))


def disc_cubic(p: Pencil) -> BinaryCubic:
    # C(1, t) at t = 0..3, then solve the Vandermonde system exactly
    vals = [det3(fiber_matrix(p, (1, t))) for t in range(4)]
    V = [[Fraction(t) ** k for k in range(4)] for t in range(4)]
    rhs = [Fraction(v) for v in vals]
    for col in range(4):
        piv = next(r for r in range(col, 4) if V[r][col] != 0)
        V[col], V[piv] = V[piv], V[col]
        rhs[col], rhs[piv] = rhs[piv], rhs[col]
        for r in range(4):
            if r != col and V[r][col] != 0:
                f = V[r][col] / V[col][col]
                V[r] = [V[r][k] - f * V[col][k] for k in range(4)]
                rhs[r] -= f * rhs[col]
    coef = [rhs[k] / V[k][k] for k in range(4)]
    assert all(c.denominator == 1 for c in coef)
    cub = BinaryCubic(tuple(int(c) for c in coef))
    for y in ((0, 1), (1, 0), (1, -1), (2, 1), (-3, 2)):
        assert cub(y) == det3(fiber_matrix(p, y))
    if all(c == 0 for c in cub.coeffs):
        raise IdenticallyZero("det(y0 A0 + y1 A1) vanishes identically")
    return cub


def is_smooth(p: Pencil) -> bool:
    try:
        cub = disc_cubic(p)
    except IdenticallyZero:
        return False
    return cub.disc != 0


def normalize6(p: Pencil) -> Pencil:
    return Pencil(p.q0.scaled(6), p.q1.scaled(6), p.name)


def rank_mod_p(f: QuadForm3, p: int) -> int:
    """Rank of the matrix of f over F_p (for p = 2 this is the matrix rank)."""
    m = [[v % p for v in r] for r in f.matrix]
    rank = 0
    for col in range(3):
        piv = next((r for r in range(rank, 3) if m[r][col]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = pow(m[rank][col], -1, p)
        for r in range(3):
            if r != rank and m[r][col]:
                fct = m[r][col] * inv % p
                m[r] = [(m[r][k] - fct * m[rank][k]) % p for k in range(3)]
        rank += 1
    return rank


def _divisors_abs(n):
    from sympy import divisors
    return divisors(abs(n))


def _binary_rational_roots(coeffs):
    """Projective rational roots of sum c_i y0^(d-i) y1^i, sign-normalized."""
    d = len(coeffs) - 1
    if all(c == 0 for c in coeffs):
        raise IdenticallyZero("zero binary form")

    def val(y0, y1):
        return sum(c * y0 ** (d - i) * y1 ** i for i, c in enumerate(coeffs))

    roots = []
    if coeffs[0] == 0:
        roots.append((1, 0))
    # affine part: f(s) = F(s, 1), s = y0 / y1
    poly = list(coeffs)
    while poly[0] == 0:
        poly = poly[1:]
    if poly[-1] == 0:
        roots.append((0, 1))
        while poly[-1] == 0:
            poly = poly[:-1]
    if len(poly) > 1:
        lead, const = poly[0], poly[-1]
        for pnum in _divisors_abs(const):
            for qden in _divisors_abs(lead):
                if gcd(pnum, qden) != 1:
                    continue
                for y0 in (pnum, -pnum):
                    if val(y0, qden) == 0:
                        r = make_primitive((y0, qden)).coords
                        if r not in roots:
                            roots.append(r)
    return roots


def is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n
