"""Small number theory helpers: factoring, symbols, divisor functions."""
from __future__ import annotations

from functools import lru_cache
from math import comb, gcd

import numpy as np
from sympy import factorint as _sympy_factorint
from sympy import isprime, primerange
from sympy.ntheory import sqrt_mod

__all__ = ["factorint", "isprime", "primes_upto", "legendre", "valuation",
           "hilbert_symbol", "phi", "tau_k", "sqrt_mod", "squarefree_part",
           "crt_pair"]


def factorint(n: int) -> dict:
    """Prime factorization of |n| (n != 0)."""
    n = abs(int(n))
    if n == 0:
        raise ValueError("cannot factor 0")
    return _sympy_factorint(n)


@lru_cache(maxsize=16)
def primes_upto(n: int) -> tuple:
    return tuple(primerange(2, n + 1))


def prime_array(n: int) -> np.ndarray:
    return np.array(primes_upto(n), dtype=np.int64)


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def hilbert_symbol(a: int, b: int, p: int) -> int:
    """(a, b)_p for nonzero integers a, b and a prime p."""
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol of 0")
    al, be = valuation(a, p), valuation(b, p)
    u, v = a // p ** al, b // p ** be
    if p != 2:
        s = (-1) ** (al * be * ((p - 1) // 2) % 2)
        if be % 2:
            s *= legendre(u, p)
        if al % 2:
            s *= legendre(v, p)
        return s
    eps = lambda t: ((t - 1) // 2) % 2
    omg = lambda t: ((t * t - 1) // 8) % 2
    e = eps(u) * eps(v) + al * omg(v) + be * omg(u)
    return -1 if e % 2 else 1


def phi(n: int) -> int:
    r = n
    for p in factorint(n):
        r = r // p * (p - 1)
    return r


def tau_k(n: int, k: int) -> int:
    """Number of ordered factorizations n = d1 ... dk."""
    r = 1
    for e in factorint(n).values():
        r *= comb(e + k - 1, k - 1)
    return r


def squarefree_part(n: int):
    """Return (s, r) with n = s * r^2 and s squarefree (sign kept in s)."""
    if n == 0:
        raise ValueError("squarefree part of 0")
    s, r = (1 if n > 0 else -1), 1
    for p, e in factorint(n).items():
        if e % 2:
            s *= p
        r *= p ** (e // 2)
    return s, r


def crt_pair(r1, m1, r2, m2):
    g = gcd(m1, m2)
    assert g == 1
    t = (r2 - r1) * pow(m1, -1, m2) % m2
    return (r1 + m1 * t) % (m1 * m2), m1 * m2
