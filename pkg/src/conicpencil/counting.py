"""Counting points of bounded height on the open set U by the hyperbola method.

Points are pairs (x, y) of sign-normalized primitive vectors with
y0 Q0(x) + y1 Q1(x) = 0, counted once per projective pair.  N1 collects
H(x) <= H(y) and is found by sweeping x; N2 collects H(x) > H(y) and is found
fiber by fiber, counting points on the conic Q_y = 0 through a parametrization.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt
import multiprocessing as mp

import numpy as np

from . import _countkernels as CK
from .classify import ALPHA, eligibility, mscheme
from .conic import (INF, _NO_CLASS, _NO_GAMMA, find_zero, isotropy_local, param_count,
                    parametrize)
from .errors import BudgetExceeded, NotOnSurface, SingularFiber, SmoothnessRequired
from .forms import Pencil, det3, eval_form, fiber_matrix, is_smooth, make_primitive
from .localarith import chi_infty_matrix, kappa_matrix, singular_series_fiber

BUDGET = 4 * 10 ** 6


def default_workers():
    env = os.environ.get("CONICPENCIL_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# membership

def in_U(p: Pencil, x, y) -> bool:
    x = [int(t) for t in x]
    y = [int(t) for t in y]
    a, b = eval_form(p.q0, x), eval_form(p.q1, x)
    if y[0] * a + y[1] * b != 0:
        raise NotOnSurface("(x, y) does not satisfy the surface equation")
    return (a, b) != (0, 0) and p.cubic(y) != 0


# ---------------------------------------------------------------------------
# reports

@dataclass
class CountReport:
    B_ladder: list
    N: list
    N1: list
    N2: list
    predictions: dict | None = None
    per_fiber_stats: list | None = None
    meta: dict = field(default_factory=dict)
    # wall-clock figures and the worker count; kept apart so that saved outputs are reproducible
    timing: dict = field(default_factory=dict)

    def rows(self):
        pr = self.predictions or {}
        cs = pr.get("c_S")
        out = []
        for B, n, n1, n2 in zip(self.B_ladder, self.N, self.N1, self.N2):
            out.append({"B": B, "N": n, "N1": n1, "N2": n2,
                        "N1_over_N": (n1 / n) if n else float("nan"),
                        "c_S": cs, "c_S1": pr.get("c_S1"), "c_S2": pr.get("c_S2"),
                        "pred_N": (cs * B * math.log(B)) if (cs is not None and B > 1) else None})
        return out

    def to_dict(self, timing=False):
        d = {"B_ladder": self.B_ladder, "N": self.N, "N1": self.N1, "N2": self.N2,
             "predictions": self.predictions, "per_fiber_stats": self.per_fiber_stats,
             "meta": self.meta}
        if timing:
            d["timing"] = self.timing
        return d

    def counts_equal(self, other) -> bool:
        return (self.B_ladder, self.N, self.N1, self.N2) == \
            (other.B_ladder, other.N, other.N1, other.N2)


def default_ladder(bmax):
    """B = 10^k and 2 * 10^k up to bmax, with bmax itself as the last rung."""
    bmax = int(bmax)
    lad = set()
    k = 1
    while 10 ** k <= bmax:
        lad.add(10 ** k)
        if 2 * 10 ** k <= bmax:
            lad.add(2 * 10 ** k)
        k += 1
    lad.add(bmax)
    return sorted(b for b in lad if b >= 1)


def parse_ladder(spec, bmax):
    """'default', 'dyadic' (2^k B0 steps down from bmax) or a comma list of bounds."""
    if spec in (None, "", "default"):
        return default_ladder(bmax)
    if spec == "dyadic":
        lad, b = [], int(bmax)
        while b >= 10:
            lad.append(b)
            b //= 2
        return sorted(lad)
    return sorted({int(float(t)) for t in spec.split(",")})


# ---------------------------------------------------------------------------
# shared setup

@dataclass
class _Filter:
    gam: np.ndarray
    q: int
    a: np.ndarray
    b: np.ndarray

    @property
    def args(self):
        return self.gam, self.q, self.a

    def y_ok(self, y):
        if self.q == 1:
            return True
        return any((y[0] - lam * self.b[0]) % self.q == 0 and (y[1] - lam * self.b[1]) % self.q == 0
                   for lam in range(self.q))


def _gamma_array(box):
    """Rational box (x1lo, x1hi, x2lo, x2hi) -> rows (n_lo, d_lo, n_hi, d_hi); None is unbounded."""
    g = np.zeros((2, 4), dtype=np.int64)
    if box is None:
        return g
    for i in range(2):
        lo, hi = box[2 * i], box[2 * i + 1]
        if lo is not None and math.isfinite(float(lo)):
            f = Fraction(lo).limit_denominator(10 ** 6) if isinstance(lo, float) else Fraction(lo)
            g[i, 0], g[i, 1] = f.numerator, f.denominator
        if hi is not None and math.isfinite(float(hi)):
            f = Fraction(hi).limit_denominator(10 ** 6) if isinstance(hi, float) else Fraction(hi)
            g[i, 2], g[i, 3] = f.numerator, f.denominator
    return g


def _make_filter(box, q, a, b):
    a = make_primitive(a).coords if a is not None else (0, 0, 0)
    b = make_primitive(b).coords if b is not None else (0, 0)
    q = int(q)
    return _Filter(_gamma_array(box), q, np.array([t % q for t in a], dtype=np.int64),
                   np.array([t % q for t in b], dtype=np.int64))


class _Setup:
    def __init__(self, p: Pencil):
        if not is_smooth(p):
            raise SmoothnessRequired("counting needs a smooth pencil")
        self.p = p
        self.A0 = np.array(p.q0.matrix, dtype=np.int64)
        self.A1 = np.array(p.q1.matrix, dtype=np.int64)
        roots = p.cubic.rational_roots()
        self.roots = np.array([list(r) for r in roots], dtype=np.int64).reshape(-1, 2)
        # rational points of the base locus Q0 = Q1 = 0 (lie on every fiber)
        self.mpoints = [tuple(v.coords) for v in mscheme(p).rational_points]


# worker-global state, inherited through fork
_STATE = {}


def _pool(workers):
    return ProcessPoolExecutor(max_workers=workers, mp_context=mp.get_context("fork"))


def _bands(R, pieces):
    """Split x0 in [0, R] into contiguous bands of roughly equal volume."""
    pieces = max(1, min(pieces, R + 1))
    edges = [round(i * (R + 1) / pieces) for i in range(pieces + 1)]
    return [(edges[i], edges[i + 1]) for i in range(pieces) if edges[i] < edges[i + 1]]


# ---------------------------------------------------------------------------
# N1: sweep over x

def _n1_band(band):
    st = _STATE
    S, R, Bmax, rungs, flt = st["setup"], st["R"], st["Bmax"], st["rungs"], st["filter"]
    out = np.zeros(len(rungs), dtype=np.int64)
    hints = np.zeros((R + 1, 2 * R + 1, 3), dtype=np.int32)
    gam, q, acls = flt.args if flt else (_NO_GAMMA, 1, _NO_CLASS)
    bcls = flt.b if flt else np.zeros(2, dtype=np.int64)
    seen = CK.n1_sweep(S.A0, S.A1, R, band[0], band[1], Bmax, rungs, out, S.roots, hints,
                       flt is not None, gam, q, acls, bcls)
    return out, hints, int(seen)


def _n1(S, Bmax, rungs, flt, workers):
    R = isqrt(Bmax)
    _STATE.update(setup=S, R=R, Bmax=Bmax, rungs=rungs, filter=flt)
    bands = _bands(R, 1 if workers == 1 else 4 * workers)
    if workers == 1:
        results = [_n1_band(b) for b in bands]
    else:
        with _pool(workers) as ex:
            results = list(ex.map(_n1_band, bands))
    out = np.zeros(len(rungs), dtype=np.int64)
    hints = np.zeros((R + 1, 2 * R + 1, 3), dtype=np.int32)
    seen = 0
    for o, h, s in results:
        out += o
        # earlier bands win, so the merged hints do not depend on the worker count
        empty = ~hints.any(axis=2)
        hints[empty] = h[empty]
        seen += s
    return out, hints, seen


# ---------------------------------------------------------------------------
# N2: fiber by fiber

_PRIMES = None


def _factor(n):
    global _PRIMES
    n = abs(int(n))
    if _PRIMES is None or int(_PRIMES[-1]) ** 2 < n:
        lim = max(4 * isqrt(n) + 2, 10 ** 5)
        sieve = np.ones(lim + 1, dtype=bool)
        sieve[:2] = False
        for k in range(2, isqrt(lim) + 1):
            if sieve[k]:
                sieve[k * k::k] = False
        _PRIMES = np.flatnonzero(sieve).astype(np.int64)
    if n < 2 ** 62:
        ps, es = CK.trial_factor(n, _PRIMES)
        return {int(a): int(b) for a, b in zip(ps, es)}
    from .nt import factorint
    return factorint(n)


def _locally_solvable(A, fac):
    if chi_infty_matrix(A) == -1:
        return False
    # kappa = 0 certifies insolubility cheaply; the 2-adic test is the expensive one, so last
    if kappa_matrix(A, fac) == 0:
        return False
    places = [q for q in fac if q != 2] + [2]
    return all(isotropy_local(A, v) == 1 for v in places)


def _fiber_zero(A, hint, fac):
    if hint is not None:
        return hint
    if not _locally_solvable(A, fac):
        return None
    z = find_zero(A)
    return None if z is None else z.coords


def _fiber_count(y, hint, Bmax, rungs, flt, mpoints):
    """Per-rung counts of x on the fiber over y with H(y) < H(x) <= Bmax / H(y)."""
    p = _STATE["setup"].p
    hy = max(abs(y[0]), abs(y[1]))
    X = Bmax // hy
    out = np.zeros(len(rungs), dtype=np.int64)
    if X <= hy:
        return out, 0
    A = fiber_matrix(p, y)
    det = det3(A)
    if det == 0:
        raise SingularFiber("C(y) = 0")
    fac = _factor(det) if hint is None else None
    z = _fiber_zero(A, hint, fac)
    if z is None:
        return out, 0
    P = parametrize(A, z)
    filt = None if flt is None else flt.args
    total, cnt = param_count(P, X, hy, hy, rungs, filt, _factor(P.d))
    out += cnt
    # points of the base locus lie on every fiber but are not in U
    for m in mpoints:
        h = max(abs(t) for t in m)
        if hy < h <= X:
            if flt is not None:
                if not CK._region_ok(m[0], m[1], m[2], flt.gam):
                    continue
                if not CK._x_class_ok(m[0], m[1], m[2], flt.q, *[int(t) for t in flt.a]):
                    continue
            out[CK._rung(h * hy, rungs)] -= 1
            total -= 1
    return out, int(hint is None)


def _n2_chunk(idx):
    st = _STATE
    ys, hints, R = st["ys"], st["hints"], st["R"]
    Bmax, rungs, flt, mpoints = st["Bmax"], st["rungs"], st["filter"], st["setup"].mpoints
    out = np.zeros(len(rungs), dtype=np.int64)
    descents = 0
    lo, hi = idx
    for i in range(lo, hi):
        y = (int(ys[i, 0]), int(ys[i, 1]))
        h = hints[y[0], y[1] + R]
        hint = None if not h.any() else (int(h[0]), int(h[1]), int(h[2]))
        o, dsc = _fiber_count(y, hint, Bmax, rungs, flt, mpoints)
        out += o
        descents += dsc
    return out, descents


def _n2(S, Bmax, rungs, hints, flt, workers):
    R = isqrt(Bmax)
    q = flt.q if flt else 1
    bcls = flt.b if flt else np.zeros(2, dtype=np.int64)
    ys = CK.fiber_list(R, Bmax, S.roots, flt is not None, q, bcls)
    _STATE.update(ys=ys, hints=hints, R=R)
    n = len(ys)
    pieces = 1 if workers == 1 else 16 * workers
    edges = [round(i * n / pieces) for i in range(pieces + 1)]
    chunks = [(edges[i], edges[i + 1]) for i in range(pieces) if edges[i] < edges[i + 1]]
    if workers == 1:
        results = [_n2_chunk(c) for c in chunks]
    else:
        with _pool(workers) as ex:
            results = list(ex.map(_n2_chunk, chunks))
    out = np.zeros(len(rungs), dtype=np.int64)
    descents = 0
    for o, d in results:
        out += o
        descents += d
    return out, n, descents


# ---------------------------------------------------------------------------
# public counts

def _run(p, ladder, flt, workers, predict_P=None):
    ladder = sorted({int(b) for b in ladder})
    if not ladder:
        raise ValueError("empty ladder")
    Bmax = ladder[-1]
    if Bmax > BUDGET:
        raise BudgetExceeded(f"B = {Bmax} exceeds the configured budget {BUDGET}")
    workers = default_workers() if workers is None else int(workers)
    if Bmax < 1:
        z = [0] * len(ladder)
        return CountReport(ladder, z, list(z), list(z))
    S = _Setup(p)
    _STATE.clear()
    _STATE["setup"] = S
    rungs = np.array(ladder, dtype=np.int64)
    t0 = time.time()
    o1, hints, seen = _n1(S, Bmax, rungs, flt, workers)
    t1 = time.time()
    o2, nfib, descents = _n2(S, Bmax, rungs, hints, flt, workers)
    t2 = time.time()
    _STATE.clear()
    N1 = [int(v) for v in np.cumsum(o1)]
    N2 = [int(v) for v in np.cumsum(o2)]
    N = [a + b for a, b in zip(N1, N2)]
    meta = {"x_primitive_candidates": seen, "fibers": nfib, "fibers_without_hint": descents}
    timing = {"time_N1": t1 - t0, "time_N2": t2 - t1, "workers": workers}
    return CountReport(ladder, N, N1, N2, None, None, meta, timing)


def count_N1(p: Pencil, B, workers=None) -> int:
    return count_N(p, B, ladder=[int(B)], workers=workers).N1[-1] if B >= 1 else 0


def count_N2(p: Pencil, B, workers=None) -> int:
    return count_N(p, B, ladder=[int(B)], workers=workers).N2[-1] if B >= 1 else 0


def count_N(p: Pencil, B, ladder=None, workers=None, predict_P=None) -> CountReport:
    """Exact N, N1, N2 at every rung of the ladder (default: 10^k and 2 * 10^k up to B)."""
    B = int(math.floor(B))
    lad = default_ladder(B) if ladder is None else sorted({int(b) for b in ladder if b <= B} | {B})
    if B < 1:
        return CountReport(lad, [0] * len(lad), [0] * len(lad), [0] * len(lad))
    rep = _run(p, lad, None, workers)
    if predict_P:
        rep.predictions = predicted_constants(p, predict_P)
    return rep


def count_congruence_region(p: Pencil, B, box=None, q=1, a=None, b=None, workers=None,
                            projective=False):
    """Integer-vector pairs (x, y) with H(x)H(y) <= B, x = lambda a and y = mu b mod q,
    x0 != 0 and (x1/x0, x2/x0) in the box.

    Each projective pair has four integer representatives (+-x, +-y) and both the class
    and region conditions are sign-invariant, so the raw count is 4 times the
    sign-normalized count, which is returned instead with projective=True.
    """
    B = int(math.floor(B))
    if B < 1:
        return 0
    flt = _make_filter(box, q, a, b)
    rep = _run(p, [B], flt, workers)
    n = rep.N[-1]
    return n if projective else 4 * n


def count_N2_slow(p: Pencil, B) -> int:
    """N2 through the direct sweep on every fiber conic (no parametrization, no hints)."""
    from .conic import count_conic_points
    B = int(B)
    if B < 1:
        return 0
    S = _Setup(p)
    R = isqrt(B)
    ys = CK.fiber_list(R, B, S.roots, False, 1, np.zeros(2, dtype=np.int64))
    total = 0
    for y0, y1 in ys:
        hy = max(abs(int(y0)), abs(int(y1)))
        X = B // hy
        if X <= hy:
            continue
        total += count_conic_points(fiber_matrix(p, (int(y0), int(y1))), X, hy, method="slow")
        total -= sum(1 for m in S.mpoints if hy < max(map(abs, m)) <= X)
    return total


# ---------------------------------------------------------------------------
# brute-force oracle

def brute_counts(p: Pencil, B, ladder=None, box=None, q=1, a=None, b=None):
    """(N, N1, N2) per rung by enumerating every pair with H(x)H(y) <= B directly."""
    B = int(B)
    if B > 400:
        raise BudgetExceeded("the pair-enumeration oracle is limited to B <= 400")
    lad = [B] if ladder is None else sorted({int(t) for t in ladder} | {B})
    if B < 1:
        z = [0] * len(lad)
        return z, list(z), list(z)
    S = _Setup(p)
    rungs = np.array(lad, dtype=np.int64)
    out = np.zeros((2, len(lad)), dtype=np.int64)
    filt = box is not None or q != 1 or a is not None or b is not None
    flt = _make_filter(box, q, a, b) if filt else None
    gam, qq, acls = flt.args if flt else (_NO_GAMMA, 1, _NO_CLASS)
    bcls = flt.b if flt else np.zeros(2, dtype=np.int64)
    CK.brute_pairs(S.A0, S.A1, B, S.roots, rungs, out, filt, gam, qq, acls, bcls)
    N1 = [int(v) for v in np.cumsum(out[0])]
    N2 = [int(v) for v in np.cumsum(out[1])]
    return [a + b for a, b in zip(N1, N2)], N1, N2


def verify_points(p: Pencil, B):
    """Re-derive every N1 pair below B explicitly and re-check the surface equation and U."""
    bad = 0
    R = isqrt(B)
    for x0 in range(0, R + 1):
        for x1 in range(-R if x0 else 0, R + 1):
            for x2 in range(-R if (x0 or x1) else 1, R + 1):
                if gcd(gcd(x0, x1), x2) != 1:
                    continue
                qa, qb = eval_form(p.q0, (x0, x1, x2)), eval_form(p.q1, (x0, x1, x2))
                if qa == 0 and qb == 0:
                    continue
                y = make_primitive((-qb, qa))
                hx = max(abs(x0), abs(x1), abs(x2))
                if hx <= y.height and hx * y.height <= B and p.cubic(y) != 0:
                    bad += not in_U(p, (x0, x1, x2), y)
    return bad


# ---------------------------------------------------------------------------
# predictions

def predicted_constants(p: Pencil, P: int = 10 ** 4, tol=1e-3, seed=0):
    from .realdensity import tau_infty_formula_A
    from .localarith import singular_series_global

    el = eligibility(p)
    bt = mscheme(p)
    rho = el.rho
    tau = tau_infty_formula_A(p, tol=tol, seed=seed)
    ser = singular_series_global(p, P)
    base = tau.value * ser.value
    c1_coef = Fraction(2 ** 1, 2 ** rho) / (3 * math.factorial(rho - 1))
    rec = {"rho": rho, "eligible": el.eligible, "blowup_type": list(bt.degrees),
           "alpha": str(ALPHA[tuple(sorted(bt.degrees))]),
           "tau_infty": tau.value, "tau_infty_err": tau.est_error,
           "S_series": ser.value, "S_band": ser.band, "P": P,
           "c_S1": float(c1_coef) * base, "c_S1_coef": str(c1_coef)}
    if el.eligible:
        alpha = ALPHA[tuple(sorted(bt.degrees))]
        rec["c_S"] = float(alpha) * base
        rec["c_S2"] = 0.5 * base
        rec["split_check"] = (alpha == c1_coef + Fraction(1, 2))
        rec["c_S1_over_c_S"] = str(c1_coef / alpha)
    else:
        rec["c_S"] = None
        rec["c_S2"] = None
        rec["not_eligible"] = True
    return rec


def fiber_hl_diagnostic(p: Pencil, y, X, P: int = 1000):
    """Actual count on one fiber next to the circle-method shape 1/2 sigma_inf S(Q_y) X.

    sigma_inf is approximated by the sharp-cutoff limit: the density of real zeros of
    Q_y in the sup-norm box, i.e. the limit of vol{|x| <= 1, |Q_y(x)| <= eps} / (2 eps).
    """
    y = make_primitive(y).coords
    A = fiber_matrix(p, y)
    if det3(A) == 0:
        raise SingularFiber("C(y) = 0")
    k = kappa_matrix(A)
    actual = 0
    sig = 0.0
    S = 0.0
    if chi_infty_matrix(A) == 1:
        from .conic import count_conic_points
        actual = count_conic_points(A, X)
        if k:
            try:
                S = singular_series_fiber(p, y, P)
            except BudgetExceeded:
                # a large prime divides det(Q_y) to a high power
                S = None
            sig = _sigma_inf_sharp(A)
    pred = 0.5 * sig * S * X if S is not None else None
    return {"y": list(y), "C_y": int(det3(A)), "kappa": int(k), "count": int(actual),
            "sigma_inf": sig, "S": S, "prediction": pred,
            "ratio": (actual / pred) if pred else None}


def _sigma_inf_sharp(A, n=400):
    """Real density of zeros of Q on the unit sup-norm cube, by integrating over (x0, x1).

    For fixed (x0, x1) the roots x2 of Q in [-1, 1] contribute 1/|dQ/dx2| each.
    """
    Af = np.array(A, dtype=float)
    g = (np.arange(n) + 0.5) / n * 2 - 1
    x0, x1 = np.meshgrid(g, g, indexing="ij")
    a = Af[2, 2]
    b = 2 * (Af[0, 2] * x0 + Af[1, 2] * x1)
    c = Af[0, 0] * x0 ** 2 + 2 * Af[0, 1] * x0 * x1 + Af[1, 1] * x1 ** 2
    tot = np.zeros_like(x0)
    if a == 0:
        with np.errstate(divide="ignore", invalid="ignore"):
            r = -c / b
            ok = np.abs(r) <= 1
            tot += np.where(ok, 1 / np.abs(b), 0)
    else:
        disc = b * b - 4 * a * c
        pos = disc > 0
        s = np.sqrt(np.where(pos, disc, 0))
        for r in ((-b - s) / (2 * a), (-b + s) / (2 * a)):
            ok = pos & (np.abs(r) <= 1) & (s > 0)
            tot += np.where(ok, 1 / np.where(s > 0, s, 1), 0)
    return float(tot.sum() * (2 / n) ** 2)
