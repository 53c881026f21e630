"""Real density tau_infty by adaptive cubature, plus sublevel-measure diagnostics."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import SmoothnessRequired
from .forms import Pencil, is_smooth

DEFAULT_TOL = 1e-3


@dataclass
class QuadratureResult:
    value: float
    est_error: float
    evaluations: int
    method: str
    converged: bool = True
    flagged_cells: int = 0


def _mats(p: Pencil):
    A0 = np.array(p.q0.matrix, dtype=float)
    A1 = np.array(p.q1.matrix, dtype=float)
    return A0, A1


def h_values(A0, A1, V):
    """max(|Q0(v)|, |Q1(v)|) for rows v of V."""
    q0 = np.einsum("ni,ij,nj->n", V, A0, V)
    q1 = np.einsum("ni,ij,nj->n", V, A1, V)
    return np.maximum(np.abs(q0), np.abs(q1))


# ---------------------------------------------------------------------------
# Genz-Malik degree 7 rule with embedded degree 5 rule

class GenzMalik:
    def __init__(self, n):
        self.n = n
        l2, l3, l4, l5 = math.sqrt(9 / 70), math.sqrt(9 / 10), math.sqrt(9 / 10), math.sqrt(9 / 19)
        self.r = l2 * l2 / (l3 * l3)
        w = [(12824 - 9120 * n + 400 * n * n) / 19683, 980 / 6561, (1820 - 400 * n) / 19683,
             200 / 19683, 6859 / 19683 / 2 ** n]
        wp = [(729 - 950 * n + 50 * n * n) / 729, 245 / 486, (265 - 100 * n) / 1458, 25 / 729]
        pts, w7, w5 = [np.zeros(n)], [w[0]], [wp[0]]
        for lam, k in ((l2, 1), (l3, 2)):
            for i in range(n):
                for s in (1, -1):
                    e = np.zeros(n)
                    e[i] = s * lam
                    pts.append(e)
                    w7.append(w[k])
                    w5.append(wp[k])
        for i in range(n):
            for j in range(i + 1, n):
                for si in (1, -1):
                    for sj in (1, -1):
                        e = np.zeros(n)
                        e[i], e[j] = si * l4, sj * l4
                        pts.append(e)
                        w7.append(w[3])
                        w5.append(wp[3])
        for signs in np.ndindex(*([2] * n)):
            pts.append(np.array([l5 if s == 0 else -l5 for s in signs]))
            w7.append(w[4])
            w5.append(0.0)
        self.pts = np.array(pts)
        self.w7 = np.array(w7)
        self.w5 = np.array(w5)
        self.npts = len(pts)

    def apply(self, f, centers, halfw):
        """Returns (I7, I5, split axis) for each cell."""
        m, n = centers.shape
        X = centers[:, None, :] + self.pts[None, :, :] * halfw[:, None, :]
        F = f(X.reshape(-1, n)).reshape(m, self.npts)
        vol = np.prod(2 * halfw, axis=1)
        i7 = vol * (F @ self.w7)
        i5 = vol * (F @ self.w5)
        f0 = F[:, :1]
        d2 = F[:, 1:1 + 2 * n].reshape(m, n, 2).sum(axis=2) - 2 * f0
        d3 = F[:, 1 + 2 * n:1 + 4 * n].reshape(m, n, 2).sum(axis=2) - 2 * f0
        axis = np.argmax(np.abs(d2 - self.r * d3), axis=1)
        return i7, i5, axis


def adaptive_cubature(f, lo, hi, tol=DEFAULT_TOL, max_evals=4_000_000, init_div=4,
                      flag=None, mc_rng=None, min_width=1e-7, batch=64):
    """Global adaptive Genz-Malik cubature of vectorized f over the box [lo, hi].

    `flag(centers, halfw)` marks singular cells; flagged cells that reach the
    width floor are settled by stratified Monte Carlo with 10x the rule's points.
    """
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    n = lo.size
    gm = GenzMalik(n)
    grids = [np.linspace(lo[i], hi[i], init_div + 1) for i in range(n)]
    cells = []
    for idx in np.ndindex(*([init_div] * n)):
        a = np.array([grids[i][idx[i]] for i in range(n)])
        b = np.array([grids[i][idx[i] + 1] for i in range(n)])
        cells.append(((a + b) / 2, (b - a) / 2))
    C = np.array([c for c, _ in cells])
    H = np.array([h for _, h in cells])
    i7, i5, ax = gm.apply(f, C, H)
    evals = len(cells) * gm.npts
    heap = []
    tie = 0
    total = math.fsum(i7)
    for k in range(len(cells)):
        err = abs(i7[k] - i5[k])
        heap.append((-err, tie, C[k], H[k], i7[k], int(ax[k])))
        tie += 1
    heapq.heapify(heap)
    settled_v, settled_e, nflag = [], [], 0
    err_total = sum(-e[0] for e in heap)
    while heap and evals < max_evals and err_total > tol * abs(total):
        take = [heapq.heappop(heap) for _ in range(min(batch, len(heap)))]
        newC, newH, parents = [], [], []
        for negerr, _, c, h, val, a in take:
            if h[a] < min_width:
                # width floor reached: Monte Carlo inside the cell
                if flag is not None and mc_rng is not None and flag(c[None], h[None])[0]:
                    nflag += 1
                    npts = 10 * gm.npts
                    u = c + h * (2 * mc_rng.random((npts, n)) - 1)
                    vals = f(u) * np.prod(2 * h)
                    settled_v.append(vals.mean())
                    settled_e.append(vals.std() / math.sqrt(npts))
                    evals += npts
                else:
                    settled_v.append(val)
                    settled_e.append(-negerr)
                total += settled_v[-1] - val
                err_total += settled_e[-1] - (-negerr)
                continue
            h2 = h.copy()
            h2[a] /= 2
            for s in (-1, 1):
                c2 = c.copy()
                c2[a] += s * h2[a]
                newC.append(c2)
                newH.append(h2)
            parents.append((negerr, val))
        if not newC:
            continue
        C, H = np.array(newC), np.array(newH)
        i7, i5, ax = gm.apply(f, C, H)
        evals += len(newC) * gm.npts
        for negerr, val in parents:
            total -= val
            err_total -= -negerr
        total += math.fsum(i7)
        for k in range(len(newC)):
            err = abs(i7[k] - i5[k])
            err_total += err
            heapq.heappush(heap, (-err, tie, C[k], H[k], i7[k], int(ax[k])))
            tie += 1
    vals = [e[4] for e in heap] + settled_v
    errs = [-e[0] for e in heap] + settled_e
    value = math.fsum(vals)
    est = math.fsum(errs)
    return value, est, evals, est <= tol * abs(value), nflag


def _require_smooth(p):
    if not is_smooth(p):
        raise SmoothnessRequired("pencil is not smooth")


def _integrand_A(A0, A1):
    def f(T):
        c1, s1 = np.cos(T[:, 0]), np.sin(T[:, 0])
        c2, s2 = np.cos(T[:, 1]), np.sin(T[:, 1])
        V = np.stack([c1 * c2, s1 * c2, c1 * s2], axis=1)
        h = h_values(A0, A1, V)
        nrm = np.abs(V).max(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = c1 * c2 / (h * nrm)
        return np.where(np.isfinite(out), out, 0.0)
    return f


def _flag_A(A0, A1):
    def flag(C, H):
        f = _integrand_A(A0, A1)
        diam = 2 * np.linalg.norm(H, axis=1)
        corners = [C + H * np.array(s) for s in ((1, 1), (1, -1), (-1, 1), (-1, -1))]
        small = np.zeros(len(C), dtype=bool)
        for K in corners:
            c1, s1, c2, s2 = np.cos(K[:, 0]), np.sin(K[:, 0]), np.cos(K[:, 1]), np.sin(K[:, 1])
            V = np.stack([c1 * c2, s1 * c2, c1 * s2], axis=1)
            small |= h_values(A0, A1, V) < 10 * diam
        return small
    return flag


def _tau_A_box(p, tlo, thi, tol, seed, max_evals):
    A0, A1 = _mats(p)
    rng = np.random.Generator(np.random.Philox(seed))
    v, e, n, ok, nf = adaptive_cubature(_integrand_A(A0, A1), tlo, thi, tol=tol,
                                        max_evals=max_evals, flag=_flag_A(A0, A1), mc_rng=rng)
    return QuadratureResult(v, e, n, "A:genz-malik-tan", ok, nf)


def tau_infty_formula_A(p: Pencil, tol=DEFAULT_TOL, seed=0, max_evals=4_000_000):
    """Plane integral of 1/(h(1,u) ||(1,u)||) with u = tan(theta) per axis."""
    _require_smooth(p)
    h = math.pi / 2
    return _tau_A_box(p, [-h, -h], [h, h], tol, seed, max_evals)


def tau_infty_formula_B(p: Pencil, tol=DEFAULT_TOL, seed=0, max_evals=6_000_000):
    """Half the integral of 1/h over the unit sup-norm ball.

    The integrand is even, so we integrate over v0 >= 0 and drop the factor 1/2.
    """
    _require_smooth(p)
    A0, A1 = _mats(p)

    def f(V):
        h = h_values(A0, A1, V)
        with np.errstate(divide="ignore"):
            out = 1.0 / h
        return np.where(np.isfinite(out), out, 0.0)

    def flag(C, H):
        diam = 2 * np.linalg.norm(H, axis=1)
        small = np.zeros(len(C), dtype=bool)
        for s in np.ndindex(2, 2, 2):
            K = C + H * (2 * np.array(s) - 1)
            small |= h_values(A0, A1, K) < 10 * diam
        return small

    rng = np.random.Generator(np.random.Philox(seed))
    v, e, n, ok, nf = adaptive_cubature(f, [0, -1, -1], [1, 1, 1], tol=tol, max_evals=max_evals,
                                        init_div=2, flag=flag, mc_rng=rng, min_width=1e-6)
    return QuadratureResult(v, e, n, "B:genz-malik-cube", ok, nf)


def tau_infty_region(p: Pencil, box, tol=DEFAULT_TOL, seed=0, max_evals=2_000_000):
    """Formula A restricted to (u1, u2) in the box (u1lo, u1hi, u2lo, u2hi); infinities allowed."""
    _require_smooth(p)
    a1, b1, a2, b2 = (float(t) for t in box)
    if a1 >= b1 or a2 >= b2:
        return QuadratureResult(0.0, 0.0, 0, "A:empty", True, 0)
    tlo = [math.atan(a1), math.atan(a2)]
    thi = [math.atan(b1), math.atan(b2)]
    return _tau_A_box(p, tlo, thi, tol, seed, max_evals)


def _face_points(rng, n):
    """n uniform points on the boundary of [-1,1]^3 restricted to the three faces v_i = 1."""
    face = rng.integers(0, 3, n)
    W = 2 * rng.random((n, 3)) - 1
    W[np.arange(n), face] = 1.0
    return W


def tau_infty_mc(p: Pencil, samples=10 ** 7, seed=0, chunk=10 ** 6):
    """Monte Carlo oracle: half the cube integral equals the sum over three faces of int dA / h."""
    A0, A1 = _mats(p)
    rng = np.random.Generator(np.random.Philox(seed))
    s = s2 = 0.0
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        W = _face_points(rng, n)
        vals = 12.0 / h_values(A0, A1, W)   # 3 faces of area 4
        s += math.fsum(vals)
        s2 += math.fsum(vals * vals)
        done += n
    mean = s / samples
    var = max(s2 / samples - mean * mean, 0.0)
    return mean, math.sqrt(var / samples)


def sublevel_measure(p: Pencil, lam: float, samples=10 ** 6, seed=0):
    """Monte Carlo estimate of meas{v in [-1,1]^3 : h(v) <= lam} with its standard error.

    Each sample is a point w on the cube boundary; along the ray r w (0 <= r <= 1)
    the set is r <= sqrt(lam / h(w)), so the radial part is integrated exactly.
    """
    if lam < 0:
        raise ValueError("level must be nonnegative")
    A0, A1 = _mats(p)
    rng = np.random.Generator(np.random.Philox(seed))
    W = _face_points(rng, samples)
    h = h_values(A0, A1, W)
    with np.errstate(divide="ignore"):
        r = np.minimum(1.0, np.sqrt(lam / h))
    r = np.where(np.isfinite(r), r, 1.0)
    vals = 24.0 * r ** 3 / 3.0   # 6 faces of area 4, radial weight r^2 dr
    return float(vals.mean()), float(vals.std() / math.sqrt(samples))
