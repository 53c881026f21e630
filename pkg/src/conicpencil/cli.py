"""Command-line front end: check, constants, identities, count, equidist, conic."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .errors import PencilError

CSV_COLUMNS = ["B", "N", "N1", "N2", "N1_over_N", "c_S", "c_S1", "c_S2", "pred_N"]


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    pencil_path: str | None
    seed: int = 0
    workers: int | None = None
    out: str | None = None
    extra: dict | None = None


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_convergence_table(report) -> str:
    """One CSV row per rung, fixed column order, full-precision numbers."""
    if not report.B_ladder:
        raise ValueError("empty ladder")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in report.rows():
        w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def _load(path):
    from .forms import load_pencil
    if path is None:
        raise UsageError("--pencil is required")
    if not Path(path).is_file():
        raise UsageError(f"pencil file not found: {path}")
    try:
        return load_pencil(path)
    except (ValueError, KeyError, PencilError) as exc:
        raise UsageError(f"cannot read pencil file {path}: {exc}") from exc


def _ints(text, n, what):
    try:
        vals = [int(t) for t in text.split(",")]
    except (AttributeError, ValueError):
        raise UsageError(f"{what} must be {n} comma-separated integers") from None
    if len(vals) != n:
        raise UsageError(f"{what} must be {n} comma-separated integers")
    return vals


def _box(text):
    if text is None:
        return None
    parts = text.split(",")
    if len(parts) != 4:
        raise UsageError("--gamma must be x1lo,x1hi,x2lo,x2hi")
    out = []
    for t in parts:
        t = t.strip()
        if t in ("", "-inf", "inf", "+inf"):
            out.append(None)
        else:
            try:
                out.append(Fraction(t))
            except ValueError:
                raise UsageError(f"bad --gamma entry {t!r}") from None
    return tuple(out)


def _write(obj, out):
    text = json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands

def cmd_check(cfg):
    from .classify import eligibility, mscheme, rho_via_fibers
    from .forms import is_smooth
    p = _load(cfg.pencil_path)
    c = p.cubic
    rec = {"name": p.name, "cubic": list(c.coeffs), "disc": c.disc, "smooth": is_smooth(p)}
    if rec["smooth"]:
        el = eligibility(p)
        bt = mscheme(p)
        rf = rho_via_fibers(p)
        rec.update(eligible=el.eligible, rho=el.rho, galois=el.galois,
                   blowup_type=list(bt.degrees), m_has_qpoint=el.m_has_qpoint,
                   c_has_qroot=el.c_has_qroot, rho_via_fibers=(rf if rf else None))
    _write(rec, cfg.out)
    return 0


def cmd_constants(cfg):
    from .counting import predicted_constants
    p = _load(cfg.pencil_path)
    rec = predicted_constants(p, cfg.extra["pmax"], tol=cfg.extra["tol"], seed=cfg.seed)
    _write(rec, cfg.out)
    return 0


def cmd_identities(cfg):
    from .forms import normalize6
    from .localarith import identity_suite
    from .nt import primes_upto
    p = _load(cfg.pencil_path)
    pmax, kmax = cfg.extra["pmax"], cfg.extra["kmax"]
    primes = [q for q in primes_upto(pmax) if q >= 5]
    entries = identity_suite(p, primes, kmax)
    if cfg.extra["normalize6"]:
        small = identity_suite(normalize6(p), [2, 3], kmax)
        entries += [dict(e, normalized6=True) for e in small if e["identity"] == "fS_from_fM"]
    failed = [e for e in entries if e["pass"] is False]
    _write({"entries": entries, "failed": len(failed), "checked": len(entries)}, cfg.out)
    return 1 if failed else 0


def cmd_count(cfg):
    from .counting import count_N, parse_ladder, predicted_constants
    p = _load(cfg.pencil_path)
    bmax = cfg.extra["bmax"]
    if bmax < 1:
        raise UsageError("--bmax must be positive")
    ladder = parse_ladder(cfg.extra["ladder"], bmax)
    t0 = time.time()
    rep = count_N(p, bmax, ladder=ladder, workers=cfg.workers)
    if cfg.extra["predict_P"]:
        rep.predictions = predicted_constants(p, cfg.extra["predict_P"], seed=cfg.seed)
    rep.timing["wall"] = time.time() - t0
    print("timing: " + json.dumps(rep.timing, sort_keys=True), file=sys.stderr)
    out = cfg.out
    if out and out.endswith(".csv"):
        Path(out).write_text(emit_convergence_table(rep))
    else:
        _write(rep.to_dict(), out)
    return 0


def cmd_equidist(cfg):
    from .counting import count_congruence_region
    from .localarith import varpi_congruence
    p = _load(cfg.pencil_path)
    ex = cfg.extra
    q = ex["mod"]
    a = _ints(ex["a"], 3, "--a")
    b = _ints(ex["b"], 2, "--b")
    box = _box(ex["gamma"])
    n = count_congruence_region(p, ex["bmax"], box, q, a, b, workers=cfg.workers)
    rec = {"B": ex["bmax"], "mod": q, "a": a, "b": b, "gamma": ex["gamma"], "count": n}
    if q > 1:
        from .nt import factorint
        fac = factorint(q)
        if len(fac) == 1:
            (ell, e), = fac.items()
            k = max(e, ex["depth"])
            rec["varpi"] = float(varpi_congruence(p, ell, q, a, b, k))
            rec["varpi_depth"] = k
    _write(rec, cfg.out)
    return 0


def cmd_conic(cfg):
    from .conic import (count_conic_points, is_locally_solvable, local_obstructions,
                        minimal_zero)
    from .forms import det3, fiber_matrix
    ex = cfg.extra
    if ex["matrix"]:
        m = _ints(ex["matrix"], 9, "--matrix")
        A = tuple(tuple(m[3 * i:3 * i + 3]) for i in range(3))
        if any(A[i][j] != A[j][i] for i in range(3) for j in range(3)):
            raise UsageError("--matrix must be symmetric")
    else:
        p = _load(cfg.pencil_path)
        if ex["y"] is None:
            raise UsageError("give --matrix or --pencil with --y")
        A = fiber_matrix(p, _ints(ex["y"], 2, "--y"))
    if det3(A) == 0:
        raise UsageError("the form is singular")
    sol = minimal_zero(A)
    rec = {"matrix": [list(r) for r in A], "det": det3(A),
           "locally_solvable": is_locally_solvable(A),
           "obstructions": [str(v) for v in local_obstructions(A)],
           "minimal_zero": list(sol.zero.coords) if sol.zero else None}
    if ex["X"]:
        rec["X"] = ex["X"]
        rec["count"] = count_conic_points(A, ex["X"])
    _write(rec, cfg.out)
    return 0


COMMANDS = {"check": cmd_check, "constants": cmd_constants, "identities": cmd_identities,
            "count": cmd_count, "equidist": cmd_equidist, "conic": cmd_conic}


def run(cfg: RunConfig) -> int:
    try:
        return COMMANDS[cfg.subcommand](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def build_parser():
    ap = argparse.ArgumentParser(prog="conicpencil", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(sp):
        sp.add_argument("--pencil", help="pencil JSON file {Q0, Q1, name?}")
        sp.add_argument("--out", help="output path (.json or .csv); stdout if omitted")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: CONICPENCIL_WORKERS or CPU count)")
        return sp

    common(sub.add_parser("check", help="smoothness, Picard rank, eligibility"))
    sp = common(sub.add_parser("constants", help="predicted leading constants"))
    sp.add_argument("--pmax", type=int, default=10 ** 4)
    sp.add_argument("--tol", type=float, default=1e-3)
    sp = common(sub.add_parser("identities", help="exact congruence-count identities"))
    sp.add_argument("--pmax", type=int, default=31)
    sp.add_argument("--kmax", type=int, default=2)
    sp.add_argument("--normalize6", action="store_true")
    sp = common(sub.add_parser("count", help="N, N1, N2 along a ladder of bounds"))
    sp.add_argument("--bmax", type=int, required=True)
    sp.add_argument("--ladder", default="default", help="default | dyadic | comma list")
    sp.add_argument("--predict-P", type=int, default=0, dest="predict_P",
                    help="also attach predicted constants with this prime cutoff")
    sp = common(sub.add_parser("equidist", help="congruence and region restricted count"))
    sp.add_argument("--bmax", type=int, required=True)
    sp.add_argument("--gamma", default=None, help="x1lo,x1hi,x2lo,x2hi (empty = unbounded)")
    sp.add_argument("--mod", type=int, default=1)
    sp.add_argument("--a", default="1,0,0")
    sp.add_argument("--b", default="1,0")
    sp.add_argument("--depth", type=int, default=3, help="p-adic depth for the density")
    sp = common(sub.add_parser("conic", help="one conic: isotropy, minimal zero, count"))
    sp.add_argument("--matrix", help="9 comma-separated integers, row major")
    sp.add_argument("--y", help="fiber y0,y1 of --pencil")
    sp.add_argument("--X", type=int, default=0)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    extra = {k: v for k, v in vars(args).items()
             if k not in ("cmd", "pencil", "out", "seed", "workers")}
    cfg = RunConfig(args.cmd, args.pencil, args.seed, args.workers, args.out, extra)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
