"""Rational points on quintic del Pezzo surfaces given by pencils of ternary quadratic forms."""
from .forms import (BinaryCubic, Pencil, ProjVec, QuadForm3, disc_cubic, eval_form,
                    fiber_form, is_smooth, load_pencil, make_primitive, normalize6,
                    rank_mod_p)

__version__ = "0.1.0"

__all__ = ["BinaryCubic", "Pencil", "ProjVec", "QuadForm3", "disc_cubic", "eval_form",
           "fiber_form", "is_smooth", "load_pencil", "make_primitive", "normalize6",
           "rank_mod_p"]
