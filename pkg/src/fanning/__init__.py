"""Numerical invariants of fanning curves in the Grassmannian of n-planes in R^2n."""

from .curves import (Exponential, FrameCurve, Jet, Mobius, PolyMap, Polynomial, Reparameterized, Sampled,
                     Transformed, eval_jet, is_fanning, reparameterize, transform_left, transform_right)
from .errors import *  # noqa: F401,F403
from .mats import DEFAULT, Tolerances

__all__ = ["DEFAULT", "Exponential", "FrameCurve", "Jet", "Mobius", "PolyMap", "Polynomial",
           "Reparameterized", "Sampled", "Tolerances", "Transformed", "eval_jet", "is_fanning",
           "reparameterize", "transform_left", "transform_right"]
