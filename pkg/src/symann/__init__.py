"""Approximate near neighbor search for symmetric norms."""
from .vecnorm import (
    DualNotConverged,
    KFunctional,
    Lp,
    MaxOfScaledTopK,
    Maximal,
    Minimal,
    Orlicz,
    Scaled,
    SymmetricNorm,
    TopK,
    catalog,
    dual_norm_eval,
    flat_vector,
    norm_eval,
    sorted_abs,
    top_k_norm,
    weakly_majorizes,
)

__version__ = "0.1.0"
