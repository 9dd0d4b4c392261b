"""Exact analysis of Haar-system permutations on finite dyadic trees."""
from .carleson import (
    PermutationMap,
    carleson_constant,
    distortion,
    distortion_search,
    is_level_preserving,
    semyonov_K,
    semyonov_search,
)
from .config import Budgets
from .decompose import lemma_split, run_decomposition, stopping_decomposition, verify_certificate
from .dyadic import DyadicInterval, IntervalCollection, TruncatedTree, covered_measure, generations, max_collection
from .errors import *  # noqa: F401,F403
from .exponent import BMO, CarlesonExponent
from .haar_ops import (
    CoefficientSeries,
    Normalization,
    adjoint_permute,
    bmo_over_collection,
    hp_norm,
    indicator_series,
    pairing,
    permute_coefficients,
    weighted_norm_sq,
)

__version__ = "0.1.0"
