"""Arithmetic restricted volumes and Okounkov semigroups of diagonal adelic models on P^n."""

from .concave import toric_lower_bound
from .flags import GoodFlag, find_good_flag, valuation_vector
from .lattice import (
    CLSubset,
    ConvexBody,
    CountResult,
    Lattice,
    cl_count,
    cl_hull,
    count_l1,
    dilate_count,
    hnf,
    lattice_span,
    star_sum,
)
from .logq import LogQ, format_logq, parse_logq
from .model import (
    INF,
    AffinePiece,
    BaseLocus,
    DiagonalModel,
    Place,
    Section,
    WeightFunction,
    adeg_diagonal_nef,
    augmented_base_locus,
    delta_upper,
    enumerate_strictly_small,
    from_max_family,
    height,
    is_nef,
    is_w_ample,
    norm,
    restrict_to_face,
    scale,
    stable_base_locus_ss,
    tensor,
    twist_finite,
    twist_infinity,
    vertical_degree_identity,
    zhang_moriwaki_check,
)
from .modelio import ModelError, dumps_model, load_model, loads_model, model_from_json, model_to_json
from .okounkov import (
    SemigroupSample,
    VolumeReport,
    build_semigroup,
    geometric_mult_estimate,
    kappa_hat,
    kkok_cross_check,
    volume_estimate,
)
from .verify import Certificate

__all__ = [name for name in dir() if not name.startswith("_")]
