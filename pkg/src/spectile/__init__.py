"""spectile: certificates for structured exponential Riesz bases on
multi-tiling spectra, and fiberwise canonical forms of shift-preserving
operators, computed on a sampled fundamental cell."""

__version__ = "0.1.0"

from .lattice import FundamentalDomain, Lattice
from .multitile import (
    BoxUnion,
    FiberSampleGrid,
    LambdaSet,
    LambdaVector,
    MultiTileConfig,
    decompose_into_one_tiles,
    enumerate_lambda_set,
    lambda_vector,
    tiling_level_at,
    verify_k_tiling,
)
from .expbases import (
    certify_structured_basis,
    check_admissibility,
    check_separation,
    delta_alpha_gap,
    e_matrix,
    factor_t_matrix,
    riesz_bounds,
    search_structured_basis,
    two_tile_converse,
    vandermonde_frequencies,
)
from .fibers import (
    FiberVectorField,
    LatticeWindow,
    RangeField,
    SpectrumMask,
    dimension_strata,
    fiber_subspace_combine,
    fiberize_pw_kernel,
    generator_with_full_spectrum,
    length,
    range_field_from_generators,
    spectrum,
    tile_range_field,
)
from .shift_ops import (
    RangeOperatorField,
    adjoint_and_normality,
    diagonalize_normal,
    kernel_image_fields,
    lambda_a_apply,
    multiplier_operator_field,
    op_norm,
    s_eigenvalue_extract,
    select_eigenvalue_field,
    shift_operator_field,
    triangularize,
)

__all__ = [name for name in dir() if not name.startswith("_")]
