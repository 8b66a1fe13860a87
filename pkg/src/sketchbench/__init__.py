"""Randomized low-rank approximation toolkit: sketch distributions,
subspace-iteration SVD, Nystrom, bound evaluators, and a sweep harness."""

from .algorithms import (
    LowRankApprox,
    SketchConfig,
    StructuralReport,
    nystrom,
    randomized_svd,
    relative_error,
    structural_report,
    truncate,
)
from .bounds import (
    BoundParams,
    BoundReport,
    gauss_bound,
    mc_gaussian_width,
    nystrom_bound,
    sample_size,
    term_bound,
)
from .distributions import (
    DistributionSpec,
    SeedSpec,
    column_scale,
    derive_leverage_probabilities,
    empirical_isotropy_deficit,
    estimate_subgaussian_norm,
    format_spec,
    hadamard_matrix,
    parse_spec,
    sample,
    with_probabilities,
)
from .kernels import (
    SpectrumInfo,
    ThinQR,
    ThinSVD,
    coherence,
    leverage_scores,
    pseudoinverse,
    spectral_norm,
    split_spectrum,
    stable_rank,
    thin_qr,
    thin_svd,
    truncated_svd,
)
from .matio import load_matrix, save_matrix
from .sweep import SweepConfig, emit_csv, emit_svg, run_bound_check, run_sweep
from .testmatrices import (
    MatrixRecipe,
    controlled_gap,
    fast_decay,
    fast_decay_psd,
    load_csv_features,
    rbf_laplacian,
)

__version__ = "0.1.0"
