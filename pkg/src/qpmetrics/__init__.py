"""Finite-outcome operator-valued measures, their total-variation and
dilation distances, input-indexed channels, almost-everywhere
equivalence, and constructive compactness utilities."""

from .errors import (
    EmptyInputError,
    InvalidArgumentError,
    InvariantViolationError,
    NotPSDError,
    ParseError,
    QpmError,
    SchemaVersionError,
    ShapeError,
)
from .kernels import backend as kernel_backend
from .operators import (
    complete_to_unitary,
    dagger,
    eig_hermitian,
    hermiticity_residual,
    hermitize,
    operator_norm,
    sqrt_psd,
)
from .qpm import (
    EXACT_CAP,
    QPM,
    CellGeometry,
    DistanceResult,
    OutcomeSpace,
    ScalarMeasure,
    TestFunction,
    ValidationReport,
    apply_ucp,
    bw_gap,
    delta_distance,
    finite_space,
    indicator,
    rho_distance,
    rho_phase_grid,
    scalar_measure,
    sw_gap,
    total_variation,
    tv_norm,
    validate_qpm,
)
from .dilation import (
    BuresResult,
    DilationTriple,
    SpectralMeasure,
    SpectralReport,
    bures_distance,
    dilation_residual,
    is_spectral,
    naimark_continuity_check,
    naimark_dilate,
)
from .channels import (
    Channel,
    ChannelDistanceResult,
    ChannelSequence,
    ChannelValidationReport,
    ExtractionResult,
    InputSpace,
    apply_channel_ucp,
    channel_opnorm_gap,
    constant_channel,
    extract_convergent_subsequence,
    input_space,
    max_effect_distance,
    psw_gap,
    rho_tilde,
    validate_channel,
)
from .modmu import (
    InputMeasure,
    ModMuChannel,
    ModMuDilationResult,
    WeightFunction,
    bw_gap_mod_mu,
    bw_pairing,
    canonical_family,
    canonicalize_mod_mu,
    equiv_mod_mu,
    input_indicator,
    naimark_mod_mu,
    ucp_equiv_mod_mu,
    uniform_measure,
)
from .spaces import SpaceSpec, coarsen, discretize_scalar_density, make_space
from .rng import random_channel, random_qpm, random_sequence
from .io import (
    SCHEMA,
    InstanceFile,
    parse_instance,
    read_instance,
    serialize_instance,
    write_instance,
)

__version__ = "0.1.0"

__all__ = [
    "EmptyInputError",
    "InvalidArgumentError",
    "InvariantViolationError",
    "NotPSDError",
    "ParseError",
    "QpmError",
    "SchemaVersionError",
    "ShapeError",
    "kernel_backend",
    "complete_to_unitary",
    "dagger",
    "eig_hermitian",
    "hermiticity_residual",
    "hermitize",
    "operator_norm",
    "sqrt_psd",
    "EXACT_CAP",
    "QPM",
    "CellGeometry",
    "DistanceResult",
    "OutcomeSpace",
    "ScalarMeasure",
    "TestFunction",
    "ValidationReport",
    "apply_ucp",
    "bw_gap",
    "delta_distance",
    "finite_space",
    "indicator",
    "rho_distance",
    "rho_phase_grid",
    "scalar_measure",
    "sw_gap",
    "total_variation",
    "tv_norm",
    "validate_qpm",
    "BuresResult",
    "DilationTriple",
    "SpectralMeasure",
    "SpectralReport",
    "bures_distance",
    "dilation_residual",
    "is_spectral",
    "naimark_continuity_check",
    "naimark_dilate",
    "Channel",
    "ChannelDistanceResult",
    "ChannelSequence",
    "ChannelValidationReport",
    "ExtractionResult",
    "InputSpace",
    "apply_channel_ucp",
    "channel_opnorm_gap",
    "constant_channel",
    "extract_convergent_subsequence",
    "input_space",
    "max_effect_distance",
    "psw_gap",
    "rho_tilde",
    "validate_channel",
    "InputMeasure",
    "ModMuChannel",
    "ModMuDilationResult",
    "WeightFunction",
    "bw_gap_mod_mu",
    "bw_pairing",
    "canonical_family",
    "canonicalize_mod_mu",
    "equiv_mod_mu",
    "input_indicator",
    "naimark_mod_mu",
    "ucp_equiv_mod_mu",
    "uniform_measure",
    "SpaceSpec",
    "coarsen",
    "discretize_scalar_density",
    "make_space",
    "random_channel",
    "random_qpm",
    "random_sequence",
    "SCHEMA",
    "InstanceFile",
    "parse_instance",
    "read_instance",
    "serialize_instance",
    "write_instance",
    "__version__",
]
