"""Differentially private distance correlation between two parties.

Core estimators (unbiased, random-projection, and kernel-route distance
covariance), calibrated Gaussian/Laplace mechanisms with budget
accounting, a one-way Alice-to-Bob protocol over streams or TCP, utility
decomposition and concentration bounds, and a benchmark CLI.
"""

from .bench import (
    CSV_COLUMNS,
    GRID_SEMANTICS,
    SweepConfig,
    SweepResult,
    allocate_budget,
    emit_report,
    run_sweep,
)
from .bounds import (
    BoundInputs,
    DecompositionReport,
    ErrorBound,
    VacuousBoundWarning,
    alpha_from_t,
    bob_noise_dcov_estimate,
    decomposition_terms,
    empirical_projection_scale,
    error_bound,
    half_normal_moments,
    lemma1_bound,
    residual_coefficient,
    t_threshold,
)
from .datasets import (
    SYNTH_RECIPES,
    Dataset,
    load_csv,
    minmax_columns,
    split_features,
    synth_dataset,
)
from .errors import (
    BudgetError,
    ConfigError,
    DataError,
    DecodeError,
    DpdcorError,
    PartitionError,
    ProtocolError,
    TransportError,
    exit_code_for,
)
from .estimators import (
    ESTIMATE_KINDS,
    EstimateRecord,
    ProjectionSet,
    as_data_matrix,
    dcov_via_hsic,
    hsic,
    induced_kernel,
    pairwise_distances,
    projected_dcov,
    projection_constant,
    sample_unit_projections,
    unbiased_dcorr,
    unbiased_dcov,
)
from .privacy import (
    PROTOCOL_VARIANTS,
    BudgetLedger,
    NoiseSpec,
    PrivacyBudget,
    compose_budget,
    gaussian_sigma,
    hsic_global_sensitivity,
    l2_sensitivity,
    privatize_dvar,
    privatize_projection,
    sample_laplace,
)
from .protocol import (
    MESSAGE_TAGS,
    NORMALIZATIONS,
    PROTOCOL_VERSION,
    TRANSPORTS,
    DcorrResult,
    ProtocolConfig,
    ProtocolMessage,
    alice_prepare,
    bob_compute,
    build_noise_spec,
    connect_and_send,
    decode_message,
    derive_bob_seed,
    encode_message,
    partition_rows,
    read_session,
    run_session,
    serve_bob,
    write_session,
)

__version__ = "0.1.0"

__all__ = [
    "BoundInputs",
    "BudgetError",
    "BudgetLedger",
    "CSV_COLUMNS",
    "ConfigError",
    "DataError",
    "Dataset",
    "DcorrResult",
    "DecodeError",
    "DecompositionReport",
    "DpdcorError",
    "ESTIMATE_KINDS",
    "ErrorBound",
    "EstimateRecord",
    "GRID_SEMANTICS",
    "MESSAGE_TAGS",
    "NORMALIZATIONS",
    "NoiseSpec",
    "PROTOCOL_VARIANTS",
    "PROTOCOL_VERSION",
    "PartitionError",
    "PrivacyBudget",
    "ProjectionSet",
    "ProtocolConfig",
    "ProtocolError",
    "ProtocolMessage",
    "SYNTH_RECIPES",
    "SweepConfig",
    "SweepResult",
    "TRANSPORTS",
    "TransportError",
    "VacuousBoundWarning",
    "alice_prepare",
    "allocate_budget",
    "alpha_from_t",
    "as_data_matrix",
    "bob_compute",
    "bob_noise_dcov_estimate",
    "build_noise_spec",
    "compose_budget",
    "connect_and_send",
    "dcov_via_hsic",
    "decode_message",
    "decomposition_terms",
    "derive_bob_seed",
    "emit_report",
    "empirical_projection_scale",
    "encode_message",
    "error_bound",
    "exit_code_for",
    "gaussian_sigma",
    "half_normal_moments",
    "hsic",
    "hsic_global_sensitivity",
    "induced_kernel",
    "l2_sensitivity",
    "lemma1_bound",
    "load_csv",
    "minmax_columns",
    "pairwise_distances",
    "partition_rows",
    "privatize_dvar",
    "privatize_projection",
    "projected_dcov",
    "projection_constant",
    "read_session",
    "residual_coefficient",
    "run_session",
    "run_sweep",
    "sample_laplace",
    "sample_unit_projections",
    "serve_bob",
    "split_features",
    "synth_dataset",
    "t_threshold",
    "unbiased_dcorr",
    "unbiased_dcov",
    "write_session",
]
