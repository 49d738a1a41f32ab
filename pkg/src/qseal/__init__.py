"""Desk-scale simulator for quantum sealed-message protocols.

Sparse exact states, honest and adversarial parties, and the numerical
verification of the detection bounds they obey.
"""

from .adversary import (
    CheatReport,
    InvalidIndex,
    PartialPredicate,
    ProofChain,
    basis_cheat,
    generic_cheat,
    optimal_post_collapse_response,
    predicate_cheat,
    proof_chain,
    random_strategy_sweep,
    soundness_bound,
    strategy_report,
)
from .harness import (
    ConfigInvalid,
    ExperimentConfig,
    InvariantViolation,
    NegligibilityRow,
    ScalingRow,
    SweepRow,
    emit_report,
    run_bound_sweep,
    run_multipicture_scaling,
    run_oaep_negligibility,
)
from .oaep import (
    CaptchaFunction,
    DegenerateUWarning,
    HumanOracle,
    LengthMismatch,
    OaepContext,
    OaepParams,
    OracleUnavailable,
    encode,
    r_set,
    seal_oaep,
    tu_overlap,
    unseal_oaep,
    useless_query_bound,
)
from .protocols import (
    DuplicatePicture,
    EmptyGarbageSet,
    LabelCollision,
    SealedInstance,
    TooFewPictures,
    UnsealSpec,
    honest_unseal,
    instance_from_dict,
    instance_to_dict,
    seal_garbage,
    seal_multipicture,
    seal_naive,
    verify_return,
)
from .states import (
    DimensionTooLarge,
    Ensemble,
    LocalUnitary,
    ProjPartition,
    SparseState,
    UncoveredLabel,
    UnknownLabel,
    apply_unitary_c,
    collapse_branches,
    hermitian_eigenvalues,
    inner_product,
    measure_partition,
    project_accept_probability,
    random_unitary,
    squared_overlap,
    state_from_dict,
    state_from_json,
    state_to_dict,
    state_to_json,
    trace_distance_pure,
    trace_distance_pure_vs_ensemble,
)

__version__ = "0.1.0"
