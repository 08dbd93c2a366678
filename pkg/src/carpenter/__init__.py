"""Constructive majorization toolkit.

Realizes prescribed diagonals of self-adjoint operators with discrete
spectrum: finite exact constructions via trace-balanced blocks, and
truncated rotation-chain pipelines for each supported tail regime of the
surplus profile.
"""

from .carpenter import (
    ChainState,
    ConstructionResult,
    Operation,
    Residual,
    conservation_construct,
    construct_dispatch,
    decay_chain_construct,
    dips_construct,
    domination_construct,
    eventually_above_construct,
    expand_through,
    plan_domination_chains,
    plan_targeted_chains,
    reduce_prefix,
    replay_target_assignment,
    replay_transforms,
)
from .errors import (
    BracketingError,
    CarpenterError,
    FormatError,
    RegimeError,
    ValidationError,
    WindowError,
)
from .finite_schurhorn import (
    BlockCompression,
    Transfer,
    TransferPlan,
    block_apply,
    block_compression,
    eigen_to_diagonal,
    realize_block,
    robin_hood_plan,
)
from .moves import (
    ChainDiagnostics,
    FrameVector,
    MoveLog,
    PairMove,
    apply_pair_move,
    chain_execute,
    completeness_diagnostics,
    pair_value,
    replay_chain,
    solve_two_by_two,
)
from .operators import (
    CompressedBasisOracle,
    DenseSymmetricOracle,
    DiagonalOracle,
    EntryOracle,
    IntervalLaplacianModel,
    compressed_entry,
    dirichlet_target,
    neumann_model,
    sample_function,
    sine_in_cosine_coeffs,
)
from .sequences import (
    BlockPartition,
    DeltaProfile,
    SequenceSpec,
    TailRegime,
    alpha_floor_shift,
    averaged_interpolant,
    check_finite_majorization,
    check_weak_majorization,
    decay_chain_data,
    delta_profile,
    divergence_diagnostic,
    flat_prefix_transform,
    floor_shift_bounds,
    hlp_majorization_check,
    running_sums,
    running_tail_minima,
    strict_decrease_records,
    tail_minima_transform,
    validate_regime,
    zero_partition,
)
from .serialization import load_result, write_artifacts, write_report
from .verify import (
    DefectRow,
    PerVectorCheck,
    ReplayOutcome,
    VerificationReport,
    completeness_defect,
    diagonal_check,
    gram_check,
    ledger_check,
    replay_operations,
    verify_construction,
)

__version__ = "0.1.0"
