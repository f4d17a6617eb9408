"""Entanglement concentration on noisy hardware.

Simulates conclusive conversion of noisy entangled pairs into Bell pairs,
with and without a catalyst pair, compiled into measurement rounds with an
MCX gate-cost model, plus a 2-to-1 distillation baseline for comparison.
"""

from .majorize import (
    TTransform,
    birkhoff_decompose,
    build_doubly_stochastic,
    group_ttransforms,
    is_majorized,
    t_transform_decompose,
    vidal_intermediate,
    vidal_probability,
)
from .locc import (
    DiagonalPOVM,
    EmbeddingUnitary,
    ProtocolSchedule,
    ScheduleRound,
    SynthesisReport,
    apply_correction,
    compile_schedule,
    embed_povm,
    execute_filter,
    execute_round,
    js_povm,
    run_schedule,
    schedule_to_document,
    synthesize,
)
from .noise import (
    BELL,
    NoiseParams,
    PHI_MINUS,
    PHI_PLUS,
    PSI_MINUS,
    PSI_PLUS,
    coherent_state,
    depolarize,
    prepare_state,
    surrogate,
)
from .protocols import (
    CatalystSpec,
    DistillationPlan,
    ProtocolResult,
    catalyst_from_schmidt,
    dejmps_plan,
    find_catalyst,
    joint_surrogate,
    optimize_distillation,
    reuse_catalyst,
    run_cec,
    run_distillation,
    run_nec,
)
from .qmath import (
    PAULI_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    SchmidtDecomposition,
    apply_channel,
    assert_density_matrix,
    assert_pure_state,
    fidelity,
    partial_trace,
    permute_subsystems,
    schmidt_decompose,
    tensor,
    top_eigenstate,
)
from .protocols import result_to_document

__version__ = "0.1.0"

__all__ = [
    "BELL",
    "CatalystSpec",
    "DiagonalPOVM",
    "DistillationPlan",
    "EmbeddingUnitary",
    "NoiseParams",
    "PAULI_I",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "PHI_MINUS",
    "PHI_PLUS",
    "PSI_MINUS",
    "PSI_PLUS",
    "ProtocolResult",
    "ProtocolSchedule",
    "ScheduleRound",
    "SchmidtDecomposition",
    "SynthesisReport",
    "TTransform",
    "apply_channel",
    "apply_correction",
    "assert_density_matrix",
    "assert_pure_state",
    "birkhoff_decompose",
    "build_doubly_stochastic",
    "catalyst_from_schmidt",
    "coherent_state",
    "compile_schedule",
    "dejmps_plan",
    "depolarize",
    "embed_povm",
    "execute_filter",
    "execute_round",
    "fidelity",
    "find_catalyst",
    "group_ttransforms",
    "is_majorized",
    "joint_surrogate",
    "js_povm",
    "optimize_distillation",
    "partial_trace",
    "permute_subsystems",
    "prepare_state",
    "result_to_document",
    "reuse_catalyst",
    "run_cec",
    "run_distillation",
    "run_nec",
    "run_schedule",
    "schedule_to_document",
    "schmidt_decompose",
    "surrogate",
    "synthesize",
    "t_transform_decompose",
    "tensor",
    "top_eigenstate",
    "vidal_intermediate",
    "vidal_probability",
]
