"""Finite-dimensional quantum states, channels, and distance measures.

Everything here works with explicit numpy matrices over named subsystem
layouts; see :mod:`cdslab.qcore.states` for the indexing convention.
"""

from .channels import (
    Isometry,
    QuantumChannel,
    apply_channel,
    apply_channel_matrix,
    apply_isometry,
    canonical_kraus,
    channel_from_choi,
    choi_state,
    complementary_channel,
    compose_channels,
    constant_channel,
    dephasing_channel,
    depolarizing_channel,
    diamond_distance_bounds,
    identity_channel,
    purify_channel,
    tensor_channels,
    unitary_channel,
)
from .distances import (
    ensemble_sqrt_fidelity_check,
    fidelity,
    fuchs_van_de_graaf_gaps,
    psd_sqrt,
    sqrt_fidelity,
    trace_distance,
    trace_norm,
)
from .matio import dump_matrix, load_matrix, read_matrix, write_matrix
from .optimize import DecoderResult, find_best_decoder, petz_recovery
from .states import (
    ATOL_INVARIANT,
    DensityMatrix,
    Layout,
    StateVector,
    as_layout,
    basis_state,
    fresh_name,
    layout_dim,
    layout_dims,
    layout_names,
    layout_positions,
    maximally_entangled,
    maximally_mixed,
    partial_trace,
    partial_trace_matrix,
    permute_matrix,
    tensor,
)

__all__ = [
    "ATOL_INVARIANT",
    "DecoderResult",
    "DensityMatrix",
    "Isometry",
    "Layout",
    "QuantumChannel",
    "StateVector",
    "apply_channel",
    "apply_channel_matrix",
    "apply_isometry",
    "as_layout",
    "basis_state",
    "canonical_kraus",
    "channel_from_choi",
    "choi_state",
    "complementary_channel",
    "compose_channels",
    "constant_channel",
    "dephasing_channel",
    "depolarizing_channel",
    "diamond_distance_bounds",
    "dump_matrix",
    "ensemble_sqrt_fidelity_check",
    "fidelity",
    "find_best_decoder",
    "fresh_name",
    "fuchs_van_de_graaf_gaps",
    "identity_channel",
    "layout_dim",
    "layout_dims",
    "layout_names",
    "layout_positions",
    "load_matrix",
    "maximally_entangled",
    "maximally_mixed",
    "partial_trace",
    "partial_trace_matrix",
    "permute_matrix",
    "petz_recovery",
    "psd_sqrt",
    "purify_channel",
    "read_matrix",
    "sqrt_fidelity",
    "tensor",
    "tensor_channels",
    "trace_distance",
    "trace_norm",
    "unitary_channel",
    "write_matrix",
]
