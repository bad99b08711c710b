"""Multipartite Cabello-type paradox: states, scores, LP certificates and self-testing."""
from gmn.correlations import CorrelationTensor, born_probabilities, check_no_signaling, correlation_tensor, marginal
from gmn.entanglement import Bipartition, MonotoneRow, monotone_table
from gmn.optimize import maximize_constrained, maximize_general_qubit, noise_sweep, trace_distance
from gmn.paradox import (
    LPCertificate,
    ParadoxReport,
    constraint_residuals,
    local_max_lp,
    membership_hybrid,
    membership_local,
    score,
)
from gmn.qstate import (
    A_STAR_3,
    S_STAR_3,
    ConstrainedFamilyParams,
    MeasurementBasis,
    StateVector,
    build_constrained_state,
    build_measurement_basis,
    build_named_state,
)
from gmn.selftest import BlockState, certify, embed_blocks, swap_isometry

__version__ = "0.1.0"

__all__ = [
    "A_STAR_3", "S_STAR_3", "BlockState", "Bipartition", "ConstrainedFamilyParams", "CorrelationTensor",
    "LPCertificate", "MeasurementBasis", "MonotoneRow", "ParadoxReport", "StateVector",
    "born_probabilities", "build_constrained_state", "build_measurement_basis", "build_named_state",
    "certify", "check_no_signaling", "constraint_residuals", "correlation_tensor", "embed_blocks",
    "local_max_lp", "marginal", "maximize_constrained", "maximize_general_qubit", "membership_hybrid",
    "membership_local", "monotone_table", "noise_sweep", "score", "swap_isometry", "trace_distance",
]
