"""Generalized open quantum walks on Apollonian networks.

The package models walks as transition operation matrices (grids of Kraus
maps with trace-preserving columns), builds the Apollonian networks they run
on, and measures quantum mean first passage and return times under monitored
evolution, next to exact classical oracles.
"""

__version__ = "0.1.0"

from .apollonian import ApollonianNetwork, ClassPartition, generate
from .passage import (
    PassageConfig,
    PassageResult,
    classical_art_formula,
    classical_mfpt_exact,
    classical_mfpt_matrix,
    degree_qart,
    degree_qmfpt,
    qmfpt,
    qmfpt_all_sources,
    step_distribution,
    vertex_qmfpt,
)
from .qcore import (
    KrausMap,
    MapClass,
    Measurement,
    StateClass,
    ViewOperator,
    apply_operation,
    check_state,
    classify_operation,
    maximally_mixed,
    qutrit_fourier_kets,
    subspace_operators,
    view_from_ket,
)
from .tom import (
    InvalidTomError,
    TomClass,
    TransitionOperationMatrix,
    apply_tom,
    compose_tom,
    embed_vector_state,
    lift_to_channel,
    monitored_subtom,
    validate_tom,
)
from .walks import (
    WalkSpec,
    build_case1,
    build_case2,
    build_case3,
    build_classical,
    build_simple4,
    build_walk,
)
