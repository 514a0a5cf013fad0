"""Parameterized k-nonseparability measures for n-qudit states."""

from .bounds import (
    BoundReport,
    RegimeError,
    alphan_bound,
    entanglement_verdict,
    global_negativity,
    q_bipartite_bound,
    qn_bound_improved,
    qn_bound_qubit,
    qn_bound_qudit,
    wei_bipartite_bound,
)
from .compare import concurrence_fill, example4_table, gqc
from .detection import criterion_terms, ghz_criterion, k_eff, w_criterion
from .estimators import KMEConcurrence, NegativityBounds, SeparabilityDetector
from .measures import (
    MeasureSpec,
    RoofEstimate,
    alpha_concurrence,
    alpha_gme_pure,
    alpha_k_me_pure,
    k_me_pure,
    pi_lower_bound,
    q_concurrence,
    q_gme_pure,
    q_k_me_pure,
    roof_estimate,
    trace_power,
)
from .partitions import Partition, bipartitions, k_partitions, stirling2
from .qstate import (
    DensityMatrix,
    LocalUnitarySet,
    PureState,
    apply_local_unitaries,
    partial_trace,
    partial_transpose,
    permute_sites,
    pi_part,
    realign,
    state_factory,
    to_density,
)

__version__ = "0.1.0"
