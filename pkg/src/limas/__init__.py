"""Consensusability analysis, gain synthesis, and simulation for linear
interconnected multi-agent systems (LIMASs).

Agents share identical discrete-time dynamics and are coupled twice: physically
through a Laplacian acting on the state, and through a communication graph
carrying a common static feedback gain. The package decides whether one gain
can drive all agents to consensus, computes such a gain, and validates it by
spectral checks and time-domain simulation of two electrical benchmarks.
"""

from .cases import CaseStudy, dcmg_case, dcmg_x0, supercap_case, supercap_x0
from .consensus import (
    ASSUMPTION_VIOLATION,
    CONSENSUSABLE_SUFFICIENT,
    NECESSARY_VIOLATED,
    NOT_CONCLUDED,
    LimasModel,
    ModalPairs,
    TestReport,
    analytic_sufficient_test,
    check_assumptions,
    design_gain,
    lp_sufficient_test,
    modal_pairs,
    necessary_test,
    scalar_model_test,
    scalar_test,
)
from .control import (
    SystemPair,
    ackermann_basis,
    ackermann_gain,
    controllability_matrix,
    is_schur,
    sigma_c,
    solve_mare,
)
from .errors import LimasError
from .graph import (
    LaplacianSpectrum,
    ModalDecomposition,
    WeightedGraph,
    circle_graph,
    commute_check,
    complete_graph,
    is_connected,
    laplacian,
    modal_decomposition,
    path_graph,
    spectrum,
    star_graph,
)
from .sim import (
    AffineField,
    DcmgParams,
    SimulationTrace,
    SupercapParams,
    build_dcmg,
    build_supercap,
    closed_loop_matrix,
    dcmg_field,
    simulate_continuous,
    simulate_discrete,
    supercap_field,
    write_trace_csv,
)
from .simstab import simultaneous_gain, verify_gain

__version__ = "0.1.0"
