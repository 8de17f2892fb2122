"""Pipe-network analysis: loop-equation solvers, a-priori convergence
certificates, and empirical convergence diagnostics.

Networks are undirected graphs with quadratic head loss mu * q * |q| per
edge. Flows are parameterized on a cycle basis, q(x) = psi + A x, and the
loop equations F(x) = 0 are solved by full Newton or by the classical
diagonal (Hardy Cross style) iteration. Certificates bound, before
iterating, whether each method converges from a given start and inside
which ball.
"""

from .certificates import (
    HcCertificate,
    HcConstants,
    NrCertificate,
    hc_constants,
    kantorovich_certificate,
    lipschitz_L,
    rheinboldt_certificate,
)
from .cycles import (
    CycleBasis,
    EdgeCycleMatrix,
    basis_from_steps,
    basis_independence_check,
    edge_cycle_matrix,
    fundamental_basis,
    gf2_rank,
    validate_face_basis,
)
from .diagnostics import (
    OrderEstimate,
    error_sequence,
    estimate_order,
    tight_solution,
)
from .errors import (
    AnalysisError,
    Disconnected,
    DuplicateId,
    InconsistentCycle,
    InputError,
    InsufficientData,
    InvalidReferenceFlow,
    InvalidVector,
    LoopflowError,
    MalformedDocument,
    NoCycles,
    NonPositiveMu,
    NotFaceBasis,
    SelfLoop,
    Singular,
    SingularH,
    SingularJacobian,
    SingularPressureDrop,
    UnbalancedConsumption,
)
from .linalg import inf_norm, inf_norm_inverse, lu_solve
from .network import (
    Edge,
    FlowNetwork,
    NetworkDocument,
    ValidationReport,
    document_dict,
    incidence_matrix,
    load_document,
    network_from_document,
    parse_network,
    serialize_network,
    validate,
)
from .nodal import (
    NodeSystem,
    node_jacobian,
    node_residual,
    nr_node_solve,
    pressures_from_flows,
)
from .reference import (
    ReferenceFlow,
    check_reference_flow,
    conservation_residual,
    tree_reference_flow,
)
from .solver import (
    IterationTrace,
    LoopSystem,
    Termination,
    build_loop_system,
    eval_F,
    eval_H,
    eval_jacobian,
    flows,
    h_diagonal,
    hc_step,
    nr_step,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # network
    "Edge",
    "FlowNetwork",
    "NetworkDocument",
    "ValidationReport",
    "document_dict",
    "incidence_matrix",
    "load_document",
    "network_from_document",
    "parse_network",
    "serialize_network",
    "validate",
    # cycles
    "CycleBasis",
    "EdgeCycleMatrix",
    "basis_from_steps",
    "basis_independence_check",
    "edge_cycle_matrix",
    "fundamental_basis",
    "gf2_rank",
    "validate_face_basis",
    # reference flow
    "ReferenceFlow",
    "check_reference_flow",
    "conservation_residual",
    "tree_reference_flow",
    # linear algebra
    "inf_norm",
    "inf_norm_inverse",
    "lu_solve",
    # solver
    "IterationTrace",
    "LoopSystem",
    "Termination",
    "build_loop_system",
    "eval_F",
    "eval_H",
    "eval_jacobian",
    "flows",
    "h_diagonal",
    "hc_step",
    "nr_step",
    "solve",
    # certificates
    "HcCertificate",
    "HcConstants",
    "NrCertificate",
    "hc_constants",
    "kantorovich_certificate",
    "lipschitz_L",
    "rheinboldt_certificate",
    # node method
    "NodeSystem",
    "node_jacobian",
    "node_residual",
    "nr_node_solve",
    "pressures_from_flows",
    # diagnostics
    "OrderEstimate",
    "error_sequence",
    "estimate_order",
    "tight_solution",
    # errors
    "LoopflowError",
    "InputError",
    "AnalysisError",
    "MalformedDocument",
    "DuplicateId",
    "SelfLoop",
    "NonPositiveMu",
    "UnbalancedConsumption",
    "Disconnected",
    "NoCycles",
    "InconsistentCycle",
    "NotFaceBasis",
    "InvalidReferenceFlow",
    "InvalidVector",
    "Singular",
    "SingularJacobian",
    "SingularH",
    "SingularPressureDrop",
    "InsufficientData",
]
