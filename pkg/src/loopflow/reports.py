"""Report builders shared by the CLI and the HTTP service.

Each builder takes a parsed NetworkDocument plus options and returns a
plain JSON-serializable dict. Input problems raise InputError subclasses;
analysis problems either raise AnalysisError subclasses or are reported
inside the dict (solver terminations, unsatisfied certificates).
"""

from __future__ import annotations

import numpy as np

from .certificates import kantorovich_certificate, rheinboldt_certificate
from .cycles import (
    CycleBasis,
    basis_from_steps,
    edge_cycle_matrix,
    fundamental_basis,
    validate_face_basis,
)
from .diagnostics import error_sequence, estimate_order, tight_solution
from .errors import InsufficientData, InvalidVector
from .network import NetworkDocument, validate
from .nodal import NodeSystem, nr_node_solve
from .reference import conservation_residual
from .solver import (
    DEFAULT_TOL_RESIDUAL,
    DEFAULT_TOL_STEP,
    LoopSystem,
    Termination,
    build_loop_system,
    flows,
    solve,
)

__all__ = [
    "document_basis",
    "document_system",
    "jsonsafe",
    "resolve_x0",
    "run_validate",
    "run_basis",
    "run_solve",
    "run_certify",
    "run_rate",
    "run_node_demo",
    "SUCCESS_TERMINATIONS",
]


def jsonsafe(value):
    """Recursively replace non-finite floats, which strict JSON lacks."""
    if isinstance(value, dict):
        return {k: jsonsafe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonsafe(v) for v in value]
    if isinstance(value, float) and not np.isfinite(value):
        return repr(value)  # 'nan', 'inf', '-inf'
    return value

# terminations that count as a successful run for exit-code purposes
SUCCESS_TERMINATIONS = frozenset({Termination.RESIDUAL_TOL, Termination.STEP_TOL})


def document_basis(doc: NetworkDocument) -> tuple[CycleBasis, str]:
    """The document's own cycle basis when present, else the fundamental one."""
    if doc.cycle_basis is not None:
        return basis_from_steps(doc.network, doc.cycle_basis), "document"
    return fundamental_basis(doc.network), "fundamental"


def document_system(doc: NetworkDocument) -> LoopSystem:
    basis, _ = document_basis(doc)
    return build_loop_system(doc.network, basis=basis, psi=doc.reference_flow)


def resolve_x0(doc: NetworkDocument, override: np.ndarray | None, k: int) -> np.ndarray:
    """Start vector precedence: explicit override, document x0, zeros."""
    x0 = override if override is not None else doc.x0
    if x0 is None:
        return np.zeros(k)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (k,):
        raise InvalidVector(f"x0 must have length k={k}, got {x0.shape[0] if x0.ndim == 1 else x0.shape}")
    if not np.all(np.isfinite(x0)):
        raise InvalidVector("x0 entries must be finite")
    return x0


def run_validate(doc: NetworkDocument) -> dict:
    net = doc.network
    report = validate(net)
    return {"command": "validate", "n": net.n, "m": net.m, **report.as_dict()}


def run_basis(doc: NetworkDocument) -> dict:
    basis, source = document_basis(doc)
    ecm = edge_cycle_matrix(doc.network, basis)
    return {
        "command": "basis",
        "source": source,
        "k": basis.k,
        "ell": ecm.ell,
        "cycles": [[{"edge": eid, "dir": d} for eid, d in cycle] for cycle in basis.cycles],
        "edge_cycle_matrix": [[int(v) for v in row] for row in ecm.A],
        "face_basis": validate_face_basis(ecm),
    }


def run_solve(
    doc: NetworkDocument,
    method: str = "nr",
    hc_mode: str = "simultaneous",
    tol_residual: float = DEFAULT_TOL_RESIDUAL,
    tol_step: float = DEFAULT_TOL_STEP,
    max_iters: int | None = None,
    x0: np.ndarray | None = None,
) -> dict:
    sys = document_system(doc)
    start = resolve_x0(doc, x0, sys.k)
    trace = solve(
        sys,
        start,
        method=method,
        tol_residual=tol_residual,
        tol_step=tol_step,
        max_iters=max_iters,
        hc_mode=hc_mode,
    )
    q = flows(sys, trace.final)
    report = {
        "command": "solve",
        "method": method,
        "x0": [float(v) for v in start],
        **trace.as_dict(),
        "converged": trace.termination in SUCCESS_TERMINATIONS,
        "final_x": [float(v) for v in trace.final],
        "final_flows": [float(v) for v in q],
        "conservation_residual": conservation_residual(doc.network, q),
    }
    if method == "hc":
        report["hc_mode"] = hc_mode
    return report


def run_certify(
    doc: NetworkDocument,
    method: str = "nr",
    basis_mode: str = "general",
    x0: np.ndarray | None = None,
) -> dict:
    sys = document_system(doc)
    start = resolve_x0(doc, x0, sys.k)
    if method == "nr":
        cert = kantorovich_certificate(sys, start, basis_mode)
    elif method == "hc":
        cert = rheinboldt_certificate(sys, start, basis_mode)
    else:
        raise ValueError(f"unknown method {method!r}")
    return {"command": "certify", "x0": [float(v) for v in start], **cert.as_dict()}


def run_rate(
    doc: NetworkDocument,
    tol_residual: float = DEFAULT_TOL_RESIDUAL,
    tol_step: float = DEFAULT_TOL_STEP,
    max_iters: int | None = None,
    hc_mode: str = "simultaneous",
    x0: np.ndarray | None = None,
) -> dict:
    """Empirical order and rate for both methods from the same start."""
    sys = document_system(doc)
    start = resolve_x0(doc, x0, sys.k)
    x_star = tight_solution(sys, start)
    methods: dict[str, dict] = {}
    for method in ("nr", "hc"):
        trace = solve(
            sys,
            start,
            method=method,
            tol_residual=tol_residual,
            tol_step=tol_step,
            max_iters=max_iters,
            hc_mode=hc_mode,
        )
        entry: dict = {
            "termination": trace.termination.value,
            "iterations": trace.iterations,
        }
        try:
            estimate = estimate_order(error_sequence(trace, x_star))
            entry.update(estimate.as_dict())
        except InsufficientData as exc:
            entry["error"] = exc.code
            entry["message"] = str(exc)
        methods[method] = entry
    return {
        "command": "rate",
        "x0": [float(v) for v in start],
        "solution": [float(v) for v in x_star],
        "methods": methods,
    }


def run_node_demo(
    doc: NetworkDocument,
    p0: np.ndarray | None = None,
    tol_residual: float = DEFAULT_TOL_RESIDUAL,
    tol_step: float = DEFAULT_TOL_STEP,
    max_iters: int = 100,
) -> dict:
    """Newton-on-pressures run that exhibits the oscillation failure mode."""
    net = doc.network
    sys = NodeSystem(net)
    if p0 is None:
        p0 = np.zeros(net.n)
        p0[0] = 5.0
    else:
        p0 = np.asarray(p0, dtype=float)
        if p0.shape != (net.n,):
            raise InvalidVector(f"p0 must have length n={net.n}")
        if not np.all(np.isfinite(p0)):
            raise InvalidVector("p0 entries must be finite")
    trace = nr_node_solve(
        sys, p0, tol_residual=tol_residual, tol_step=tol_step, max_iters=max_iters
    )
    return {
        "command": "node-demo",
        "reference_vertex": sys.reference,
        "p0": [float(v) for v in p0],
        **trace.as_dict(),
        "oscillating": trace.termination is Termination.OSCILLATING,
    }
