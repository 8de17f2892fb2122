"""Loop-equation system and the two iterative solvers.

The unknown x has one entry per basis cycle; flows are q(x) = psi + A x.
The residual per cycle is f_c = sum_e A_ec mu_e q_e |q_e| (energy balance
around the cycle). Newton (nr) solves with the full Jacobian
F'(x) = 2 A^T diag(mu) U(x) A, U = diag(|q|); Hardy Cross (hc) replaces F'
by its diagonal H.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .cycles import CycleBasis, EdgeCycleMatrix, edge_cycle_matrix, fundamental_basis
from .errors import InvalidReferenceFlow, InvalidVector, Singular, SingularH, SingularJacobian
from .linalg import PIVOT_RTOL, inf_norm, lu_solve
from .network import FlowNetwork
from .reference import ReferenceFlow, check_reference_flow, tree_reference_flow

DIVERGENCE_LIMIT = 1e12
DEFAULT_TOL_RESIDUAL = 1e-10
DEFAULT_TOL_STEP = 1e-12
DEFAULT_MAX_ITERS = {"nr": 100, "hc": 10000}


class Termination(str, Enum):
    RESIDUAL_TOL = "ResidualTol"
    STEP_TOL = "StepTol"
    MAX_ITERS = "MaxIters"
    SINGULAR_JACOBIAN = "SingularJacobian"
    SINGULAR_H = "SingularH"
    DIVERGED = "Diverged"
    OSCILLATING = "Oscillating"
    SINGULAR_PRESSURE_DROP = "SingularPressureDrop"


@dataclass(frozen=True)
class LoopSystem:
    """Immutable bundle of the edge-cycle matrix, reference flow, and mu."""

    ecm: EdgeCycleMatrix
    psi: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=float)
        mu = np.asarray(self.mu, dtype=float)
        if psi.shape != (self.ecm.m,) or mu.shape != (self.ecm.m,):
            raise InvalidVector(
                f"psi and mu must have length m={self.ecm.m}, got {psi.shape} and {mu.shape}"
            )
        if not np.all(mu > 0):
            raise InvalidVector("all mu entries must be positive")
        psi.flags.writeable = False
        mu.flags.writeable = False
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "mu", mu)

    @property
    def A(self) -> np.ndarray:
        return self.ecm.A

    @property
    def k(self) -> int:
        return self.ecm.k

    @property
    def m(self) -> int:
        return self.ecm.m

    @property
    def n(self) -> int:
        # vertex count of the underlying connected network: k = m - n + 1
        return self.m - self.k + 1

    @property
    def ell(self) -> int:
        return self.ecm.ell

    @property
    def mu_max(self) -> float:
        return float(np.max(self.mu))

    @property
    def psi_max(self) -> float:
        return float(np.max(np.abs(self.psi))) if self.m else 0.0


@dataclass
class IterationTrace:
    iterates: list[np.ndarray]
    residual_norms: list[float]
    step_norms: list[float]
    termination: Termination
    flows: list[np.ndarray] | None = None
    detail: str = ""

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]

    @property
    def iterations(self) -> int:
        return len(self.iterates) - 1

    def as_dict(self) -> dict:
        out = {
            "iterates": [list(map(float, x)) for x in self.iterates],
            "residual_norms": [float(r) for r in self.residual_norms],
            "step_norms": [float(s) for s in self.step_norms],
            "termination": self.termination.value,
            "iterations": self.iterations,
        }
        if self.flows is not None:
            out["flows"] = [list(map(float, q)) for q in self.flows]
        if self.detail:
            out["detail"] = self.detail
        return out


def build_loop_system(
    net: FlowNetwork,
    basis: CycleBasis | None = None,
    psi: np.ndarray | ReferenceFlow | None = None,
) -> LoopSystem:
    """Assemble a LoopSystem, defaulting to the fundamental basis and the
    tree reference flow; user-supplied psi must satisfy conservation."""
    if basis is None:
        basis = fundamental_basis(net)
    ecm = edge_cycle_matrix(net, basis)
    if psi is None:
        psi_vec = tree_reference_flow(net).psi
    else:
        psi_vec = psi.psi if isinstance(psi, ReferenceFlow) else np.asarray(psi, dtype=float)
        if psi_vec.shape != (net.m,):
            raise InvalidVector(f"reference flow must have length {net.m}")
        if not check_reference_flow(net, psi_vec):
            raise InvalidReferenceFlow("supplied reference flow violates conservation")
    return LoopSystem(ecm=ecm, psi=psi_vec, mu=net.mu)


def flows(sys: LoopSystem, x: np.ndarray) -> np.ndarray:
    """q(x) = psi + A x."""
    return sys.psi + sys.A @ np.asarray(x, dtype=float)


def eval_F(sys: LoopSystem, x: np.ndarray) -> np.ndarray:
    q = flows(sys, x)
    return sys.A.T @ (sys.mu * np.abs(q) * q)


def eval_jacobian(sys: LoopSystem, x: np.ndarray) -> np.ndarray:
    """F'(x) = 2 A^T diag(mu |q|) A; symmetric by construction."""
    q = flows(sys, x)
    return 2.0 * (sys.A.T * (sys.mu * np.abs(q))) @ sys.A


def h_diagonal(sys: LoopSystem, x: np.ndarray) -> np.ndarray:
    """Diagonal entries of F'(x): 2 sum_e A_ec^2 mu_e |q_e|."""
    q = flows(sys, x)
    return 2.0 * (sys.A**2).T @ (sys.mu * np.abs(q))


def eval_H(sys: LoopSystem, x: np.ndarray) -> np.ndarray:
    """H(x) as a dense diagonal matrix."""
    return np.diag(h_diagonal(sys, x))


def nr_step(sys: LoopSystem, x: np.ndarray) -> np.ndarray:
    """One Newton step x - F'(x)^-1 F(x)."""
    x = np.asarray(x, dtype=float)
    try:
        return x - lu_solve(eval_jacobian(sys, x), eval_F(sys, x))
    except Singular as exc:
        raise SingularJacobian(f"Jacobian singular at x={x.tolist()}") from exc


def _check_h_entry(h: np.ndarray, c: int):
    hmax = float(np.max(h))
    if hmax == 0.0 or h[c] <= PIVOT_RTOL * hmax:
        raise SingularH(f"H diagonal entry for cycle {c + 1} is {h[c]:.3e} (all incident flows near zero)")


def hc_step(sys: LoopSystem, x: np.ndarray, mode: str = "simultaneous") -> np.ndarray:
    """One Hardy Cross pass.

    simultaneous: every cycle corrected with H evaluated at the incoming x.
    sweep: cycles corrected in order 1..k, each seeing the flows already
    updated by the cycles before it in the same pass.
    """
    x = np.asarray(x, dtype=float).copy()
    if mode == "simultaneous":
        h = h_diagonal(sys, x)
        for c in range(sys.k):
            _check_h_entry(h, c)
        return x - eval_F(sys, x) / h
    if mode == "sweep":
        q = flows(sys, x)
        for c in range(sys.k):
            col = sys.A[:, c]
            h = 2.0 * (sys.A**2).T @ (sys.mu * np.abs(q))
            _check_h_entry(h, c)
            f_c = col @ (sys.mu * np.abs(q) * q)
            dx = -f_c / h[c]
            x[c] += dx
            q = q + col * dx
        return x
    raise ValueError(f"unknown hc mode {mode!r}")


def solve(
    sys: LoopSystem,
    x0: np.ndarray,
    method: str = "nr",
    tol_residual: float = DEFAULT_TOL_RESIDUAL,
    tol_step: float = DEFAULT_TOL_STEP,
    max_iters: int | None = None,
    hc_mode: str = "simultaneous",
    record_flows: bool = False,
) -> IterationTrace:
    """Iterate the chosen method from x0 until a stopping rule fires.

    Stopping order per iterate: residual tolerance, divergence guard, step
    tolerance, iteration cap. Singular Jacobian or H is recorded as the
    termination reason and the trace up to the failure point is returned.
    """
    if method not in ("nr", "hc"):
        raise ValueError(f"unknown method {method!r}")
    if max_iters is None:
        max_iters = DEFAULT_MAX_ITERS[method]
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (sys.k,):
        raise InvalidVector(f"x0 must have length k={sys.k}, got shape {x.shape}")

    iterates = [x.copy()]
    residual_norms = [inf_norm(eval_F(sys, x))]
    step_norms: list[float] = []
    flow_log = [flows(sys, x)] if record_flows else None
    detail = ""

    def trace(reason: Termination) -> IterationTrace:
        return IterationTrace(
            iterates=iterates,
            residual_norms=residual_norms,
            step_norms=step_norms,
            termination=reason,
            flows=flow_log,
            detail=detail,
        )

    while True:
        res = residual_norms[-1]
        if np.isfinite(res) and res <= tol_residual:
            return trace(Termination.RESIDUAL_TOL)
        if not np.isfinite(res) or res > DIVERGENCE_LIMIT:
            return trace(Termination.DIVERGED)
        if step_norms and step_norms[-1] <= tol_step:
            return trace(Termination.STEP_TOL)
        if len(step_norms) >= max_iters:
            return trace(Termination.MAX_ITERS)
        try:
            if method == "nr":
                x_new = nr_step(sys, x)
            else:
                x_new = hc_step(sys, x, mode=hc_mode)
        except SingularJacobian as exc:
            detail = str(exc)
            return trace(Termination.SINGULAR_JACOBIAN)
        except SingularH as exc:
            detail = str(exc)
            return trace(Termination.SINGULAR_H)
        step_norms.append(inf_norm(x_new - x))
        x = x_new
        iterates.append(x.copy())
        residual_norms.append(inf_norm(eval_F(sys, x)))
        if record_flows:
            flow_log.append(flows(sys, x))
