"""Node-formulation Newton iteration on junction pressures.

Unknowns are the pressures of all vertices except a reference vertex whose
pressure stays fixed. Each edge carries q_e = sign(d) sqrt(|d|/mu_e) where
d = p_tail - p_head, and the residual at a free vertex is the violated
conservation w_v + sum_e D_ev q_e. The square-root head-loss inverse makes
this iteration oscillate instead of converge on simple networks, which is
exactly what the demo exposes; a period-2 detector stops the loop once the
pattern has persisted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cycles import bfs_spanning_tree
from .errors import InvalidVector, Singular, SingularJacobian, SingularPressureDrop
from .linalg import inf_norm, lu_solve
from .network import FlowNetwork
from .solver import IterationTrace, Termination

PRESSURE_DROP_GUARD = 1e-12
OSCILLATION_TOL = 1e-10
OSCILLATION_STEP_FLOOR = 1e-8
OSCILLATION_PATIENCE = 10


@dataclass(frozen=True)
class NodeSystem:
    """Network plus choice of reference vertex (defaults to vertex n)."""

    net: FlowNetwork
    reference: int | None = None

    def __post_init__(self):
        ref = self.net.n if self.reference is None else self.reference
        if not 1 <= ref <= self.net.n:
            raise InvalidVector(f"reference vertex {ref} out of range 1..{self.net.n}")
        object.__setattr__(self, "reference", ref)

    @property
    def free(self) -> list[int]:
        return [v for v in range(1, self.net.n + 1) if v != self.reference]


def _drops(sys: NodeSystem, p: np.ndarray) -> np.ndarray:
    """Oriented pressure differences d_e = p_tail - p_head, guarded."""
    d = np.array([p[e.tail - 1] - p[e.head - 1] for e in sys.net.edges])
    small = np.abs(d) <= PRESSURE_DROP_GUARD
    if np.any(small):
        eid = int(np.argmax(small)) + 1
        raise SingularPressureDrop(f"pressure drop on edge {eid} is {d[eid - 1]:.3e} (square root singular)")
    return d


def _edge_flows(sys: NodeSystem, p: np.ndarray) -> np.ndarray:
    d = _drops(sys, p)
    return np.sign(d) * np.sqrt(np.abs(d) / sys.net.mu)


def node_residual(sys: NodeSystem, p: np.ndarray) -> np.ndarray:
    """Conservation residual at each free vertex for full pressure vector p."""
    p = np.asarray(p, dtype=float)
    if p.shape != (sys.net.n,):
        raise InvalidVector(f"p must have length n={sys.net.n}")
    q = _edge_flows(sys, p)
    f = sys.net.w.astype(float).copy()
    for e, q_e in zip(sys.net.edges, q):
        f[e.tail - 1] -= q_e
        f[e.head - 1] += q_e
    return f[[v - 1 for v in sys.free]]


def node_jacobian(sys: NodeSystem, p: np.ndarray) -> np.ndarray:
    """Analytic Jacobian of node_residual over the free pressures."""
    p = np.asarray(p, dtype=float)
    d = _drops(sys, p)
    # d(q_e)/d(d_e) = 1/(2 sqrt(|d_e| mu_e)); d(d_e)/dp_z = -D_ez
    g = 1.0 / (2.0 * np.sqrt(np.abs(d) * sys.net.mu))
    free = sys.free
    idx = {v: i for i, v in enumerate(free)}
    J = np.zeros((len(free), len(free)))
    for e, g_e in zip(sys.net.edges, g):
        for v, dv in ((e.tail, -1.0), (e.head, 1.0)):
            if v not in idx:
                continue
            for z, dz in ((e.tail, -1.0), (e.head, 1.0)):
                if z in idx:
                    J[idx[v], idx[z]] -= dv * dz * g_e
    return J


def nr_node_solve(
    sys: NodeSystem,
    p0: np.ndarray,
    tol_residual: float = 1e-10,
    tol_step: float = 1e-12,
    max_iters: int = 100,
) -> IterationTrace:
    """Newton iteration on the free pressures from the full vector p0.

    The reference entry of p0 is held fixed. Terminates on the usual
    tolerances, or with Oscillating once ||p(t) - p(t-2)|| stays below
    1e-10 while the step itself stays large for 10 consecutive iterations.
    A pressure drop below the square-root guard at p0 raises; the same
    condition at a later iterate ends the trace with that reason.
    """
    p = np.asarray(p0, dtype=float).copy()
    if p.shape != (sys.net.n,):
        raise InvalidVector(f"p0 must have length n={sys.net.n}")
    free_idx = [v - 1 for v in sys.free]

    iterates = [p.copy()]
    residual_norms = [inf_norm(node_residual(sys, p))]  # raises on bad p0
    step_norms: list[float] = []
    detail = ""
    oscillating = 0

    def trace(reason: Termination) -> IterationTrace:
        return IterationTrace(
            iterates=iterates,
            residual_norms=residual_norms,
            step_norms=step_norms,
            termination=reason,
            detail=detail,
        )

    while True:
        res = residual_norms[-1]
        if np.isfinite(res) and res <= tol_residual:
            return trace(Termination.RESIDUAL_TOL)
        if not np.isfinite(res):
            return trace(Termination.DIVERGED)
        if step_norms and step_norms[-1] <= tol_step:
            return trace(Termination.STEP_TOL)
        if len(iterates) >= 3 and step_norms[-1] >= OSCILLATION_STEP_FLOOR:
            if inf_norm(iterates[-1] - iterates[-3]) <= OSCILLATION_TOL:
                oscillating += 1
                if oscillating >= OSCILLATION_PATIENCE:
                    return trace(Termination.OSCILLATING)
            else:
                oscillating = 0
        if len(step_norms) >= max_iters:
            return trace(Termination.MAX_ITERS)
        try:
            f = node_residual(sys, p)
            J = node_jacobian(sys, p)
            delta = lu_solve(J, f)
        except SingularPressureDrop as exc:
            detail = str(exc)
            return trace(Termination.SINGULAR_PRESSURE_DROP)
        except Singular as exc:
            detail = str(exc)
            return trace(Termination.SINGULAR_JACOBIAN)
        p_new = p.copy()
        p_new[free_idx] = p[free_idx] - delta
        step_norms.append(inf_norm(p_new - p))
        p = p_new
        iterates.append(p.copy())
        try:
            residual_norms.append(inf_norm(node_residual(sys, p)))
        except SingularPressureDrop as exc:
            detail = str(exc)
            residual_norms.append(float("nan"))
            return trace(Termination.SINGULAR_PRESSURE_DROP)


def pressures_from_flows(net: FlowNetwork, q: np.ndarray, reference: int | None = None) -> np.ndarray:
    """Integrate head losses dp = mu q|q| along a spanning tree.

    Returns the full pressure vector with the reference vertex (default n)
    at pressure 0. Exact for flows that satisfy the loop equations; used as
    the cross-method consistency oracle against node_residual.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (net.m,):
        raise InvalidVector(f"q must have length m={net.m}")
    ref = net.n if reference is None else reference
    parent, order = bfs_spanning_tree(net, root=ref)
    p = np.zeros(net.n)
    for v in order:
        if v == ref:
            continue
        u, eid = parent[v]
        e = net.edges[eid - 1]
        drop = e.mu * q[eid - 1] * abs(q[eid - 1])  # p_tail - p_head
        if v == e.head:
            p[v - 1] = p[u - 1] - drop
        else:
            p[v - 1] = p[u - 1] + drop
    return p
