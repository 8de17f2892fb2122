"""Reference flows: particular solutions of the conservation equation.

A reference flow psi satisfies D^T psi + w = 0. Adding any circulation A x
preserves conservation, so the loop method only ever searches over x.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cycles import bfs_spanning_tree
from .network import FlowNetwork, incidence_matrix

CONSERVATION_ATOL = 1e-9


@dataclass(frozen=True)
class ReferenceFlow:
    psi: np.ndarray

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=float)
        psi.flags.writeable = False
        object.__setattr__(self, "psi", psi)

    @property
    def psi_max(self) -> float:
        return float(np.max(np.abs(self.psi))) if len(self.psi) else 0.0


def tree_reference_flow(net: FlowNetwork) -> ReferenceFlow:
    """Route all consumption through a spanning tree.

    Non-tree edges carry zero flow; each tree edge's flow is forced by
    conservation at the far end of its subtree, resolved leaf-to-root.
    Exact up to float rounding (one addition chain per vertex).
    """
    parent, order = bfs_spanning_tree(net)
    psi = np.zeros(net.m)
    # net inflow still unrouted at each vertex; starts at w and accumulates
    # the flows of already-resolved child edges
    surplus = net.w.astype(float).copy()
    for v in reversed(order):
        if v == 1:
            continue
        p, eid = parent[v]
        e = net.edges[eid - 1]
        # conservation at v: D_ev * psi_e + surplus_v = 0
        d_ev = 1.0 if e.head == v else -1.0
        psi[eid - 1] = -d_ev * surplus[v - 1]
        # the parent-side contribution D_ep * psi_e equals +surplus_v
        surplus[p - 1] += surplus[v - 1]
    return ReferenceFlow(psi=psi)


def conservation_residual(net: FlowNetwork, q: np.ndarray) -> float:
    """Max violation of D^T q + w = 0."""
    D = incidence_matrix(net)
    return float(np.max(np.abs(D.T @ np.asarray(q, dtype=float) + net.w)))


def check_reference_flow(net: FlowNetwork, psi: np.ndarray) -> bool:
    """True iff psi satisfies conservation within 1e-9; admits user flows."""
    return conservation_residual(net, psi) <= CONSERVATION_ATOL
