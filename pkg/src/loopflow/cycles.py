"""Cycle bases of the flow graph and the edge-cycle matrix A.

A basis is k = m - n + 1 oriented simple cycles, each stored as a chained
sequence of (edge id, direction) steps; direction +1 traverses the edge
tail -> head. Column c of A records how each edge runs relative to cycle c's
own orientation, so D^T A = 0 for every valid basis.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import Disconnected, InconsistentCycle, NoCycles
from .network import FlowNetwork

Cycle = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class CycleBasis:
    cycles: tuple[Cycle, ...]

    @property
    def k(self) -> int:
        return len(self.cycles)

    @property
    def total_length(self) -> int:
        return sum(len(c) for c in self.cycles)


@dataclass(frozen=True)
class EdgeCycleMatrix:
    """The m x k matrix A with entries in {-1, 0, +1} and total length ell."""

    A: np.ndarray
    ell: int

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        A.flags.writeable = False
        object.__setattr__(self, "A", A)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def k(self) -> int:
        return self.A.shape[1]


def bfs_spanning_tree(
    net: FlowNetwork, root: int = 1, rng: random.Random | None = None
) -> tuple[dict[int, tuple[int, int]], list[int]]:
    """Breadth-first spanning tree.

    Returns (parent, order): parent maps each non-root vertex to
    (parent vertex, tree edge id); order lists vertices in visit order.
    Neighbors are explored in increasing edge-id order unless rng is given,
    in which case the exploration order is shuffled (used to generate an
    independent second basis).
    """
    adj = net.adjacency()
    if rng is not None:
        for lst in adj:
            rng.shuffle(lst)
    parent: dict[int, tuple[int, int]] = {}
    order = [root]
    seen = {root}
    frontier = [root]
    while frontier:
        nxt = []
        for v in frontier:
            for u, eid in adj[v]:
                if u not in seen:
                    seen.add(u)
                    parent[u] = (v, eid)
                    order.append(u)
                    nxt.append(u)
        frontier = nxt
    if len(seen) != net.n:
        raise Disconnected(f"only {len(seen)} of {net.n} vertices reachable from vertex {root}")
    return parent, order


def _tree_path(net: FlowNetwork, parent: dict[int, tuple[int, int]], a: int, b: int) -> list[tuple[int, int]]:
    """Steps of the unique tree path a -> b as (edge id, direction) pairs."""
    depth: dict[int, int] = {}

    def depth_of(v: int) -> int:
        if v not in depth:
            depth[v] = 0 if v not in parent else depth_of(parent[v][0]) + 1
        return depth[v]

    up_a: list[tuple[int, int]] = []
    up_b: list[tuple[int, int]] = []
    va, vb = a, b
    while depth_of(va) > depth_of(vb):
        p, eid = parent[va]
        up_a.append(_step(net, eid, va, p))
        va = p
    while depth_of(vb) > depth_of(va):
        p, eid = parent[vb]
        up_b.append(_step(net, eid, vb, p))
        vb = p
    while va != vb:
        p, eid = parent[va]
        up_a.append(_step(net, eid, va, p))
        va = p
        p, eid = parent[vb]
        up_b.append(_step(net, eid, vb, p))
        vb = p
    return up_a + [(eid, -d) for eid, d in reversed(up_b)]


def _step(net: FlowNetwork, eid: int, frm: int, to: int) -> tuple[int, int]:
    e = net.edges[eid - 1]
    return (eid, 1 if (frm, to) == (e.tail, e.head) else -1)


def fundamental_basis(net: FlowNetwork, rng: random.Random | None = None) -> CycleBasis:
    """Fundamental cycles of a breadth-first spanning tree rooted at vertex 1.

    Each non-tree edge e contributes the cycle made of e plus the tree path
    between its endpoints, oriented along e; cycles are ordered by non-tree
    edge id. Pass rng to randomize the tree (random root, shuffled
    exploration) while keeping the same cycle structure guarantees.
    """
    root = 1 if rng is None else rng.randrange(1, net.n + 1)
    parent, _ = bfs_spanning_tree(net, root=root, rng=rng)
    tree_ids = {eid for _, eid in parent.values()}
    nontree = [e for e in net.edges if e.id not in tree_ids]
    if not nontree:
        raise NoCycles(f"network has no cycles (m={net.m}, n={net.n})")
    cycles = []
    for e in nontree:
        steps = [(e.id, 1)] + _tree_path(net, parent, e.head, e.tail)
        cycles.append(tuple(steps))
    return CycleBasis(cycles=tuple(cycles))


def _endpoints(net: FlowNetwork, step: tuple[int, int]) -> tuple[int, int]:
    eid, d = step
    e = net.edges[eid - 1]
    return (e.tail, e.head) if d == 1 else (e.head, e.tail)


def _check_cycle(net: FlowNetwork, cycle: Cycle, index: int):
    """Closed, simple, no repeated edge; raises InconsistentCycle."""
    if len(cycle) < 2:
        raise InconsistentCycle(f"cycle {index} has fewer than 2 steps")
    edge_ids = [eid for eid, _ in cycle]
    if len(set(edge_ids)) != len(edge_ids):
        raise InconsistentCycle(f"cycle {index} repeats an edge")
    visited = []
    cur = None
    for step in cycle:
        frm, to = _endpoints(net, step)
        if cur is not None and frm != cur:
            raise InconsistentCycle(
                f"cycle {index} does not chain at edge {step[0]} (expected vertex {cur}, got {frm})"
            )
        visited.append(frm)
        cur = to
    if cur != visited[0]:
        raise InconsistentCycle(f"cycle {index} does not close (ends at vertex {cur})")
    if len(set(visited)) != len(visited):
        raise InconsistentCycle(f"cycle {index} revisits a vertex")


def gf2_rank(A: np.ndarray) -> int:
    """Rank of A over the two-element field."""
    M = (np.abs(np.asarray(A)) % 2).astype(np.int8).copy()
    rank = 0
    rows, cols = M.shape
    for c in range(cols):
        pivot = None
        for r in range(rank, rows):
            if M[r, c]:
                pivot = r
                break
        if pivot is None:
            continue
        M[[rank, pivot]] = M[[pivot, rank]]
        for r in range(rows):
            if r != rank and M[r, c]:
                M[r] ^= M[rank]
        rank += 1
    return rank


def edge_cycle_matrix(net: FlowNetwork, basis: CycleBasis) -> EdgeCycleMatrix:
    """Build A from the basis; every cycle is checked to chain and close."""
    A = np.zeros((net.m, basis.k))
    for c, cycle in enumerate(basis.cycles):
        _check_cycle(net, cycle, c + 1)
        for eid, d in cycle:
            A[eid - 1, c] = float(d)
    return EdgeCycleMatrix(A=A, ell=int(np.count_nonzero(A)))


def basis_from_steps(net: FlowNetwork, cycles: Sequence[Cycle]) -> CycleBasis:
    """Validate user-supplied cycles as a full basis of the cycle space."""
    basis = CycleBasis(cycles=tuple(tuple(c) for c in cycles))
    ecm = edge_cycle_matrix(net, basis)  # checks closure and simplicity
    k_expected = net.m - net.n + 1
    if basis.k != k_expected:
        raise InconsistentCycle(f"expected {k_expected} cycles, got {basis.k}")
    if gf2_rank(ecm.A) != basis.k:
        raise InconsistentCycle("cycles are linearly dependent over GF(2)")
    return basis


def validate_face_basis(ecm: EdgeCycleMatrix) -> bool:
    """True iff every edge lies on at most two cycles.

    This is the structural property behind the sharper planar certificate
    constants; no planarity test is run.
    """
    return bool(np.all(np.count_nonzero(ecm.A, axis=1) <= 2))


def basis_independence_check(
    net: FlowNetwork,
    basis_a: CycleBasis,
    basis_b: CycleBasis,
    psi: np.ndarray,
    steps: int = 5,
) -> bool:
    """Newton flows are basis-independent: run both systems from x=0.

    Returns true iff the flow vectors agree within 1e-9 after each of the
    first `steps` Newton iterations. Singular-Jacobian errors propagate.
    """
    from .solver import LoopSystem, flows, nr_step

    mu = net.mu
    sys_a = LoopSystem(ecm=edge_cycle_matrix(net, basis_a), psi=np.asarray(psi, dtype=float), mu=mu)
    sys_b = LoopSystem(ecm=edge_cycle_matrix(net, basis_b), psi=np.asarray(psi, dtype=float), mu=mu)
    xa = np.zeros(sys_a.k)
    xb = np.zeros(sys_b.k)
    for _ in range(steps):
        xa = nr_step(sys_a, xa)
        xb = nr_step(sys_b, xb)
        if np.max(np.abs(flows(sys_a, xa) - flows(sys_b, xb))) > 1e-9:
            return False
    return True
