"""Flow network model: graph structure, consumption vector, document I/O.

A network is an undirected multigraph of junctions (vertices 1..n) and pipe
segments (edges 1..m). Every edge is stored with tail < head; a declared
direction is only a labelling and gets normalized away. The vector w holds
the external inflow per vertex (injection-positive: w_v > 0 means flow enters
the network at v), so conservation reads D^T q + w = 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DuplicateId,
    MalformedDocument,
    NonPositiveMu,
    SelfLoop,
    UnbalancedConsumption,
)

BALANCE_RTOL = 1e-9

_DOCUMENT_KEYS = {"nodes", "edges", "cycle_basis", "reference_flow", "x0"}
_NODE_KEYS = {"id", "inflow"}
_EDGE_KEYS = {"id", "from", "to", "mu"}
_STEP_KEYS = {"edge", "dir"}


@dataclass(frozen=True)
class Edge:
    """Oriented pipe segment; tail < head by construction."""

    id: int
    tail: int
    head: int
    mu: float = 1.0


@dataclass(frozen=True)
class FlowNetwork:
    """Immutable network; w is read-only and balanced to 1e-9 relative."""

    n: int
    edges: tuple[Edge, ...]
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        w.flags.writeable = False
        object.__setattr__(self, "w", w)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def mu(self) -> np.ndarray:
        return np.array([e.mu for e in self.edges])

    def adjacency(self) -> list[list[tuple[int, int]]]:
        """Neighbor lists indexed by vertex: adjacency()[v] = [(u, edge id)].

        Entries appear in increasing edge-id order, which fixes the
        deterministic traversal order used by tree construction.
        """
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n + 1)]
        for e in self.edges:
            adj[e.tail].append((e.head, e.id))
            adj[e.head].append((e.tail, e.id))
        return adj

    def __eq__(self, other) -> bool:
        if not isinstance(other, FlowNetwork):
            return NotImplemented
        return (
            self.n == other.n
            and self.edges == other.edges
            and np.array_equal(self.w, other.w)
        )


@dataclass(frozen=True)
class ValidationReport:
    """Findings of validate(); biconnectivity is a warning, never an error."""

    balanced: bool
    connected: bool
    biconnected: bool
    parallel_edge_count: int
    k: int
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def as_dict(self) -> dict:
        return {
            "balanced": self.balanced,
            "connected": self.connected,
            "biconnected": self.biconnected,
            "parallel_edge_count": self.parallel_edge_count,
            "k": self.k,
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class NetworkDocument:
    """Parsed document: the network plus the optional analysis fields."""

    network: FlowNetwork
    cycle_basis: tuple[tuple[tuple[int, int], ...], ...] | None = None
    reference_flow: np.ndarray | None = None
    x0: np.ndarray | None = None


def _require(cond: bool, err: type, message: str):
    if not cond:
        raise err(message)


def _as_int(value, what: str) -> int:
    # bool is an int subclass; reject it to keep ids honest
    _require(
        isinstance(value, int) and not isinstance(value, bool),
        MalformedDocument,
        f"{what} must be an integer, got {value!r}",
    )
    return value


def _as_number(value, what: str) -> float:
    _require(
        isinstance(value, (int, float)) and not isinstance(value, bool),
        MalformedDocument,
        f"{what} must be a number, got {value!r}",
    )
    return float(value)


def network_from_document(doc: dict) -> NetworkDocument:
    """Build a NetworkDocument from a decoded document object.

    Enforces the document schema: unknown keys are rejected, node ids must
    cover 1..n, edge ids must be 1..m in listed order, tail < head is
    normalized, and w must balance to zero.
    """
    _require(isinstance(doc, dict), MalformedDocument, "document root must be an object")
    unknown = set(doc) - _DOCUMENT_KEYS
    _require(not unknown, MalformedDocument, f"unknown document keys: {sorted(unknown)}")
    _require("nodes" in doc and "edges" in doc, MalformedDocument, "document needs 'nodes' and 'edges'")

    nodes = doc["nodes"]
    _require(isinstance(nodes, list) and nodes, MalformedDocument, "'nodes' must be a non-empty list")
    inflow: dict[int, float] = {}
    for entry in nodes:
        _require(isinstance(entry, dict), MalformedDocument, "node entries must be objects")
        unknown = set(entry) - _NODE_KEYS
        _require(not unknown, MalformedDocument, f"unknown node keys: {sorted(unknown)}")
        _require("id" in entry, MalformedDocument, "node entry missing 'id'")
        vid = _as_int(entry["id"], "node id")
        if vid in inflow:
            raise DuplicateId(f"duplicate node id {vid}")
        inflow[vid] = _as_number(entry.get("inflow", 0.0), f"inflow of node {vid}")
    n = len(inflow)
    _require(
        set(inflow) == set(range(1, n + 1)),
        MalformedDocument,
        "node ids must be exactly 1..n",
    )
    w = np.array([inflow[v] for v in range(1, n + 1)])
    scale = max(1.0, float(np.max(np.abs(w))))
    if abs(float(w.sum())) > BALANCE_RTOL * scale:
        raise UnbalancedConsumption(f"inflows sum to {w.sum():.3g}, not 0")

    raw_edges = doc["edges"]
    _require(isinstance(raw_edges, list), MalformedDocument, "'edges' must be a list")
    edges: list[Edge] = []
    seen_ids: set[int] = set()
    for pos, entry in enumerate(raw_edges, start=1):
        _require(isinstance(entry, dict), MalformedDocument, "edge entries must be objects")
        unknown = set(entry) - _EDGE_KEYS
        _require(not unknown, MalformedDocument, f"unknown edge keys: {sorted(unknown)}")
        for key in ("id", "from", "to"):
            _require(key in entry, MalformedDocument, f"edge entry missing '{key}'")
        eid = _as_int(entry["id"], "edge id")
        if eid in seen_ids:
            raise DuplicateId(f"duplicate edge id {eid}")
        seen_ids.add(eid)
        _require(eid == pos, MalformedDocument, f"edge ids must be 1..m in order; id {eid} at position {pos}")
        u = _as_int(entry["from"], f"edge {eid} 'from'")
        v = _as_int(entry["to"], f"edge {eid} 'to'")
        for vid in (u, v):
            _require(1 <= vid <= n, MalformedDocument, f"edge {eid} references unknown vertex {vid}")
        if u == v:
            raise SelfLoop(f"edge {eid} is a self-loop at vertex {u}")
        mu = _as_number(entry.get("mu", 1.0), f"mu of edge {eid}")
        if not mu > 0:
            raise NonPositiveMu(f"edge {eid} has mu={mu}; mu must be positive")
        edges.append(Edge(id=eid, tail=min(u, v), head=max(u, v), mu=mu))

    net = FlowNetwork(n=n, edges=tuple(edges), w=w)

    cycle_basis = None
    if doc.get("cycle_basis") is not None:
        raw_basis = doc["cycle_basis"]
        _require(isinstance(raw_basis, list), MalformedDocument, "'cycle_basis' must be a list of cycles")
        cycles = []
        for cyc in raw_basis:
            _require(isinstance(cyc, list) and cyc, MalformedDocument, "each cycle must be a non-empty list")
            steps = []
            for step in cyc:
                _require(isinstance(step, dict), MalformedDocument, "cycle steps must be objects")
                unknown = set(step) - _STEP_KEYS
                _require(not unknown, MalformedDocument, f"unknown cycle step keys: {sorted(unknown)}")
                _require("edge" in step and "dir" in step, MalformedDocument, "cycle step needs 'edge' and 'dir'")
                eid = _as_int(step["edge"], "cycle step edge")
                _require(1 <= eid <= net.m, MalformedDocument, f"cycle references unknown edge {eid}")
                d = _as_int(step["dir"], "cycle step dir")
                _require(d in (1, -1), MalformedDocument, f"cycle step dir must be +1 or -1, got {d}")
                steps.append((eid, d))
            cycles.append(tuple(steps))
        cycle_basis = tuple(cycles)

    reference_flow = _optional_vector(doc, "reference_flow", net.m)
    k = len(cycle_basis) if cycle_basis is not None else net.m - net.n + 1
    x0 = _optional_vector(doc, "x0", k)

    return NetworkDocument(network=net, cycle_basis=cycle_basis, reference_flow=reference_flow, x0=x0)


def _optional_vector(doc: dict, key: str, length: int) -> np.ndarray | None:
    if doc.get(key) is None:
        return None
    raw = doc[key]
    _require(isinstance(raw, list), MalformedDocument, f"'{key}' must be a list of numbers")
    values = [_as_number(v, f"{key} entry") for v in raw]
    _require(len(values) == length, MalformedDocument, f"'{key}' must have length {length}, got {len(values)}")
    return np.array(values)


def load_document(text: str) -> NetworkDocument:
    """Parse a network document from JSON text."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"invalid JSON: {exc}") from exc
    return network_from_document(doc)


def parse_network(text: str) -> FlowNetwork:
    """Parse JSON text into a FlowNetwork, dropping the optional fields."""
    return load_document(text).network


def document_dict(
    net: FlowNetwork,
    cycle_basis: Sequence[Sequence[tuple[int, int]]] | None = None,
    reference_flow: Sequence[float] | None = None,
    x0: Sequence[float] | None = None,
) -> dict:
    """Assemble the canonical document object for a network."""
    doc: dict = {
        "nodes": [{"id": v, "inflow": float(net.w[v - 1])} for v in range(1, net.n + 1)],
        "edges": [
            {"id": e.id, "from": e.tail, "to": e.head, "mu": e.mu} for e in net.edges
        ],
    }
    if cycle_basis is not None:
        doc["cycle_basis"] = [
            [{"edge": eid, "dir": d} for eid, d in cycle] for cycle in cycle_basis
        ]
    if reference_flow is not None:
        doc["reference_flow"] = [float(v) for v in reference_flow]
    if x0 is not None:
        doc["x0"] = [float(v) for v in x0]
    return doc


def serialize_network(net: FlowNetwork, **optional) -> str:
    """Serialize to canonical JSON; parse_network inverts this exactly."""
    return json.dumps(document_dict(net, **optional), indent=2)


def incidence_matrix(net: FlowNetwork) -> np.ndarray:
    """The m x n signed incidence matrix D: -1 at the tail, +1 at the head."""
    D = np.zeros((net.m, net.n))
    for e in net.edges:
        D[e.id - 1, e.tail - 1] = -1.0
        D[e.id - 1, e.head - 1] = 1.0
    return D


def _connected(net: FlowNetwork) -> bool:
    adj = net.adjacency()
    seen = {1}
    stack = [1]
    while stack:
        v = stack.pop()
        for u, _ in adj[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == net.n


def _biconnected(net: FlowNetwork) -> bool:
    """True when the graph is connected with no articulation vertex or bridge.

    The single-edge two-vertex graph therefore reports false (its edge is a
    bridge). Parallel edges are distinguished by edge id, so a doubled edge
    correctly protects its endpoints. Iterative lowpoint computation.
    """
    if not _connected(net):
        return False
    if net.n == 1:
        return True
    adj = net.adjacency()
    disc: dict[int, int] = {}
    low: dict[int, int] = {}
    parent_of: dict[int, tuple[int, int]] = {}  # child -> (parent, tree edge id)
    counter = 0
    root_children = 0
    stack: list[tuple[int, int]] = [(1, 0)]
    order: list[int] = []
    while stack:
        v, idx = stack.pop()
        if idx == 0:
            counter += 1
            disc[v] = low[v] = counter
            order.append(v)
        while idx < len(adj[v]):
            u, eid = adj[v][idx]
            idx += 1
            if u not in disc:
                parent_of[u] = (v, eid)
                if v == 1:
                    root_children += 1
                stack.append((v, idx))
                stack.append((u, 0))
                break
            if parent_of.get(v, (None, None))[1] != eid:
                low[v] = min(low[v], disc[u])
    articulation = root_children > 1
    bridge = False
    for v in reversed(order):
        if v == 1:
            continue
        p, _ = parent_of[v]
        low[p] = min(low[p], low[v])
        if p != 1 and low[v] >= disc[p]:
            articulation = True
        if low[v] > disc[p]:
            bridge = True
    return not articulation and not bridge


def validate(net: FlowNetwork) -> ValidationReport:
    """Structural findings: balance, connectivity, biconnectivity, k."""
    scale = max(1.0, float(np.max(np.abs(net.w))) if net.n else 1.0)
    balanced = abs(float(net.w.sum())) <= BALANCE_RTOL * scale
    connected = _connected(net)
    biconnected = _biconnected(net)
    endpoint_counts: dict[tuple[int, int], int] = {}
    for e in net.edges:
        key = (e.tail, e.head)
        endpoint_counts[key] = endpoint_counts.get(key, 0) + 1
    parallel = sum(c - 1 for c in endpoint_counts.values() if c > 1)
    k = net.m - net.n + 1
    warnings = []
    if not connected:
        warnings.append("graph is not connected; components must be analyzed separately")
    elif not biconnected:
        warnings.append("graph is not biconnected; bridge edges carry forced flow")
    return ValidationReport(
        balanced=balanced,
        connected=connected,
        biconnected=biconnected,
        parallel_edge_count=parallel,
        k=k,
        warnings=tuple(warnings),
    )
