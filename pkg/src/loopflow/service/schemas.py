"""Request and response models for the HTTP service.

The document schema mirrors the JSON file format one-to-one; the parser in
loopflow.network remains the authority on semantic rules (balance, id
numbering), so these models stay structural.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

# non-finite floats are serialized as strings ('nan', 'inf', '-inf')
Num = float | str


class NodeIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    id: int
    inflow: float = 0.0


class EdgeIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    id: int
    tail: int = Field(alias="from")
    head: int = Field(alias="to")
    mu: float = 1.0


class CycleStepIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    edge: int
    dir: int


class DocumentIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    nodes: list[NodeIn]
    edges: list[EdgeIn]
    cycle_basis: list[list[CycleStepIn]] | None = None
    reference_flow: list[float] | None = None
    x0: list[float] | None = None

    def as_document_dict(self) -> dict:
        out = self.model_dump(by_alias=True)
        for key in ("cycle_basis", "reference_flow", "x0"):
            if out[key] is None:
                del out[key]
        return out


class SolverOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")
    document: DocumentIn
    tol_residual: float = Field(default=1e-10, gt=0)
    tol_step: float = Field(default=1e-12, gt=0)
    max_iters: int | None = Field(default=None, ge=1)
    hc_mode: Literal["simultaneous", "sweep"] = "simultaneous"
    x0: list[float] | None = None


class DocumentRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    document: DocumentIn


class SolveRequest(SolverOptions):
    method: Literal["nr", "hc"] = "nr"


class CertifyRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    document: DocumentIn
    method: Literal["nr", "hc"] = "nr"
    face_basis: bool = False
    x0: list[float] | None = None


class RateRequest(SolverOptions):
    pass


class NodeDemoRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    document: DocumentIn | None = None
    p0: list[float] | None = None
    tol_residual: float = Field(default=1e-10, gt=0)
    tol_step: float = Field(default=1e-12, gt=0)
    max_iters: int = Field(default=100, ge=1)


class CycleStepOut(BaseModel):
    edge: int
    dir: int


class ValidateReport(BaseModel):
    command: str
    n: int
    m: int
    balanced: bool
    connected: bool
    biconnected: bool
    parallel_edge_count: int
    k: int
    warnings: list[str]


class BasisReport(BaseModel):
    command: str
    source: str
    k: int
    ell: int
    cycles: list[list[CycleStepOut]]
    edge_cycle_matrix: list[list[int]]
    face_basis: bool


class SolveReport(BaseModel):
    command: str
    method: str
    hc_mode: str | None = None
    x0: list[float]
    iterates: list[list[Num]]
    residual_norms: list[Num]
    step_norms: list[Num]
    termination: str
    iterations: int
    detail: str | None = None
    converged: bool
    final_x: list[Num]
    final_flows: list[Num]
    conservation_residual: Num


class NrCertifyReport(BaseModel):
    command: str
    x0: list[float]
    method: Literal["nr"]
    basis_mode: str
    beta: float | None
    eta: float | None
    L: float
    h: float | None
    r: float | None
    satisfied: bool
    failure: str | None


class HcCertifyReport(BaseModel):
    command: str
    x0: list[float]
    method: Literal["hc"]
    basis_mode: str
    beta: float | None
    eta: float | None
    L: float
    K: float
    delta0: float
    delta1: float
    h: float | None
    r: float | None
    satisfied: bool
    short_cycle_fallback: bool
    failure: str | None


class RateEntry(BaseModel):
    termination: str
    iterations: int
    omega: float | None = None
    rate: float | None = None
    classification: str | None = None
    samples_used: int | None = None
    error: str | None = None
    message: str | None = None


class RateReport(BaseModel):
    command: str
    x0: list[float]
    solution: list[float]
    methods: dict[str, RateEntry]


class NodeDemoReport(BaseModel):
    command: str
    reference_vertex: int
    p0: list[float]
    iterates: list[list[Num]]
    residual_norms: list[Num]
    step_norms: list[Num]
    termination: str
    iterations: int
    detail: str | None = None
    oscillating: bool


class HealthReport(BaseModel):
    status: str
    version: str
