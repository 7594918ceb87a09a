"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class ModelSummary(BaseModel):
    id: str
    components: list[str]
    risks: list[str]


class GraphRisk(BaseModel):
    risk: str
    weight: float


class GraphNode(BaseModel):
    id: str
    risks: list[GraphRisk]


class GraphEdge(BaseModel):
    source: str
    target: str
    kind: str  # specific | generic | redundancy


class GraphDocument(BaseModel):
    nodes: list[GraphNode]
    edges: list[GraphEdge]


class SessionCreate(BaseModel):
    modelId: str


class SessionSummary(BaseModel):
    sessionId: str
    modelId: str


class ObservationIn(BaseModel):
    component: str
    status: str
    source: str = "manual"


class ObservationOut(ObservationIn):
    timestamp: float


class ObservationsIn(BaseModel):
    observations: list[ObservationIn]


class ObservationLog(BaseModel):
    observations: list[ObservationOut]


class CauseOut(BaseModel):
    component: str
    risk: str


class AlternativeOut(BaseModel):
    causes: list[CauseOut]
    score: float


class ChainStepOut(BaseModel):
    source: str = Field(alias="from")
    target: str = Field(alias="to")
    kind: str

    model_config = {"populate_by_name": True}


class ChainOut(BaseModel):
    observed: str
    steps: list[ChainStepOut]


class ExplanationOut(BaseModel):
    cause: CauseOut
    derived: bool
    chains: list[ChainOut]


class DiagnosisOut(BaseModel):
    causes: list[CauseOut]
    derivedUnavailable: list[str]
    derivedAvailable: list[str]
    score: float
    alternatives: list[AlternativeOut] | None
    explanations: list[ExplanationOut]


class SessionDetail(BaseModel):
    sessionId: str
    modelId: str
    observations: list[ObservationOut]
    reports: list[DiagnosisOut]
