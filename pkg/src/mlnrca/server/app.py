"""HTTP service exposing models and diagnosis sessions.

Endpoints:
    POST /models                          model DSL text body
    GET  /models                          summaries of loaded models
    GET  /models/{id}/graph               nodes and edges for the console
    POST /sessions                        {"modelId": ...}
    GET  /sessions/{id}                   observation log and report history
    POST /sessions/{id}/observations      {"observations": [...]}
    GET  /sessions/{id}/diagnosis?k=N     root-cause report
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse

from ..model import InfrastructureModel, ModelSyntaxError, ModelValidationError
from ..session import (
    ContradictionError,
    ObservationConflictError,
    UnknownComponentError,
    Observation,
)
from .schemas import (
    GraphDocument,
    GraphEdge,
    GraphNode,
    GraphRisk,
    ModelSummary,
    ObservationLog,
    ObservationsIn,
    SessionCreate,
    SessionDetail,
    SessionSummary,
)
from .store import SessionStore, UnknownModelError, UnknownSessionError


def _graph_document(model: InfrastructureModel) -> GraphDocument:
    risks_of: dict[str, list[GraphRisk]] = {c: [] for c in model.components}
    for c, r, w in model.risk_capabilities:
        risks_of[c].append(GraphRisk(risk=r, weight=w))
    members: dict[str, list[str]] = {}
    for c, t in model.type_memberships:
        members.setdefault(t, []).append(c)
    for t, r, w in model.type_risk_rules:
        for m in members.get(t, ()):
            risks_of[m].append(GraphRisk(risk=r, weight=w))
    nodes = [GraphNode(id=c, risks=risks_of[c]) for c in model.components]
    edges = [GraphEdge(source=a, target=b, kind="specific") for a, b in model.specific_deps]
    edges += [GraphEdge(source=a, target=b, kind="generic") for a, b in model.generic_deps]
    edges += [GraphEdge(source=a, target=b, kind="redundancy") for a, b in model.redundancy_pairs]
    return GraphDocument(nodes=nodes, edges=edges)


def _observation_log(stored) -> ObservationLog:
    return ObservationLog(observations=[o.to_dict() for o in stored.session.observations])


def create_app(journal_path: str | None = None, model_paths: list[str] | None = None,
               ui_dist: str | None = None) -> FastAPI:
    app = FastAPI(title="mlnrca", version="0.1.0")
    store = SessionStore(journal_path)
    app.state.store = store

    for path in model_paths or []:
        store.add_model(Path(path).read_text(encoding="utf-8"))

    @app.exception_handler(UnknownModelError)
    @app.exception_handler(UnknownSessionError)
    async def _not_found(request: Request, exc: Exception) -> JSONResponse:
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/models", response_model=ModelSummary, status_code=201)
    async def create_model(request: Request) -> ModelSummary | JSONResponse:
        try:
            text = (await request.body()).decode("utf-8")
        except UnicodeDecodeError:
            return JSONResponse(status_code=400, content={"detail": "model body must be UTF-8 text"})
        try:
            stored = store.add_model(text)
        except ModelSyntaxError as exc:
            return JSONResponse(status_code=400, content={
                "detail": "model syntax errors",
                "diagnostics": [str(d) for d in exc.diagnostics],
            })
        except ModelValidationError as exc:
            return JSONResponse(status_code=400, content={
                "detail": "model validation errors",
                "diagnostics": [str(i) for i in exc.report.errors],
            })
        return ModelSummary(id=stored.id, components=list(stored.model.components),
                            risks=list(stored.model.risks))

    @app.get("/models", response_model=list[ModelSummary])
    def list_models() -> list[ModelSummary]:
        return [ModelSummary(id=m.id, components=list(m.model.components),
                             risks=list(m.model.risks)) for m in store.list_models()]

    @app.get("/models/{model_id}/graph", response_model=GraphDocument)
    def model_graph(model_id: str) -> GraphDocument:
        return _graph_document(store.get_model(model_id).model)

    @app.post("/sessions", response_model=SessionSummary, status_code=201)
    def create_session(body: SessionCreate) -> SessionSummary:
        stored = store.create_session(body.modelId)
        return SessionSummary(sessionId=stored.id, modelId=stored.model_id)

    @app.get("/sessions/{session_id}", response_model=SessionDetail)
    def session_detail(session_id: str) -> SessionDetail:
        stored = store.get_session(session_id)
        return SessionDetail(
            sessionId=stored.id,
            modelId=stored.model_id,
            observations=[o.to_dict() for o in stored.session.observations],
            reports=[r.to_dict() for r in stored.session.reports],
        )

    @app.post("/sessions/{session_id}/observations", response_model=ObservationLog)
    def post_observations(session_id: str, body: ObservationsIn) -> ObservationLog | JSONResponse:
        observations = [Observation(o.component, o.status, source=o.source)
                        for o in body.observations]
        try:
            stored = store.add_observations(session_id, observations)
        except UnknownComponentError as exc:
            return JSONResponse(status_code=400, content={
                "detail": str(exc), "component": exc.component})
        except ObservationConflictError as exc:
            return JSONResponse(status_code=409, content={
                "detail": str(exc),
                "conflict": {
                    "component": exc.later.component,
                    "earlier": {"component": exc.earlier.component, "status": exc.earlier.status},
                    "later": {"component": exc.later.component, "status": exc.later.status},
                },
            })
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        return _observation_log(stored)

    @app.get("/sessions/{session_id}/diagnosis")
    def get_diagnosis(session_id: str, k: int = Query(default=1, ge=1)) -> Response:
        try:
            report = store.diagnose(session_id, k)
        except ContradictionError as exc:
            return JSONResponse(status_code=422, content={
                "detail": "observations contradict the model",
                "conflictingObservations": [
                    {"component": o.component, "status": o.status} for o in exc.observations
                ],
            })
        return JSONResponse(content=report.to_dict())

    dist = Path(ui_dist) if ui_dist else Path(__file__).resolve().parents[3] / "frontend" / "dist"
    if dist.is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=dist, html=True), name="ui")

    return app
