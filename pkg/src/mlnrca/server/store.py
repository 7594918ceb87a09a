"""In-memory model and session store with a replayable journal.

State lives in memory; every mutating event is appended to a newline-
delimited JSON journal.  Replaying the journal from an empty store
reconstructs the identical state, including recomputed diagnosis results
(inference is deterministic).
"""

from __future__ import annotations

import json
import secrets
import threading
from dataclasses import dataclass, field
from pathlib import Path

from ..model import InfrastructureModel, parse_model, validate_model
from ..session import DiagnosisSession, Observation, new_session


class UnknownModelError(Exception):
    def __init__(self, model_id: str):
        self.model_id = model_id
        super().__init__(f"unknown model {model_id!r}")


class UnknownSessionError(Exception):
    def __init__(self, session_id: str):
        self.session_id = session_id
        super().__init__(f"unknown session {session_id!r}")


@dataclass
class StoredModel:
    id: str
    text: str
    model: InfrastructureModel


@dataclass
class StoredSession:
    id: str
    model_id: str
    session: DiagnosisSession
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    """Maps ids to models and sessions; journals every mutation."""

    def __init__(self, journal_path: str | Path | None = None):
        self._models: dict[str, StoredModel] = {}
        self._sessions: dict[str, StoredSession] = {}
        self._lock = threading.Lock()
        self._journal_path = Path(journal_path) if journal_path else None
        if self._journal_path and self._journal_path.exists():
            self._replay(self._journal_path.read_text(encoding="utf-8"))

    # -- journal ------------------------------------------------------------------

    def _journal(self, event: dict) -> None:
        if self._journal_path is None:
            return
        with self._journal_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, separators=(",", ":")) + "\n")

    def _replay(self, text: str) -> None:
        for line in text.splitlines():
            if not line.strip():
                continue
            event = json.loads(line)
            kind = event["event"]
            if kind == "model_added":
                self._add_model(event["id"], event["text"])
            elif kind == "session_created":
                self._create_session(event["id"], event["modelId"])
            elif kind == "observations_added":
                stored = self._sessions[event["sessionId"]]
                stored.session.add_observations(
                    [Observation(**o) for o in event["observations"]])
            elif kind == "diagnosis_computed":
                stored = self._sessions[event["sessionId"]]
                try:
                    stored.session.diagnose(k=event["k"])
                except Exception:
                    pass  # the failure already happened live; keep replaying

    # -- models -------------------------------------------------------------------

    def _add_model(self, model_id: str, text: str) -> StoredModel:
        model = parse_model(text)
        report = validate_model(model)
        if not report.ok:
            from ..model import ModelValidationError
            raise ModelValidationError(report)
        stored = StoredModel(model_id, text, model)
        self._models[model_id] = stored
        return stored

    def add_model(self, text: str) -> StoredModel:
        with self._lock:
            model_id = secrets.token_hex(16)
            stored = self._add_model(model_id, text)
            self._journal({"event": "model_added", "id": model_id, "text": text})
            return stored

    def get_model(self, model_id: str) -> StoredModel:
        stored = self._models.get(model_id)
        if stored is None:
            raise UnknownModelError(model_id)
        return stored

    def list_models(self) -> list[StoredModel]:
        return list(self._models.values())

    # -- sessions -------------------------------------------------------------------

    def _create_session(self, session_id: str, model_id: str) -> StoredSession:
        model = self.get_model(model_id)
        stored = StoredSession(session_id, model_id, new_session(model.model))
        self._sessions[session_id] = stored
        return stored

    def create_session(self, model_id: str) -> StoredSession:
        with self._lock:
            session_id = secrets.token_hex(16)
            stored = self._create_session(session_id, model_id)
            self._journal({"event": "session_created", "id": session_id, "modelId": model_id})
            return stored

    def get_session(self, session_id: str) -> StoredSession:
        stored = self._sessions.get(session_id)
        if stored is None:
            raise UnknownSessionError(session_id)
        return stored

    def add_observations(self, session_id: str, observations: list[Observation]) -> StoredSession:
        stored = self.get_session(session_id)
        with stored.lock:
            stored.session.add_observations(observations)
            self._journal({
                "event": "observations_added",
                "sessionId": session_id,
                "observations": [o.to_dict() for o in observations],
            })
        return stored

    def diagnose(self, session_id: str, k: int):
        stored = self.get_session(session_id)
        with stored.lock:
            report = stored.session.diagnose(k=k)
            self._journal({"event": "diagnosis_computed", "sessionId": session_id, "k": k})
            return report
