"""Review-session HTTP service: the human-in-the-loop side of the pipeline.

A session holds one requirement and its current tree.  Engineers inspect
the rendered diagram, replace operators or whole subtrees at a named tree
path, send feedback that triggers regeneration, and finally approve.  Every
snapshot is recomputed from the current tree in one step, so diagram,
diagnostics, and formula can never disagree; approved sessions are frozen.

Sessions persist as JSON files under a state directory, one file per
session, so the audit trail stays greppable.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from req2ltl.decompose import (
    DecompositionConfig,
    ProtocolError,
    RepairExhausted,
    decompose,
)
from req2ltl.gateway import BackendError, LlmBackend
from req2ltl.ltl import print_ltl
from req2ltl.onion import (
    KindMismatch,
    NodePath,
    OnionNode,
    PathError,
    RelationOp,
    ScopeOp,
    edit_node,
    loose_jsonable,
    parse_onion_loose,
    render_mermaid,
)
from req2ltl.translate import translate
from req2ltl.validation import validate

__all__ = ["ReviewSession", "SessionStore", "create_app", "DEFAULT_STATE_DIR"]

DEFAULT_STATE_DIR = Path("./.req2ltl/sessions")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class ReviewSession:
    id: str
    requirement: str
    tree: Optional[OnionNode]
    status: str = "Draft"  # Draft | Approved
    history: list[dict] = field(default_factory=list)

    def log(self, action: str) -> None:
        self.history.append({"action": action, "timestamp": _now()})

    def snapshot(self) -> dict:
        """Diagram, diagnostics, and formula recomputed from the current tree."""
        diagnostics: list[dict] = []
        mermaid = ""
        ltl: Optional[str] = None
        if self.tree is not None:
            report = validate(self.tree)
            diagnostics = [d.as_dict() for d in report.diagnostics]
            mermaid = render_mermaid(self.tree)
            if report.ok:
                ltl = print_ltl(translate(self.tree))
        return {
            "id": self.id,
            "requirement": self.requirement,
            "tree": loose_jsonable(self.tree),
            "diagnostics": diagnostics,
            "mermaid": mermaid,
            "ltl": ltl,
            "status": self.status,
            "history": list(self.history),
        }


class SessionStore:
    """File-backed store with per-session mutation locks."""

    def __init__(self, state_dir: Path = DEFAULT_STATE_DIR):
        self.state_dir = Path(state_dir)
        self.state_dir.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def lock(self, session_id: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def _path(self, session_id: str) -> Path:
        return self.state_dir / f"{session_id}.json"

    def save(self, session: ReviewSession) -> None:
        payload = {
            "id": session.id,
            "requirement": session.requirement,
            "tree": loose_jsonable(session.tree),
            "status": session.status,
            "history": session.history,
        }
        tmp = self._path(session.id).with_suffix(".tmp")
        tmp.write_text(json.dumps(payload, indent=2))
        tmp.replace(self._path(session.id))

    def load(self, session_id: str) -> Optional[ReviewSession]:
        path = self._path(session_id)
        if not path.exists():
            return None
        raw = json.loads(path.read_text())
        tree = parse_onion_loose(raw["tree"]) if raw.get("tree") is not None else None
        return ReviewSession(
            id=raw["id"],
            requirement=raw["requirement"],
            tree=tree,
            status=raw.get("status", "Draft"),
            history=raw.get("history", []),
        )


class CreateSessionBody(BaseModel):
    nl: str


class PatchTreeBody(BaseModel):
    path: list[str]
    op: Optional[str] = None
    subtree: Optional[dict] = None


class RegenerateBody(BaseModel):
    feedback: str = ""


def _error(status: int, code: str, message: str, details: Any = None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "details": details},
    )


def _decode_op(raw: str) -> ScopeOp | RelationOp | None:
    for enum_cls in (ScopeOp, RelationOp):
        for member in enum_cls:
            if member.value.lower() == raw.lower():
                return member
    return None


def create_app(
    backend: LlmBackend,
    cfg: DecompositionConfig | None = None,
    state_dir: Path | str = DEFAULT_STATE_DIR,
) -> FastAPI:
    cfg = cfg or DecompositionConfig()
    store = SessionStore(Path(state_dir))
    app = FastAPI(title="req2ltl review service")

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return _error(422, "MalformedBody", "request body failed validation", exc.errors())

    def run_decomposition(requirement: str, feedback: str | None = None) -> OnionNode:
        try:
            tree, _ = decompose(requirement, cfg, backend, feedback=feedback)
            return tree
        except RepairExhausted as exc:
            return exc.last_tree  # reviewable draft; diagnostics tell the story

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        requirement = body.nl.strip()
        if not requirement:
            return _error(422, "EmptyRequirement", "nl must be non-empty")
        try:
            tree = run_decomposition(requirement)
        except (BackendError, ProtocolError) as exc:
            kind = getattr(exc, "kind", "protocol")
            return _error(502, "BackendError", str(exc), {"kind": kind})
        session = ReviewSession(id=uuid.uuid4().hex[:12], requirement=requirement, tree=tree)
        session.log("Generated")
        store.save(session)
        return session.snapshot()

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = store.load(session_id)
        if session is None:
            return _error(404, "UnknownSession", f"no session {session_id!r}")
        return session.snapshot()

    def _mutate(session_id: str, fn):
        with store.lock(session_id):
            session = store.load(session_id)
            if session is None:
                return _error(404, "UnknownSession", f"no session {session_id!r}")
            if session.status == "Approved":
                return _error(409, "SessionApproved", "approved sessions are immutable")
            result = fn(session)
            if isinstance(result, JSONResponse):
                return result
            store.save(session)
            return session.snapshot()

    @app.patch("/sessions/{session_id}/tree")
    def patch_tree(session_id: str, body: PatchTreeBody):
        def apply(session: ReviewSession):
            if (body.op is None) == (body.subtree is None):
                return _error(422, "BadEdit", "provide exactly one of op or subtree")
            try:
                path = NodePath.from_strings(body.path)
                if body.op is not None:
                    replacement = _decode_op(body.op)
                    if replacement is None:
                        return _error(422, "UnknownOperator", f"unknown operator {body.op!r}")
                else:
                    replacement = parse_onion_loose(body.subtree)
                session.tree = edit_node(session.tree, path, replacement)
            except PathError as exc:
                return _error(422, "PathError", str(exc), {"path": body.path})
            except KindMismatch as exc:
                return _error(422, "KindMismatch", str(exc), {"path": body.path})
            session.log("Edited")

        return _mutate(session_id, apply)

    @app.post("/sessions/{session_id}/regenerate")
    def regenerate(session_id: str, body: RegenerateBody):
        def apply(session: ReviewSession):
            try:
                session.tree = run_decomposition(session.requirement, feedback=body.feedback or None)
            except (BackendError, ProtocolError) as exc:
                kind = getattr(exc, "kind", "protocol")
                return _error(502, "BackendError", str(exc), {"kind": kind})
            session.log("Regenerated")

        return _mutate(session_id, apply)

    @app.post("/sessions/{session_id}/approve")
    def approve(session_id: str):
        def apply(session: ReviewSession):
            report = validate(session.tree) if session.tree is not None else None
            if report is None or not report.ok:
                return _error(409, "NotApprovable", "session tree still has validation errors")
            session.status = "Approved"
            session.log("Approved")

        return _mutate(session_id, apply)

    return app
