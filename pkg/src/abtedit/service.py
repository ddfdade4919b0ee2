"""Session service: live structure editing over a JSON protocol.

    POST /sessions                {"spec": "...", "rootSort": "e"}
    GET  /sessions/{id}
    POST /sessions/{id}/command   {"kind": "child|parent|insert", "arg": ...}
    POST /sessions/{id}/script    {"text": "...", "fuel": 1000}
    POST /sessions/{id}/query     {"phi": "@hole_e"}
    GET  /sessions/{id}/trace

A stuck command is data (HTTP 200 with a `stuck` field), not an error.
Scripts commit atomically: the session tree changes only when the run
terminates.  Requests to one session are serialized; the store itself is
safe for concurrent lookup.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .abt import WellFormedTree, initial_tree, print_tree
from .engine import (
    TERMINAL,
    Config,
    ScriptParseError,
    StepLabel,
    parse_editor_expr,
    run,
)
from .langspec import LanguageSpec, SpecError, editor_extend, load_spec
from .logic import ConditionParseError, parse_condition, satisfies
from .wire import enclosed_sort, palette_for, parse_insert_arg, tree_to_wire
from .zipper import Child, Insert, Parent, Stuck, apply_command


@dataclass
class Session:
    id: str
    spec: LanguageSpec
    root_sort: str
    tree: WellFormedTree
    initial: WellFormedTree
    # (label text, tree after the step); every labelled transition lands here
    history: list[tuple[str, WellFormedTree]] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def add(self, session: Session) -> None:
        with self._lock:
            self._sessions[session.id] = session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session


class CreateSession(BaseModel):
    spec: str
    rootSort: str


class CommandBody(BaseModel):
    kind: str
    arg: Union[int, str, None] = None


class ScriptBody(BaseModel):
    text: str
    fuel: int = 10_000


class QueryBody(BaseModel):
    phi: str


def _operators(spec: LanguageSpec) -> list[dict]:
    return [
        {
            "op": decl.name,
            "paramKind": decl.param_kind,
            "resultSort": decl.result_sort.name,
        }
        for decl in spec.operators
        if not decl.is_cursor
    ]


def _view(session: Session, stuck: Optional[str] = None) -> dict:
    return {
        "id": session.id,
        "rootSort": session.root_sort,
        "tree": tree_to_wire(session.tree, session.spec),
        "sexpr": print_tree(session.tree.tree),
        "cursorPath": list(session.tree.cursor_path),
        "enclosedSort": enclosed_sort(session.tree, session.spec).name,
        "palette": palette_for(session.tree, session.spec),
        "operators": _operators(session.spec),
        "stuck": stuck,
    }


def _trace_entry(label: StepLabel, tree: WellFormedTree) -> dict:
    return {"label": str(label), "sexpr": print_tree(tree.tree)}


def create_app() -> FastAPI:
    app = FastAPI(title="abtedit session service")
    store = SessionStore()

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSession):
        try:
            spec = editor_extend(load_spec(body.spec))
            sort = spec.sort(body.rootSort)
        except SpecError as err:
            raise HTTPException(status_code=400, detail=str(err))
        session = Session(
            id=uuid.uuid4().hex[:12],
            spec=spec,
            root_sort=sort.name,
            tree=initial_tree(spec, sort),
            initial=initial_tree(spec, sort),
        )
        store.add(session)
        return _view(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = store.get(session_id)
        with session.lock:
            return _view(session)

    @app.post("/sessions/{session_id}/command")
    def post_command(session_id: str, body: CommandBody):
        session = store.get(session_id)
        if body.kind == "child":
            if not isinstance(body.arg, int) or body.arg < 1:
                raise HTTPException(400, "child needs a 1-based index")
            cmd = Child(body.arg)
        elif body.kind == "parent":
            cmd = Parent()
        elif body.kind == "insert":
            if not isinstance(body.arg, str) or not body.arg:
                raise HTTPException(400, "insert needs an operator name")
            name, literal = parse_insert_arg(body.arg)
            cmd = Insert(name, literal)
        else:
            raise HTTPException(400, f"unknown command kind {body.kind!r}")
        with session.lock:
            result = apply_command(session.tree, cmd, session.spec)
            if isinstance(result, Stuck):
                return _view(session, stuck=result.reason)
            session.tree = result
            session.history.append((str(cmd), result))
            return _view(session)

    @app.post("/sessions/{session_id}/script")
    def post_script(session_id: str, body: ScriptBody):
        session = store.get(session_id)
        try:
            expr = parse_editor_expr(body.text)
        except ScriptParseError as err:
            raise HTTPException(400, f"script parse error: {err}")
        if body.fuel < 0:
            raise HTTPException(400, "fuel must be >= 0")
        with session.lock:
            result = run(Config(expr, session.tree), session.spec, body.fuel)
            committed = result.status == TERMINAL
            if committed:
                # atomic commit: only a terminated run changes the session
                for label, snapshot in result.trace:
                    session.history.append((str(label), snapshot))
                session.tree = result.final_tree
            return {
                "status": result.status,
                "stuckReason": result.stuck_reason,
                "steps": result.steps,
                "committed": committed,
                "trace": [_trace_entry(l, t) for l, t in result.trace],
                "view": _view(session),
            }

    @app.post("/sessions/{session_id}/query")
    def post_query(session_id: str, body: QueryBody):
        session = store.get(session_id)
        try:
            phi = parse_condition(body.phi)
        except ConditionParseError as err:
            raise HTTPException(400, f"condition parse error: {err}")
        with session.lock:
            try:
                value = satisfies(
                    session.tree.enclosed(), phi, session.spec
                )
            except SpecError as err:
                raise HTTPException(400, str(err))
            return {"phi": body.phi, "result": value}

    @app.get("/sessions/{session_id}/trace")
    def get_trace(session_id: str):
        session = store.get(session_id)
        with session.lock:
            return {
                "initial": print_tree(session.initial.tree),
                "entries": [
                    {"label": label, "sexpr": print_tree(t.tree)}
                    for label, t in session.history
                ],
                "current": print_tree(session.tree.tree),
            }

    dist = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
    if dist.is_dir():  # pragma: no cover - packaging convenience
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(dist), html=True), name="ui")

    return app


app = create_app()


def main() -> None:  # pragma: no cover - manual entry point
    import uvicorn

    uvicorn.run("abtedit.service:app", host="127.0.0.1", port=8000)


if __name__ == "__main__":  # pragma: no cover
    main()
