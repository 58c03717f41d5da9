"""Session service: the episode engine over HTTP + WebSocket.

Clients create a session from a config document, read its state, post gaze
points / utterances / confirmations, and subscribe to the ordered event
stream.  Solved policies are cached in memory and on disk keyed by model
content, so repeated configs never re-solve; every session's event log is
persisted as JSONL under the data directory and can be replayed offline.

All mutations of one session are serialized through its lock, so handlers
never interleave mid-step; snapshots are taken under the same lock.
"""

from __future__ import annotations

import asyncio
import hashlib
import json
import os
import threading
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect

from .episode import DONE, WIRE_KINDS, PhaseError, PolicyCache, Session
from .eventlog import EventLogWriter
from .intent import (
    DegenerateTask,
    ObservationConfig,
    RewardConfig,
    build_model,
    task_from_dict,
)
from .pomdp import (
    ImpossibleObservation,
    load_policy,
    model_to_dict,
    save_policy,
    validate_model,
)
from .scene import scene_from_dict

DATA_DIR_ENV = "INTENTSTACK_DATA_DIR"
DEFAULT_DATA_DIR = "intentstack-data"
UI_DIR_ENV = "INTENTSTACK_UI_DIR"

_WS_POLL_SECONDS = 0.05


def canonical_json(document) -> str:
    """Stable serialization: sorted keys, no whitespace."""
    return json.dumps(document, sort_keys=True, separators=(",", ":"))


def config_digest(config: dict) -> str:
    """Content hash over (scene, tasks, observation, rewards, discount).

    Only those five fields participate, so cosmetic additions to the config
    document do not change the digest, and the digest is stable across
    process restarts.
    """
    core = {
        "scene": config["scene"],
        "tasks": config["tasks"],
        "observation": config.get("observation", {}),
        "rewards": config.get("rewards", {}),
        "discount": config.get("discount", 0.99),
    }
    return hashlib.sha256(canonical_json(core).encode("utf-8")).hexdigest()


def model_digest(model) -> str:
    return hashlib.sha256(canonical_json(model_to_dict(model)).encode("utf-8")).hexdigest()


class DiskPolicyCache(PolicyCache):
    """Policy cache backed by a directory of policy documents.

    Memory hits stay hits; on a memory miss the model-digest file is tried
    before solving, and fresh solves are written back, so identical configs
    yield byte-identical policies across restarts.
    """

    def __init__(self, directory, solver_config=None):
        super().__init__(solver_config)
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def policy_for(self, model):
        key = self.key_for(model)
        if key in self._policies:
            return super().policy_for(model)
        path = self.directory / f"{model_digest(model)}.json"
        if path.exists():
            policy = load_policy(path)
            self._policies[key] = policy
            self.hits += 1
            return policy
        policy = super().policy_for(model)
        save_policy(policy, path)
        return policy


@dataclass
class SessionRecord:
    handle: dict
    session: Session
    writer: EventLogWriter
    lock: threading.Lock = field(default_factory=threading.Lock)

    def wire_events(self) -> list[dict]:
        return [e for e in self.session.events if e["kind"] in WIRE_KINDS]


def _parse_config(document: dict):
    scene = scene_from_dict(document["scene"])
    tasks = [task_from_dict(t) for t in document["tasks"]]
    obs = ObservationConfig(**document.get("observation", {}))
    rew = RewardConfig(**document.get("rewards", {}))
    discount = float(document.get("discount", 0.99))
    attributes = tuple(document.get("attributes", ("color", "size")))
    exclusion_rule = bool(document.get("exclusion_rule", True))
    return scene, tasks, obs, rew, discount, attributes, exclusion_rule


def create_app(
    data_dir: str | os.PathLike | None = None,
    ui_dir: str | os.PathLike | None = None,
) -> FastAPI:
    """Build the service app.  data_dir falls back to $INTENTSTACK_DATA_DIR."""
    root = Path(data_dir or os.environ.get(DATA_DIR_ENV) or DEFAULT_DATA_DIR)
    logs_dir = root / "logs"
    logs_dir.mkdir(parents=True, exist_ok=True)

    cache = DiskPolicyCache(root / "policies")
    sessions: dict[str, SessionRecord] = {}
    registry_lock = threading.Lock()

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        with registry_lock:
            records = list(sessions.values())
        for record in records:
            record.writer.close()

    app = FastAPI(title="intentstack session service", lifespan=lifespan)
    app.state.data_dir = root
    app.state.policy_cache = cache
    app.state.sessions = sessions

    def record_for(session_id: str) -> SessionRecord:
        with registry_lock:
            record = sessions.get(session_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id!r}")
        return record

    def ack(record: SessionRecord) -> dict:
        last = record.session.events[-1]
        return {"step": last["step"], "phase": record.session.phase}

    @app.post("/sessions", status_code=201)
    def create_session(document: dict) -> dict:
        try:
            scene, tasks, obs, rew, discount, attributes, exclusion = _parse_config(document)
            if not tasks:
                raise ValueError("config declares no tasks")
            violations: list[str] = []
            for task in tasks:
                model = build_model(scene, task, obs, rew, discount, attributes)
                violations.extend(validate_model(model))
        except DegenerateTask as exc:
            raise HTTPException(
                status_code=400,
                detail={"error": f"DegenerateTask: {exc}", "violations": [str(exc)]},
            ) from exc
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(
                status_code=400,
                detail={"error": "invalid config", "violations": [str(exc)]},
            ) from exc
        if violations:
            raise HTTPException(
                status_code=400,
                detail={"error": "invalid model", "violations": violations},
            )

        session_id = uuid.uuid4().hex
        digest = config_digest(document)
        writer = EventLogWriter(logs_dir / f"{session_id}.jsonl")
        session = Session(
            scene,
            tasks,
            obs,
            rew,
            discount,
            attributes=attributes,
            exclusion_rule=exclusion,
            policy_cache=cache,
            log_writer=writer.write,
        )
        session.advance()
        handle = {
            "id": session_id,
            "created_at": datetime.now(timezone.utc).isoformat(),
            "digest": digest,
        }
        with registry_lock:
            sessions[session_id] = SessionRecord(handle=handle, session=session, writer=writer)
        return handle

    @app.get("/sessions/{session_id}")
    def get_state(session_id: str) -> dict:
        record = record_for(session_id)
        with record.lock:
            snapshot = record.session.snapshot()
        snapshot["id"] = record.handle["id"]
        snapshot["digest"] = record.handle["digest"]
        return snapshot

    @app.post("/sessions/{session_id}/gaze")
    def post_gaze(session_id: str, body: dict) -> dict:
        record = record_for(session_id)
        try:
            point = (float(body["x"]), float(body["y"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=f"bad gaze point: {exc}") from exc
        with record.lock:
            try:
                record.session.ingest_gaze(point)
            except PhaseError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            except ImpossibleObservation:
                # The engine already queued the error event; the phase is
                # unchanged and the client may retry.
                return ack(record)
            record.session.advance()
            return ack(record)

    @app.post("/sessions/{session_id}/utterance")
    def post_utterance(session_id: str, body: dict) -> dict:
        record = record_for(session_id)
        text = body.get("text")
        if not isinstance(text, str):
            raise HTTPException(status_code=400, detail="utterance body needs a text field")
        with record.lock:
            try:
                record.session.ingest_utterance(text)
            except PhaseError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            record.session.advance()
            return ack(record)

    @app.post("/sessions/{session_id}/confirmation")
    def post_confirmation(session_id: str, body: dict) -> dict:
        record = record_for(session_id)
        answer = body.get("answer")
        if not isinstance(answer, bool):
            raise HTTPException(status_code=400, detail="confirmation body needs a boolean answer")
        with record.lock:
            try:
                record.session.confirm(answer)
            except PhaseError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            record.session.advance()
            return ack(record)

    @app.get("/stats")
    def stats() -> dict:
        with registry_lock:
            count = len(sessions)
        return {
            "sessions": count,
            "policy_cache": {"hits": cache.hits, "misses": cache.misses},
        }

    @app.websocket("/sessions/{session_id}/events")
    async def events(websocket: WebSocket, session_id: str):
        with registry_lock:
            record = sessions.get(session_id)
        if record is None:
            await websocket.close(code=4404)
            return
        await websocket.accept()
        try:
            since = int(websocket.query_params.get("since", -1))
        except ValueError:
            since = -1
        cursor = 0
        try:
            while True:
                wire = record.wire_events()
                while cursor < len(wire):
                    event = wire[cursor]
                    cursor += 1
                    if event["step"] > since:
                        await websocket.send_json(event)
                if record.session.phase == DONE and cursor >= len(record.wire_events()):
                    break
                await asyncio.sleep(_WS_POLL_SECONDS)
        except (WebSocketDisconnect, RuntimeError):
            return
        await websocket.close()

    # Serve the built browser client at / when a bundle is around.  API
    # routes are registered first, so they keep priority over the mount.
    bundle = Path(
        ui_dir
        or os.environ.get(UI_DIR_ENV)
        or Path(__file__).resolve().parents[2] / "frontend" / "dist"
    )
    if bundle.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=bundle, html=True), name="ui")

    return app
