"""Live session service: HTTP API plus a server-sent event stream per
session, so a browser (or any client) can run human-in-the-loop sessions.

The simulated clock advances at `speedup` while nothing is pending; the
moment a recommendation is issued the clock parks and the response window
runs in real wall time (it measures human attention), with countdown ticks
pushed every second. Responses arrive over plain POSTs; late or duplicate
ones are rejected so the engine's ignored path stays authoritative. Every
log event is streamed with its sequence number as the SSE id, and a client
reconnecting with Last-Event-ID resumes exactly where it left off.
"""

from __future__ import annotations

import json
import logging
import queue
import threading
import time
from pathlib import Path

from fastapi import FastAPI, Header, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import StreamingResponse
from pydantic import BaseModel

from .config import ConfigError, EngineConfig
from .engine import StaleResponseError
from .explain import MODES
from .model import EventLog, canonical_json
from .sim import (
    ScenarioError,
    ScenarioSpec,
    Session,
    load_bundled_scenario,
    schedule_kb,
    summarize_log,
    report_metrics,
)
from .sim.environment import STEP_S

logger = logging.getLogger("wattwise.service")

END_SENTINEL = None


class LiveSession:
    """One running (or loaded) session plus its subscribers and clock
    thread."""

    def __init__(self, session: Session, speedup: float, log_path: Path | None,
                 status: str = "running"):
        self.session = session
        self.speedup = speedup
        self.status = status
        self.lock = threading.RLock()
        self.subscribers: list[queue.Queue] = []
        self.issued_wall_at: float | None = None
        self._log_fh = None
        if log_path is not None:
            fresh = status == "running"
            self._log_fh = open(log_path, "a" if not fresh else "w", encoding="utf-8")
        session.listeners.append(self._on_event)
        self._thread: threading.Thread | None = None

    # -- event fanout ---------------------------------------------------------

    def _on_event(self, ev) -> None:
        if self._log_fh is not None:
            self._log_fh.write(canonical_json(ev.to_json()) + "\n")
            self._log_fh.flush()
        frame = _sse_frame(ev.kind, ev.to_json(), event_id=ev.seq)
        for q in list(self.subscribers):
            q.put(frame)

    def _broadcast_ephemeral(self, kind: str, data: dict) -> None:
        frame = _sse_frame(kind, data)
        for q in list(self.subscribers):
            q.put(frame)

    def _broadcast_end(self) -> None:
        for q in list(self.subscribers):
            q.put(END_SENTINEL)

    # -- clock thread ----------------------------------------------------------

    def start(self) -> None:
        with self.lock:
            self.session.start()
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def _run(self) -> None:
        try:
            session = self.session
            t = session.spec.session_start
            end = session.spec.session_end
            while t <= end and self.status == "running":
                with self.lock:
                    rec = session.step_minute(t)
                if rec is not None:
                    self._await_response(rec)
                t += STEP_S
                time.sleep(STEP_S / self.speedup)
            with self.lock:
                if self.status == "running":
                    session.finish()
                    self.status = "finished"
        except Exception:
            logger.exception("session %s crashed", self.session.session_id)
            self.status = "failed"
        finally:
            self._broadcast_end()
            if self._log_fh is not None:
                self._log_fh.close()
                self._log_fh = None

    def _await_response(self, rec) -> None:
        """Park the simulated clock and run the response window in wall time,
        pushing a countdown tick every second."""
        window_s = self.session.config.response_window_s
        with self.lock:
            self.issued_wall_at = time.monotonic()
        deadline_wall = self.issued_wall_at + window_s
        while True:
            with self.lock:
                pending = self.session.engine.pending
            if pending is None or pending.id != rec.id:
                return
            remaining = deadline_wall - time.monotonic()
            if remaining <= 0:
                break
            self._broadcast_ephemeral("tick", {"rec_id": rec.id,
                                               "remaining_s": int(remaining + 0.5)})
            time.sleep(min(1.0, remaining))
        with self.lock:
            pending = self.session.engine.pending
            if pending is not None and pending.id == rec.id:
                self.session.respond(rec.id, "ignore", rec.deadline)
            self.issued_wall_at = None

    # -- commands ---------------------------------------------------------------

    def respond(self, rec_id: str, response: str) -> dict:
        with self.lock:
            pending = self.session.engine.pending
            if pending is None or pending.id != rec_id:
                known = any(
                    ev.kind == "recommendation_issued" and ev.data["rec"]["id"] == rec_id
                    for ev in self.session.log.events)
                if known:
                    raise HTTPException(status_code=409, detail="already resolved")
                raise HTTPException(status_code=404, detail="unknown recommendation")
            elapsed = 0
            if self.issued_wall_at is not None:
                elapsed = int(time.monotonic() - self.issued_wall_at)
            try:
                outcome = self.session.respond(rec_id, response, pending.created_at + elapsed)
            except StaleResponseError as exc:
                raise HTTPException(status_code=409, detail="window elapsed") from exc
            self.issued_wall_at = None
            return {"recommendation_id": rec_id, "lifecycle": outcome.recommendation.lifecycle}

    def handle(self) -> dict:
        with self.lock:
            s = self.session
            return {
                "session_id": s.session_id,
                "mode": s.mode,
                "spec": s.spec.name,
                "status": self.status,
                "sim_time": s.t,
                "seed": s.seed,
                "speedup": self.speedup,
                "pending": s.engine.pending.to_json() if s.engine.pending else None,
                "counts": dict(s.counts),
                "events": len(s.log),
            }

    def snapshot_events(self, after: int):
        """Atomically grab the frames missed since `after` and subscribe for
        live ones (no queue when the session is already over)."""
        with self.lock:
            frames = [_sse_frame(ev.kind, ev.to_json(), event_id=ev.seq)
                      for ev in self.session.log.events if ev.seq > after]
            q: queue.Queue | None = None
            if self.status == "running":
                q = queue.Queue()
                self.subscribers.append(q)
            return frames, q


def _sse_frame(event: str, data: dict, event_id: int | None = None) -> str:
    lines = []
    if event_id is not None:
        lines.append(f"id: {event_id}")
    lines.append(f"event: {event}")
    lines.append(f"data: {json.dumps(data, sort_keys=True)}")
    return "\n".join(lines) + "\n\n"


class CreateSession(BaseModel):
    mode: str
    spec: str | dict = "office-week"
    seed: int = 1
    speedup: float = 60.0
    config: dict | None = None


def create_app(data_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="wattwise session service")
    # the browser client is served as static files from anywhere
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    sessions: dict[str, LiveSession] = {}
    data_path = Path(data_dir) if data_dir else None
    if data_path is not None:
        data_path.mkdir(parents=True, exist_ok=True)
        for log_file in sorted(data_path.glob("*.jsonl")):
            try:
                log = EventLog.read(log_file)
                replayed = Session.replay(log.events)
                stale = replayed.engine.pending
                if stale is not None:
                    # The response window died with the old process: the
                    # ignored path is authoritative, on disk too.
                    before = len(replayed.log)
                    replayed.respond(stale.id, "ignore", stale.deadline)
                    with open(log_file, "a", encoding="utf-8") as fh:
                        for ev in replayed.log.events[before:]:
                            fh.write(canonical_json(ev.to_json()) + "\n")
                status = "finished" if replayed.finished else "paused"
                live = LiveSession(replayed, replayed.speedup, None, status=status)
                sessions[replayed.session_id] = live
                logger.info("loaded session %s (%s) from %s",
                            replayed.session_id, status, log_file.name)
            except Exception:
                logger.exception("could not load session log %s", log_file)

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSession):
        if body.mode not in MODES:
            raise HTTPException(status_code=400, detail=f"invalid mode {body.mode!r}")
        try:
            if isinstance(body.spec, str):
                spec = load_bundled_scenario(body.spec)
                if data_path is not None:
                    candidate = data_path / "specs" / f"{body.spec}.json"
                    if candidate.exists():
                        spec = ScenarioSpec.load(candidate)
            else:
                spec = ScenarioSpec.from_json(body.spec)
        except ScenarioError as exc:
            if isinstance(body.spec, str) and "unknown bundled scenario" in str(exc):
                raise HTTPException(status_code=404, detail=str(exc)) from exc
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        try:
            config = spec.engine_config()
            if body.config:
                config = EngineConfig.from_json({**config.to_json(), **body.config})
            config.validate()
        except ConfigError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        kb = schedule_kb(spec, config)
        session_id = f"live-{body.seed:x}-{len(sessions)}"
        session = Session(spec, kb, body.mode, body.seed, config=config,
                          session_id=session_id, live=True, speedup=body.speedup)
        log_path = data_path / f"{session_id}.jsonl" if data_path else None
        live = LiveSession(session, body.speedup, log_path)
        sessions[session_id] = live
        live.start()
        return live.handle()

    def _get(session_id: str) -> LiveSession:
        live = sessions.get(session_id)
        if live is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return live

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return _get(session_id).handle()

    @app.get("/sessions/{session_id}/events")
    def stream_events(session_id: str, after: int = 0,
                      last_event_id: str | None = Header(default=None)):
        live = _get(session_id)
        if last_event_id:
            try:
                after = max(after, int(last_event_id))
            except ValueError:
                pass
        frames, q = live.snapshot_events(after)

        def gen():
            yield ": wattwise event stream\n\n"
            for frame in frames:
                yield frame
            if q is None:
                yield _sse_frame("end", {"status": live.status})
                return
            while True:
                try:
                    item = q.get(timeout=30.0)
                except queue.Empty:
                    yield ": keepalive\n\n"
                    continue
                if item is END_SENTINEL:
                    yield _sse_frame("end", {"status": live.status})
                    return
                yield item

        return StreamingResponse(gen(), media_type="text/event-stream",
                                 headers={"Cache-Control": "no-cache"})

    @app.post("/sessions/{session_id}/recommendations/{rec_id}/response")
    def post_response(session_id: str, rec_id: str, body: dict):
        response = body.get("response")
        if response not in ("accept", "reject"):
            raise HTTPException(status_code=400, detail="response must be accept or reject")
        return _get(session_id).respond(rec_id, response)

    @app.get("/sessions/{session_id}/report")
    def session_report(session_id: str):
        live = _get(session_id)
        with live.lock:
            events = list(live.session.log.events)
        if not events:
            raise HTTPException(status_code=409, detail="session has no events yet")
        return report_metrics([summarize_log(events)])

    @app.get("/healthz")
    def health():
        return {"status": "ok", "sessions": len(sessions)}

    return app
