"""JSON-over-HTTP service for scripts and the investigator UI.

Programs are uploaded immutably and content-addressed, so ledger provenance
stays tied to exact program text. Queries run as asynchronous jobs with
polling; each session admits one in-flight query (409 otherwise). A missing
or unspawnable solver yields 503 on the query path.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import uuid
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Optional
from urllib.parse import parse_qs, urlparse

from .errors import (
    DepositionError,
    SolverCrash,
    SolverUnavailable,
)
from .model import state_at, value_to_json
from .session import (
    Session,
    derive_basis,
    derive_basis_keyframe,
    open_session,
    pose,
    save_session,
    session_to_json,
)
from .solver import SolverConfig, SolverRunner


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8750
    solver: SolverConfig = field(default_factory=SolverConfig.from_env)
    session_dir: Optional[str] = None


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


@dataclass
class _Job:
    job_id: str
    session_id: str
    status: str = "pending"  # pending | done | error
    response: Optional[dict[str, Any]] = None
    facts_added: list[dict[str, Any]] = field(default_factory=list)
    error: Optional[str] = None


class ServiceState:
    """Shared stores plus the per-session single-writer locks."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.runner = SolverRunner(config.solver)
        self.programs: dict[str, dict[str, str]] = {}
        self.traces: dict[str, dict[str, Any]] = {}
        self.sessions: dict[str, Session] = {}
        self.session_busy: dict[str, threading.Lock] = {}
        self.jobs: dict[str, _Job] = {}
        self.lock = threading.Lock()

    # --- programs

    def add_program(self, name: str, text: str) -> str:
        pid = hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]
        from .lang.parse import parse_program

        parse_program(text)  # typecheck before accepting
        with self.lock:
            self.programs.setdefault(pid, {"id": pid, "name": name, "text": text})
        return pid

    def program(self, pid: str) -> dict[str, str]:
        try:
            return self.programs[pid]
        except KeyError:
            raise ApiError(404, f"no program {pid}") from None

    # --- traces

    def add_trace(self, program_id: str, name: str, log: str) -> str:
        program_entry = self.program(program_id)
        from .lang.parse import parse_program
        from .model import parse_trace_log

        program = parse_program(program_entry["text"])
        trace = parse_trace_log(log, program.catalog)
        tid = hashlib.sha256(
            (program_id + log).encode("utf-8")
        ).hexdigest()[:12]
        with self.lock:
            self.traces.setdefault(tid, {
                "id": tid, "name": name, "program_id": program_id,
                "log": log, "length": len(trace),
            })
        return tid

    def trace(self, tid: str) -> dict[str, Any]:
        try:
            return self.traces[tid]
        except KeyError:
            raise ApiError(404, f"no trace {tid}") from None

    # --- sessions

    def create_session(self, program_id: str, trace_id: str, name: str) -> str:
        program_entry = self.program(program_id)
        trace_entry = self.trace(trace_id)
        if trace_entry["program_id"] != program_id:
            raise ApiError(400, "trace was uploaded for a different program")
        sid = uuid.uuid4().hex[:12]
        session = open_session(program_entry["text"], trace_entry["log"], name)
        with self.lock:
            self.sessions[sid] = session
            self.session_busy[sid] = threading.Lock()
        return sid

    def session(self, sid: str) -> Session:
        try:
            return self.sessions[sid]
        except KeyError:
            raise ApiError(404, f"no session {sid}") from None

    # --- query jobs

    def start_query(self, sid: str, doc: dict[str, Any]) -> str:
        session = self.session(sid)
        busy = self.session_busy[sid]
        if not busy.acquire(blocking=False):
            raise ApiError(409, "a query is already in flight for this session")
        job = _Job(job_id=uuid.uuid4().hex[:12], session_id=sid)
        with self.lock:
            self.jobs[job.job_id] = job
        thread = threading.Thread(
            target=self._run_job, args=(job, session, doc, busy), daemon=True
        )
        thread.start()
        return job.job_id

    def _run_job(self, job: _Job, session: Session, doc: dict[str, Any],
                 busy: threading.Lock) -> None:
        try:
            response, added = pose(session, doc, self.runner)
            job.response = response.to_json()
            job.facts_added = [f.to_json() for f in added]
            job.status = "done"
            self._autosave(job.session_id, session)
        except (SolverUnavailable, SolverCrash) as exc:
            job.status = "error"
            job.error = f"solver unavailable: {exc}"
        except DepositionError as exc:
            job.status = "error"
            job.error = f"{type(exc).__name__}: {exc}"
        except Exception as exc:
            job.status = "error"
            job.error = f"internal: {exc}"
        finally:
            busy.release()

    def _autosave(self, sid: str, session: Session) -> None:
        if not self.config.session_dir:
            return
        os.makedirs(self.config.session_dir, exist_ok=True)
        save_session(
            session, os.path.join(self.config.session_dir, f"{sid}.json")
        )

    def job(self, job_id: str) -> _Job:
        try:
            return self.jobs[job_id]
        except KeyError:
            raise ApiError(404, f"no job {job_id}") from None

    def close(self) -> None:
        self.runner.close()


# --- routing --------------------------------------------------------------------------

_ROUTES: list[tuple[str, re.Pattern, str]] = [
    ("GET", re.compile(r"^/api/health$"), "health"),
    ("GET", re.compile(r"^/api/programs$"), "list_programs"),
    ("POST", re.compile(r"^/api/programs$"), "upload_program"),
    ("GET", re.compile(r"^/api/programs/(?P<pid>[0-9a-f]+)$"), "get_program"),
    ("POST", re.compile(r"^/api/traces$"), "upload_trace"),
    ("GET", re.compile(r"^/api/traces/(?P<tid>[0-9a-f]+)$"), "get_trace"),
    ("GET", re.compile(r"^/api/traces/(?P<tid>[0-9a-f]+)/window$"), "trace_window"),
    ("GET", re.compile(r"^/api/sessions$"), "list_sessions"),
    ("POST", re.compile(r"^/api/sessions$"), "create_session"),
    ("GET", re.compile(r"^/api/sessions/(?P<sid>[0-9a-f]+)$"), "get_session"),
    ("POST", re.compile(r"^/api/sessions/(?P<sid>[0-9a-f]+)/queries$"), "post_query"),
    ("GET", re.compile(r"^/api/sessions/(?P<sid>[0-9a-f]+)/ledger$"), "get_ledger"),
    ("GET", re.compile(r"^/api/sessions/(?P<sid>[0-9a-f]+)/history$"), "get_history"),
    ("POST",
     re.compile(r"^/api/sessions/(?P<sid>[0-9a-f]+)/facts/(?P<fid>\d+)/basis$"),
     "fact_basis"),
    ("GET",
     re.compile(r"^/api/sessions/(?P<sid>[0-9a-f]+)/keyframes/(?P<t>\d+)/basis$"),
     "keyframe_basis"),
    ("GET", re.compile(r"^/api/sessions/(?P<sid>[0-9a-f]+)/download$"), "download"),
    ("GET", re.compile(r"^/api/jobs/(?P<job_id>[0-9a-f]+)$"), "get_job"),
]


class Api:
    def __init__(self, state: ServiceState):
        self.state = state

    # --- handlers (named in _ROUTES)

    def health(self, params, body) -> dict[str, Any]:
        return {"ok": True}

    def list_programs(self, params, body) -> dict[str, Any]:
        return {
            "programs": [
                {"id": p["id"], "name": p["name"]}
                for p in self.state.programs.values()
            ]
        }

    def upload_program(self, params, body) -> dict[str, Any]:
        name = body.get("name", "program")
        text = body.get("text")
        if not isinstance(text, str) or not text.strip():
            raise ApiError(400, "program upload needs 'text'")
        pid = self.state.add_program(name, text)
        return {"id": pid}

    def get_program(self, params, body) -> dict[str, Any]:
        return self.state.program(params["pid"])

    def upload_trace(self, params, body) -> dict[str, Any]:
        program_id = body.get("program_id")
        log = body.get("log")
        if not isinstance(program_id, str) or not isinstance(log, str):
            raise ApiError(400, "trace upload needs 'program_id' and 'log'")
        tid = self.state.add_trace(program_id, body.get("name", "trace"), log)
        return {"id": tid}

    def get_trace(self, params, body) -> dict[str, Any]:
        entry = self.state.trace(params["tid"])
        return {k: entry[k] for k in ("id", "name", "program_id", "length")}

    def trace_window(self, params, body) -> dict[str, Any]:
        entry = self.state.trace(params["tid"])
        from .lang.parse import parse_program
        from .model import parse_trace_log

        program = parse_program(self.state.program(entry["program_id"])["text"])
        trace = parse_trace_log(entry["log"], program.catalog)
        start = int(params.get("start", ["0"])[0])
        end_default = len(trace)
        end = int(params.get("end", [str(end_default)])[0])
        if not (0 <= start < len(trace)) or not (start < end <= len(trace)):
            raise ApiError(400, f"window [{start}, {end}) outside trace")
        steps = []
        for t in range(start, end):
            st = state_at(trace, t)
            steps.append({
                "t": t,
                "vars": {
                    n: value_to_json(program.catalog.decl(n).domain, st[n])
                    for n in program.catalog.names()
                },
            })
        classes = {
            n: program.catalog.decl(n).klass.value
            for n in program.catalog.names()
        }
        return {"steps": steps, "classes": classes, "length": len(trace)}

    def list_sessions(self, params, body) -> dict[str, Any]:
        return {
            "sessions": [
                {"id": sid, "name": s.name, "queries": len(s.records),
                 "facts": len(s.facts)}
                for sid, s in self.state.sessions.items()
            ]
        }

    def create_session(self, params, body) -> dict[str, Any]:
        program_id = body.get("program_id")
        trace_id = body.get("trace_id")
        if not isinstance(program_id, str) or not isinstance(trace_id, str):
            raise ApiError(400, "session needs 'program_id' and 'trace_id'")
        sid = self.state.create_session(
            program_id, trace_id, body.get("name", "session")
        )
        return {"id": sid}

    def get_session(self, params, body) -> dict[str, Any]:
        sid = params["sid"]
        s = self.state.session(sid)
        return {
            "id": sid,
            "name": s.name,
            "program_hash": s.hash,
            "trace_length": len(s.trace),
            "queries": len(s.records),
            "facts": len(s.facts),
        }

    def post_query(self, params, body) -> dict[str, Any]:
        if not isinstance(body, dict) or "mode" not in body:
            raise ApiError(400, "query document needs a 'mode'")
        job_id = self.state.start_query(params["sid"], body)
        return {"job_id": job_id, "poll": f"/api/jobs/{job_id}"}

    def get_job(self, params, body) -> dict[str, Any]:
        job = self.state.job(params["job_id"])
        doc: dict[str, Any] = {"job_id": job.job_id, "status": job.status}
        if job.status == "done":
            doc["response"] = job.response
            doc["facts_added"] = job.facts_added
        elif job.status == "error":
            doc["error"] = job.error
            if job.error and job.error.startswith("solver unavailable"):
                raise ApiError(503, job.error)
        return doc

    def get_ledger(self, params, body) -> dict[str, Any]:
        s = self.state.session(params["sid"])
        return {"facts": [f.to_json() for f in s.facts]}

    def get_history(self, params, body) -> dict[str, Any]:
        s = self.state.session(params["sid"])
        return {"queries": [r.to_json() for r in s.records]}

    def fact_basis(self, params, body) -> dict[str, Any]:
        s = self.state.session(params["sid"])
        try:
            fact = s.fact(int(params["fid"]))
        except KeyError:
            raise ApiError(404, f"no fact {params['fid']}") from None
        from .errors import NoWitness

        try:
            constraints = derive_basis(s, fact)
        except NoWitness as exc:
            raise ApiError(400, str(exc)) from None
        return {"constraints": constraints}

    def keyframe_basis(self, params, body) -> dict[str, Any]:
        s = self.state.session(params["sid"])
        t = int(params["t"])
        if not 0 <= t < len(s.trace):
            raise ApiError(400, f"keyframe {t} outside trace")
        return {"constraints": derive_basis_keyframe(s, t)}

    def download(self, params, body) -> dict[str, Any]:
        s = self.state.session(params["sid"])
        return session_to_json(s)


class _Handler(BaseHTTPRequestHandler):
    api: Api  # injected by serve()

    def log_message(self, fmt: str, *args) -> None:  # quiet by default
        pass

    def _respond(self, status: int, doc: dict[str, Any]) -> None:
        payload = json.dumps(doc).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(payload)

    def _handle(self, method: str) -> None:
        parsed = urlparse(self.path)
        params: dict[str, Any] = {
            k: v for k, v in parse_qs(parsed.query).items()
        }
        body: dict[str, Any] = {}
        if method == "POST":
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b"{}"
            try:
                body = json.loads(raw or b"{}")
            except json.JSONDecodeError:
                self._respond(400, {"error": "request body is not JSON"})
                return
        for route_method, pattern, name in _ROUTES:
            if route_method != method:
                continue
            m = pattern.match(parsed.path)
            if not m:
                continue
            params.update(m.groupdict())
            handler = getattr(self.api, name)
            try:
                doc = handler(params, body)
            except ApiError as exc:
                self._respond(exc.status, {"error": str(exc)})
                return
            except SolverUnavailable as exc:
                self._respond(503, {"error": str(exc)})
                return
            except DepositionError as exc:
                self._respond(400, {"error": f"{type(exc).__name__}: {exc}"})
                return
            self._respond(200, doc)
            return
        self._respond(404, {"error": f"no route for {method} {parsed.path}"})

    def do_GET(self) -> None:
        self._handle("GET")

    def do_POST(self) -> None:
        self._handle("POST")

    def do_OPTIONS(self) -> None:
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()


def make_server(config: ServiceConfig) -> tuple[ThreadingHTTPServer, ServiceState]:
    state = ServiceState(config)
    api = Api(state)
    handler = type("BoundHandler", (_Handler,), {"api": api})
    server = ThreadingHTTPServer((config.host, config.port), handler)
    return server, state


def serve(config: ServiceConfig) -> None:
    server, state = make_server(config)
    host, port = server.server_address[:2]
    print(f"serving on http://{host}:{port}  (Ctrl-C to stop)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        state.close()
        server.server_close()
