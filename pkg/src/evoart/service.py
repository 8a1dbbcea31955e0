"""Session-oriented HTTP API for the interactive vote/evolve loop.

Every mutation is durably logged before the response goes out, so a
restarted server resumes exactly at the last committed generation, and a
ballot nonce makes vote submission exactly-once across client retries.
Errors are problem-detail documents with machine-readable codes.
"""

from __future__ import annotations

import hashlib
import json
import random
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, ConfigDict, Field

from . import analytics
from .analytics import LogRecord, SessionLog, SessionLogStore, compute_stats, stats_to_doc
from .backend import (
    BackendError,
    ImageStore,
    ProceduralBackend,
    RemoteBackend,
    build_request,
    generate_with_fallback,
    make_render_callback,
)
from .chromosome import chromosome_to_doc, to_prompt
from .genetics import (
    EvolutionState,
    Generation,
    evolve,
    export_model,
    dump_model,
    generation_to_doc,
    initial_generation,
    initial_state,
    model_from_doc,
    model_to_doc,
    sample_prompt,
    state_to_doc,
)
from .guideline import AttributeSchema, default_schema, schema_from_doc, schema_to_doc


class ApiError(Exception):
    def __init__(self, status: int, code: str, detail: str):
        super().__init__(detail)
        self.status = status
        self.code = code
        self.detail = detail

    def problem(self) -> dict:
        return {
            "type": "about:blank",
            "title": self.code.replace("_", " "),
            "status": self.status,
            "detail": self.detail,
            "code": self.code,
        }


@dataclass
class SessionConfig:
    schema: AttributeSchema
    n: int = 16
    mutation_rate: float = 0.05
    backend: str = "procedural"
    backend_params: dict = field(default_factory=dict)
    master_seed: int | None = None
    width: int = 512
    height: int = 512


@dataclass
class Session:
    id: str
    schema: AttributeSchema
    config: dict
    backend: object
    fallback: object
    render: object
    log: SessionLog
    rng: random.Random
    state: EvolutionState
    generation: Generation
    lock: threading.Lock = field(default_factory=threading.Lock)
    nonces: dict[str, int] = field(default_factory=dict)
    responses: dict[str, dict] = field(default_factory=dict)
    sample_count: int = 0
    last_used: float = field(default_factory=time.monotonic)


def _session_id(schema_doc: dict, config: dict) -> str:
    canonical = json.dumps({"schema": schema_doc, "config": config}, sort_keys=True)
    return "s" + hashlib.sha256(canonical.encode()).hexdigest()[:12]


class SessionManager:
    """All live sessions plus their on-disk transcripts and image store.

    Idle sessions are evicted from memory after `idle_ttl` seconds (default
    24 h). Eviction deletes nothing: the transcript stays on disk and the
    next access replays it transparently.
    """

    def __init__(
        self,
        root: str | Path,
        *,
        idle_ttl: float = 24 * 3600.0,
        default_backend: str = "procedural",
        default_backend_params: dict | None = None,
    ):
        self.root = Path(root)
        self.images = ImageStore(self.root / "images")
        self.logs = SessionLogStore(self.root / "sessions")
        self.live: dict[str, Session] = {}
        self.idle_ttl = idle_ttl
        self.default_backend = default_backend
        self.default_backend_params = dict(default_backend_params or {})
        self._registry_lock = threading.Lock()

    def _sweep_idle(self) -> None:
        now = time.monotonic()
        for sid in [s for s, sess in self.live.items() if now - sess.last_used > self.idle_ttl]:
            del self.live[sid]

    # -- wiring ------------------------------------------------------------

    def _make_backend(self, config: dict):
        fallback = ProceduralBackend(self.images)
        if config["backend"] == "procedural":
            return fallback, fallback
        if config["backend"] == "remote":
            params = dict(config.get("backend_params", {}))
            url = params.pop("url", None)
            if not url:
                raise ApiError(422, "invalid_config", "remote backend needs backend_params.url")
            kwargs = {
                k: params.pop(k)
                for k in ("txt2img_path", "health_path", "steps", "cfg_scale", "timeout")
                if k in params
            }
            return RemoteBackend(url, self.images, **kwargs), fallback
        raise ApiError(422, "invalid_config", f"unknown backend '{config['backend']}'")

    def _wire(self, sid: str, schema: AttributeSchema, config: dict, log: SessionLog,
              rng: random.Random, state: EvolutionState, generation: Generation) -> Session:
        backend, fallback = self._make_backend(config)
        render = make_render_callback(
            backend,
            fallback,
            schema,
            width=int(config["width"]),
            height=int(config["height"]),
            params=config.get("backend_params") or None,
        )
        return Session(
            id=sid, schema=schema, config=config, backend=backend, fallback=fallback,
            render=render, log=log, rng=rng, state=state, generation=generation,
        )

    # -- lifecycle ----------------------------------------------------------

    def create(self, cfg: SessionConfig) -> Session:
        if cfg.n < 4 or cfg.n % 2 != 0:
            raise ApiError(422, "invalid_config", "population size must be even and at least 4")
        if not (0.0 <= cfg.mutation_rate <= 1.0):
            raise ApiError(422, "invalid_config", "mutation rate must be in [0, 1]")
        master_seed = cfg.master_seed if cfg.master_seed is not None else secrets.randbits(48)
        config = {
            "n": cfg.n,
            "mutation_rate": cfg.mutation_rate,
            "backend": cfg.backend,
            "backend_params": dict(cfg.backend_params),
            "master_seed": int(master_seed),
            "width": cfg.width,
            "height": cfg.height,
            "rerender_survivors": cfg.backend != "procedural",
        }
        schema_doc = schema_to_doc(cfg.schema)
        sid = _session_id(schema_doc, config)
        with self._registry_lock:
            if sid in self.live or self.logs.exists(sid):
                raise ApiError(409, "session_exists", f"session '{sid}' already exists")
            backend, fallback = self._make_backend(config)
            health = backend.health()
            if not health.healthy:
                raise ApiError(503, "backend_unhealthy", health.reason or "backend unhealthy")
            log = SessionLog(sid, schema_doc, config)
            session = self._wire(sid, cfg.schema, config, log,
                                 random.Random(config["master_seed"]),
                                 initial_state(cfg.schema), Generation(0, ()))
            try:
                g0 = initial_generation(cfg.schema, cfg.n, session.rng, render=session.render)
            except BackendError as exc:
                raise ApiError(502, "backend_error", exc.reason)
            session.generation = g0
            stats = compute_stats(session.state, g0, cfg.schema)
            record = LogRecord(0, None, None, generation_to_doc(g0),
                               state_to_doc(session.state), stats_to_doc(stats))
            self.logs.append(log, record)
            self.live[sid] = session
            return session

    def get(self, sid: str) -> Session:
        with self._registry_lock:
            self._sweep_idle()
            if sid in self.live:
                session = self.live[sid]
                session.last_used = time.monotonic()
                return session
            if not self.logs.exists(sid):
                raise ApiError(404, "unknown_session", f"no session '{sid}'")
            session = self._restore(sid)
            self.live[sid] = session
            return session

    def _restore(self, sid: str) -> Session:
        log = self.logs.load(sid)
        schema, state, generation, rng = analytics.replay_session(log, strict=True)
        session = self._wire(sid, schema, log.config, log, rng, state, generation)
        for rec in log.records[1:]:
            if rec.nonce:
                session.nonces[rec.nonce] = rec.index
                session.responses[rec.nonce] = self._vote_response(session, rec)
        return session

    # -- reads --------------------------------------------------------------

    def population_doc(self, s: Session, g: Generation | None = None) -> dict:
        g = g or s.generation
        individuals = []
        for ind in g.individuals:
            prompt = to_prompt(ind.chromosome, s.schema)
            individuals.append(
                {
                    "id": ind.id,
                    "votes": ind.votes,
                    "image_ref": ind.image_ref,
                    "image_url": f"/images/{ind.image_ref}" if ind.image_ref else None,
                    "prompt": prompt.text,
                    "token_trace": [[g_, t] for g_, t in prompt.token_trace],
                    "seed": ind.chromosome.seed,
                    "degraded": ind.degraded,
                    "chromosome": chromosome_to_doc(ind.chromosome),
                }
            )
        return {"session": s.id, "index": g.index, "individuals": individuals}

    def stats_doc(self, s: Session) -> dict:
        series = analytics.stream(s.log)
        return {
            "session": s.id,
            "iterations": [rec.stats for rec in s.log.records],
            "stream": {v: list(xs) for v, xs in series.series.items()},
        }

    # -- mutations ----------------------------------------------------------

    def _vote_response(self, s: Session, record: LogRecord) -> dict:
        from .genetics import generation_from_doc

        return {
            "session": s.id,
            "generation": self.population_doc(s, generation_from_doc(record.generation)),
            "stats": record.stats,
        }

    def submit_votes(self, s: Session, ballot: dict[str, int], nonce: str | None) -> dict:
        if not s.lock.acquire(blocking=False):
            raise ApiError(409, "evolve_in_progress", "another ballot is being processed")
        try:
            if nonce and nonce in s.nonces:
                return s.responses[nonce]
            known = {i.id for i in s.generation.individuals}
            unknown = [i for i in ballot if i not in known]
            if unknown:
                raise ApiError(404, "unknown_individual", f"unknown individual '{unknown[0]}'")
            if any(int(v) < 0 for v in ballot.values()):
                raise ApiError(422, "invalid_ballot", "vote counts must be non-negative")
            from .genetics import apply_ballot

            voted = apply_ballot(s.generation, ballot)
            try:
                new_g, new_state = evolve(
                    s.generation,
                    ballot,
                    s.state,
                    s.schema,
                    s.rng,
                    mutation_rate=float(s.config["mutation_rate"]),
                    render=s.render,
                    rerender_survivors=bool(s.config.get("rerender_survivors", False)),
                )
            except BackendError as exc:
                raise ApiError(502, "backend_error", exc.reason)
            stats = compute_stats(new_state, voted, s.schema)
            record = LogRecord(
                new_g.index,
                {k: int(v) for k, v in ballot.items()},
                nonce,
                generation_to_doc(new_g),
                state_to_doc(new_state),
                stats_to_doc(stats),
            )
            self.logs.append(s.log, record)  # durable before the response
            s.generation, s.state = new_g, new_state
            response = self._vote_response(s, record)
            if nonce:
                s.nonces[nonce] = new_g.index
                s.responses[nonce] = response
            return response
        finally:
            s.lock.release()

    def finalize(self, s: Session) -> dict:
        if not s.state.history:
            raise ApiError(409, "no_iterations", "finalize requires at least one vote iteration")
        model = export_model(s.state, s.schema, session_id=s.id)
        return {"session": s.id, "model": model_to_doc(model), "yaml": dump_model(model)}

    def sample(self, s: Session, count: int, model_doc: dict | None) -> dict:
        if count < 0:
            raise ApiError(422, "invalid_count", "count must be non-negative")
        if model_doc is not None:
            try:
                model = model_from_doc(model_doc)
            except (KeyError, ValueError) as exc:
                raise ApiError(422, "invalid_model", str(exc))
        else:
            if not s.state.history:
                raise ApiError(409, "no_iterations", "vote at least once or upload a model")
            model = export_model(s.state, s.schema, session_id=s.id)
        rng = random.Random(f"{s.config['master_seed']}:sample:{s.sample_count}")
        s.sample_count += 1
        samples = []
        for k in range(count):
            c = sample_prompt(model, rng)
            ref, degraded = s.render(f"sample-{k}", c)
            prompt = to_prompt(c, model.schema)
            samples.append(
                {
                    "prompt": prompt.text,
                    "seed": c.seed,
                    "image_ref": ref,
                    "image_url": f"/images/{ref}" if ref else None,
                    "degraded": degraded,
                    "chromosome": chromosome_to_doc(c),
                }
            )
        return {"session": s.id, "samples": samples}


# ---------------------------------------------------------------------------
# FastAPI wiring
# ---------------------------------------------------------------------------


class CreateSessionBody(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    n: int = 16
    mutation_rate: float = 0.05
    backend: str | None = None  # None: the server's default backend
    backend_params: dict | None = None
    master_seed: int | None = None
    width: int = 512
    height: int = 512
    schema_doc: dict | None = Field(default=None, alias="schema")


class VotesBody(BaseModel):
    ballot: dict[str, int]
    nonce: str | None = None


class SampleBody(BaseModel):
    count: int = 4
    model_doc: dict | None = Field(default=None, alias="model")
    model_config = ConfigDict(populate_by_name=True, protected_namespaces=())


def create_app(
    store_dir: str | Path,
    *,
    static_dir: str | Path | None = None,
    idle_ttl: float = 24 * 3600.0,
    default_backend: str = "procedural",
    default_backend_params: dict | None = None,
) -> FastAPI:
    manager = SessionManager(
        store_dir,
        idle_ttl=idle_ttl,
        default_backend=default_backend,
        default_backend_params=default_backend_params,
    )
    app = FastAPI(title="evoart", version="0.1.0")
    app.state.manager = manager

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.problem())

    @app.get("/health")
    def health():
        probe = ProceduralBackend(manager.images).health()
        return {"status": "ok" if probe.healthy else "degraded", "backend": probe.backend}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        if body.schema_doc is not None:
            try:
                schema = schema_from_doc(body.schema_doc)
            except ValueError as exc:
                raise ApiError(422, "invalid_schema", str(exc))
        else:
            schema = default_schema()
        backend = body.backend if body.backend is not None else manager.default_backend
        params = (
            body.backend_params
            if body.backend_params is not None
            else (manager.default_backend_params if body.backend is None else {})
        )
        cfg = SessionConfig(
            schema=schema,
            n=body.n,
            mutation_rate=body.mutation_rate,
            backend=backend,
            backend_params=dict(params),
            master_seed=body.master_seed,
            width=body.width,
            height=body.height,
        )
        session = manager.create(cfg)
        return {
            "session": session.id,
            "config": session.config,
            "generation": manager.population_doc(session),
        }

    @app.get("/sessions/{sid}/population")
    def population(sid: str):
        return manager.population_doc(manager.get(sid))

    @app.post("/sessions/{sid}/votes")
    def votes(sid: str, body: VotesBody):
        return manager.submit_votes(manager.get(sid), body.ballot, body.nonce)

    @app.get("/sessions/{sid}/stats")
    def stats(sid: str):
        return manager.stats_doc(manager.get(sid))

    @app.post("/sessions/{sid}/finalize")
    def finalize(sid: str):
        return manager.finalize(manager.get(sid))

    @app.post("/sessions/{sid}/sample")
    def sample(sid: str, body: SampleBody):
        return manager.sample(manager.get(sid), body.count, body.model_doc)

    @app.get("/images/{ref_id}")
    def image(ref_id: str):
        try:
            data = manager.images.get(ref_id)
        except KeyError:
            raise ApiError(404, "unknown_image", f"no image '{ref_id}'")
        return Response(content=data, media_type=ImageStore.media_type_of(data))

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
