"""Long-running HTTP service: claim evaluation, ingestion, stats and health.

Claim requests run concurrently against the store's reader contract;
ingestion serializes behind the single-writer rule and answers 409 while
another write is in flight. When remote providers are configured but down,
the service either answers 503 (strict mode) or degrades to the reference
providers and flags the response.
"""

from __future__ import annotations

import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from starlette.concurrency import run_in_threadpool

from .errors import ClaimGraphError
from .ingest import SegmentationConfig, ingest_lines
from .linking import Gazetteer, LinkerConfig, WikifierClient
from .pipeline import (
    STATUS_PROVIDER_UNAVAILABLE,
    EvaluationLimits,
    evaluate_claim,
)
from .remote import RemoteNliProvider, RemoteStsProvider, probe_endpoint
from .scoring import ReferenceNliProvider, ReferenceStsProvider
from .store import GraphStore

logger = logging.getLogger(__name__)


class JsonLineFormatter(logging.Formatter):
    """One JSON object per log line."""

    def format(self, record: logging.LogRecord) -> str:
        payload = {
            "ts": self.formatTime(record, "%Y-%m-%dT%H:%M:%S%z"),
            "level": record.levelname.lower(),
            "logger": record.name,
            "msg": record.getMessage(),
        }
        fields = getattr(record, "fields", None)
        if isinstance(fields, dict):
            payload.update(fields)
        if record.exc_info:
            payload["exc"] = self.formatException(record.exc_info)
        return json.dumps(payload, ensure_ascii=False)


def configure_structured_logging(level: int = logging.INFO):
    handler = logging.StreamHandler()
    handler.setFormatter(JsonLineFormatter())
    root = logging.getLogger()
    root.handlers = [handler]
    root.setLevel(level)


@dataclass
class ServiceConfig:
    listen: str = "127.0.0.1:8080"
    store_path: str | None = None
    gazetteer_path: str | None = None
    linker: str = "gazetteer"
    wikifier_endpoint: str | None = None
    wikifier_key: str | None = None
    threshold: float = 0.80
    language: str = "el"
    sts_provider: str = "reference"
    nli_provider: str = "reference"
    sts_endpoint: str | None = None
    nli_endpoint: str | None = None
    strict_providers: bool = False
    limits: EvaluationLimits = field(default_factory=EvaluationLimits)
    min_section_chars: int = 3

    @classmethod
    def from_args(cls, args) -> "ServiceConfig":
        import os

        from .cli import ENV_WIKIFIER_KEY

        cfg = cls(
            listen=args.listen,
            store_path=args.store,
            gazetteer_path=args.gazetteer,
            linker=args.linker,
            wikifier_endpoint=args.endpoint,
            wikifier_key=os.environ.get(ENV_WIKIFIER_KEY),
            threshold=args.threshold,
            language=args.language,
            sts_provider=args.sts_provider,
            nli_provider=args.nli_provider,
            sts_endpoint=args.sts_endpoint,
            nli_endpoint=args.nli_endpoint,
            strict_providers=args.strict_providers,
        )
        if args.config:
            overrides = json.loads(Path(args.config).read_text(encoding="utf-8"))
            for key, value in overrides.items():
                if not hasattr(cfg, key):
                    raise ClaimGraphError(f"unknown service config key {key!r}")
                setattr(cfg, key, value)
        return cfg


class ServiceState:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.store: GraphStore | None = None
        self.linker = None
        self.reference_sts = ReferenceStsProvider()
        self.reference_nli = ReferenceNliProvider()

    def load(self):
        cfg = self.config
        if cfg.store_path and Path(cfg.store_path).exists():
            self.store = GraphStore.load_snapshot(cfg.store_path)
        else:
            self.store = GraphStore()
        if cfg.linker == "wikifier":
            if not cfg.wikifier_endpoint:
                raise ClaimGraphError("wikifier linker configured without an endpoint")
            self.linker = WikifierClient(cfg.wikifier_endpoint, api_key=cfg.wikifier_key)
        elif cfg.gazetteer_path:
            self.linker = Gazetteer.load(cfg.gazetteer_path)
        else:
            self.linker = Gazetteer({})

    @property
    def linker_cfg(self) -> LinkerConfig:
        return LinkerConfig(threshold=self.config.threshold, language=self.config.language)

    def providers(self):
        cfg = self.config
        sts = (
            RemoteStsProvider(cfg.sts_endpoint)
            if cfg.sts_provider == "remote" and cfg.sts_endpoint
            else self.reference_sts
        )
        nli = (
            RemoteNliProvider(cfg.nli_endpoint)
            if cfg.nli_provider == "remote" and cfg.nli_endpoint
            else self.reference_nli
        )
        return sts, nli

    def remote_endpoints(self) -> list[str]:
        cfg = self.config
        endpoints = []
        if cfg.sts_provider == "remote" and cfg.sts_endpoint:
            endpoints.append(cfg.sts_endpoint)
        if cfg.nli_provider == "remote" and cfg.nli_endpoint:
            endpoints.append(cfg.nli_endpoint)
        return endpoints


def create_app(config: ServiceConfig, *, defer_load: bool = False) -> FastAPI:
    app = FastAPI(title="claimgraph", version="0.1.0")
    state = ServiceState(config)
    app.state.engine = state
    if not defer_load:
        state.load()

    @app.get("/healthz")
    def healthz():
        if state.store is None:
            return JSONResponse({"status": "unavailable", "reason": "store not loaded"}, 503)
        for endpoint in state.remote_endpoints():
            if not probe_endpoint(endpoint):
                return JSONResponse(
                    {"status": "unavailable", "reason": f"provider {endpoint} unreachable"}, 503
                )
        return {"status": "ok"}

    @app.get("/stats")
    def stats():
        if state.store is None:
            return JSONResponse({"error": "store not loaded"}, 503)
        return state.store.stats().as_dict()

    @app.post("/claims")
    async def claims(request: Request):
        if state.store is None:
            return JSONResponse({"error": "store not loaded"}, 503)
        try:
            body = json.loads(await request.body())
        except (ValueError, UnicodeDecodeError):
            return JSONResponse({"error": "body must be JSON"}, 400)
        claim = body.get("claim") if isinstance(body, dict) else None
        if not isinstance(claim, str) or not claim.strip():
            return JSONResponse({"error": "field 'claim' must be a non-empty string"}, 400)

        def evaluate(sts, nli):
            return evaluate_claim(
                claim,
                state.store,
                state.linker,
                sts,
                nli,
                linker_cfg=state.linker_cfg,
                limits=config.limits,
            )

        sts, nli = state.providers()
        evaluation = await run_in_threadpool(evaluate, sts, nli)
        degraded = False
        if evaluation.status == STATUS_PROVIDER_UNAVAILABLE and state.remote_endpoints():
            if config.strict_providers:
                return JSONResponse({"error": "scoring provider unavailable"}, 503)
            evaluation = await run_in_threadpool(
                evaluate, state.reference_sts, state.reference_nli
            )
            degraded = True
        logger.info(
            "claim evaluated",
            extra={"fields": {"status": evaluation.status, "degraded": degraded}},
        )
        payload = evaluation.as_dict()
        payload["degraded_providers"] = degraded
        return payload

    @app.post("/ingest")
    async def ingest(request: Request):
        if state.store is None:
            return JSONResponse({"error": "store not loaded"}, 503)
        raw = await request.body()
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError:
            return JSONResponse({"error": "body must be UTF-8 text"}, 400)

        def work():
            # the whole ingest holds the write lock from one worker thread so
            # a concurrent ingest sees a clean 409 instead of interleaving
            release = state.store.try_exclusive_writer()
            if release is None:
                return None
            try:
                return ingest_lines(
                    io.StringIO(text),
                    state.store,
                    SegmentationConfig(min_section_chars=config.min_section_chars),
                )
            finally:
                release()

        stats = await run_in_threadpool(work)
        if stats is None:
            return JSONResponse({"error": "another ingestion is in progress"}, 409)
        if config.store_path:
            await run_in_threadpool(state.store.save_snapshot, config.store_path)
        return stats.as_dict()

    return app
