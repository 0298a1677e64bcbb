"""FastAPI app implementing the scorer wire protocol.

Endpoints answer 503 until the backends have loaded (models can take a
while to come up) and 413 when a request exceeds the configured size; bigger
batches than the model limit are split internally. Inference is serialized
behind a lock, while /info stays responsive throughout.
"""

from __future__ import annotations

import logging
import threading

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .backends import NLI_LABELS, load_backends, normalize_rows
from .config import ModelConfig

logger = logging.getLogger(__name__)


class ServerState:
    def __init__(self, config: ModelConfig):
        self.config = config
        self.embedder = None
        self.nli = None
        self.load_error: str | None = None
        self._inference = threading.Lock()

    @property
    def ready(self) -> bool:
        return self.embedder is not None and self.nli is not None

    def load(self):
        try:
            self.embedder, self.nli = load_backends(self.config)
        except Exception as exc:  # surface via 503, keep /info responsive
            self.load_error = f"{type(exc).__name__}: {exc}"
            logger.error("backend load failed: %s", self.load_error)

    def load_in_background(self):
        threading.Thread(target=self.load, daemon=True).start()

    def chunks(self, items: list) -> list[list]:
        size = self.config.max_batch_size
        return [items[i : i + size] for i in range(0, len(items), size)]

    def run_embed(self, texts: list[str]):
        rows = []
        with self._inference:
            for chunk in self.chunks(texts):
                rows.extend(normalize_rows(self.embedder.embed(chunk)).tolist())
        return rows

    def run_nli(self, pairs: list[tuple[str, str]]):
        rows = []
        with self._inference:
            for chunk in self.chunks(pairs):
                rows.extend(self.nli.predict(chunk).tolist())
        return rows


def create_app(config: ModelConfig | None = None, *, defer_load: bool = False) -> FastAPI:
    config = config or ModelConfig.from_env()
    app = FastAPI(title="scorer-server", version="0.1.0")
    state = ServerState(config)
    app.state.server = state
    if not defer_load:
        state.load_in_background()

    def not_ready() -> JSONResponse:
        detail = state.load_error or "model not loaded"
        return JSONResponse({"error": detail}, 503)

    @app.get("/info")
    def info():
        if not state.ready:
            return not_ready()
        return {
            "dim": state.embedder.dim,
            "model": f"{state.embedder.name} + {state.nli.name}",
            "nli_labels": NLI_LABELS,
            "max_request_items": config.max_request_items,
        }

    @app.post("/embed")
    async def embed(request: Request):
        if not state.ready:
            return not_ready()
        try:
            body = await request.json()
        except ValueError:
            return JSONResponse({"error": "body must be JSON"}, 400)
        texts = body.get("texts") if isinstance(body, dict) else None
        if not isinstance(texts, list) or not texts:
            return JSONResponse({"error": "'texts' must be a non-empty list"}, 400)
        if any(not isinstance(t, str) or not t for t in texts):
            return JSONResponse({"error": "each text must be a non-empty string"}, 400)
        if len(texts) > config.max_request_items:
            return JSONResponse(
                {"error": f"batch of {len(texts)} exceeds {config.max_request_items}"}, 413
            )
        from starlette.concurrency import run_in_threadpool

        vectors = await run_in_threadpool(state.run_embed, texts)
        return {"vectors": vectors}

    @app.post("/nli")
    async def nli(request: Request):
        if not state.ready:
            return not_ready()
        try:
            body = await request.json()
        except ValueError:
            return JSONResponse({"error": "body must be JSON"}, 400)
        pairs = body.get("pairs") if isinstance(body, dict) else None
        if not isinstance(pairs, list) or not pairs:
            return JSONResponse({"error": "'pairs' must be a non-empty list"}, 400)
        cleaned = []
        for pair in pairs:
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or any(not isinstance(t, str) or not t for t in pair)
            ):
                return JSONResponse({"error": "each pair is [premise, hypothesis]"}, 400)
            cleaned.append((pair[0], pair[1]))
        if len(cleaned) > config.max_request_items:
            return JSONResponse(
                {"error": f"batch of {len(cleaned)} exceeds {config.max_request_items}"}, 413
            )
        from starlette.concurrency import run_in_threadpool

        probs = await run_in_threadpool(state.run_nli, cleaned)
        return {"probs": probs}

    return app
