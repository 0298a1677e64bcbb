"""Wire-protocol clients for out-of-process scorer servers.

Protocol (UTF-8 JSON over HTTP):
    GET  /info   -> {"dim": D, "model": str}
    POST /embed  {"texts": [...]}             -> {"vectors": [[...], ...]}
    POST /nli    {"pairs": [[premise, hyp]]}  -> {"probs": [[c, e, n], ...]}

Rows from /embed must be unit-norm of length D; rows from /nli must sum to
1 +- 1e-6. Status 503 (and any transport failure) means ProviderUnavailable.
"""

from __future__ import annotations

import threading

import requests

from .errors import MalformedResponse, ProviderUnavailable
from .scoring import Embedding, EmbeddingStsProvider, NliVerdict, l2_norm

NORM_TOLERANCE = 1e-3
PROB_SUM_TOLERANCE = 1e-6


class _WireClient:
    def __init__(
        self,
        base_url: str,
        *,
        timeout: float = 30.0,
        session: requests.Session | None = None,
        max_in_flight: int = 4,
    ):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._session = session or requests.Session()
        self._slots = threading.Semaphore(max_in_flight)
        self._info: dict | None = None

    def _request(self, method: str, path: str, payload: dict | None = None) -> dict:
        url = f"{self.base_url}{path}"
        with self._slots:
            try:
                if method == "GET":
                    resp = self._session.get(url, timeout=self.timeout)
                else:
                    resp = self._session.post(url, json=payload, timeout=self.timeout)
            except requests.RequestException as exc:
                raise ProviderUnavailable(f"{url} unreachable: {exc}") from exc
        if resp.status_code == 503:
            raise ProviderUnavailable(f"{url} answered 503")
        if resp.status_code != 200:
            raise MalformedResponse(f"{url} answered {resp.status_code}")
        try:
            body = resp.json()
        except ValueError as exc:
            raise MalformedResponse(f"{url} returned non-JSON body") from exc
        if not isinstance(body, dict):
            raise MalformedResponse(f"{url} returned a non-object body")
        return body

    def info(self) -> dict:
        if self._info is None:
            body = self._request("GET", "/info")
            dim = body.get("dim")
            if not isinstance(dim, int) or dim < 1:
                raise MalformedResponse(f"/info dim {dim!r} invalid")
            if not isinstance(body.get("model"), str):
                raise MalformedResponse("/info missing model name")
            self._info = body
        return self._info


class RemoteStsProvider(EmbeddingStsProvider):
    """Embeddings fetched from a scorer server; vectors are validated, never
    renormalized (a bad norm is a provider bug, surfaced as an error)."""

    def __init__(self, base_url: str, **kwargs):
        self._client = _WireClient(base_url, **kwargs)

    @property
    def dim(self) -> int:
        return self._client.info()["dim"]

    def embed(self, texts) -> list[Embedding]:
        if not texts:
            raise ValueError("texts must be non-empty")
        dim = self.dim
        body = self._client._request("POST", "/embed", {"texts": list(texts)})
        vectors = body.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise MalformedResponse(f"/embed returned {len(vectors or [])} rows for {len(texts)} texts")
        out = []
        for row in vectors:
            if not isinstance(row, list) or len(row) != dim:
                raise MalformedResponse(f"/embed row length != dim {dim}")
            values = tuple(float(v) for v in row)
            norm = l2_norm(values)
            if abs(norm - 1.0) > NORM_TOLERANCE:
                raise MalformedResponse(f"/embed row norm {norm} violates unit-norm contract")
            out.append(Embedding(values=values))
        return out


class RemoteNliProvider:
    """Verdicts fetched from a scorer server.

    Rows are checked against the wire tolerance (sum 1 +- 1e-6, entries in
    [0, 1]) and then normalized exactly so the verdict type invariant holds.
    """

    def __init__(self, base_url: str, **kwargs):
        self._client = _WireClient(base_url, **kwargs)

    def verdicts(self, pairs: list[tuple[str, str]]) -> list[NliVerdict]:
        if not pairs:
            raise ValueError("pairs must be non-empty")
        body = self._client._request("POST", "/nli", {"pairs": [list(p) for p in pairs]})
        probs = body.get("probs")
        if not isinstance(probs, list) or len(probs) != len(pairs):
            raise MalformedResponse(f"/nli returned {len(probs or [])} rows for {len(pairs)} pairs")
        out = []
        for row in probs:
            if not isinstance(row, list) or len(row) != 3:
                raise MalformedResponse("/nli rows must hold three probabilities")
            c, e, n = (float(v) for v in row)
            total = c + e + n
            if abs(total - 1.0) > PROB_SUM_TOLERANCE or min(c, e, n) < 0:
                raise MalformedResponse(f"/nli row {row} is not a probability triple")
            out.append(NliVerdict(c=c / total, e=e / total, n=n / total))
        return out

    def verdict(self, premise: str, hypothesis: str) -> NliVerdict:
        return self.verdicts([(premise, hypothesis)])[0]


def probe_endpoint(base_url: str, timeout: float = 5.0) -> bool:
    """True when the endpoint answers /info with a valid payload."""
    try:
        _WireClient(base_url, timeout=timeout).info()
        return True
    except (ProviderUnavailable, MalformedResponse):
        return False
