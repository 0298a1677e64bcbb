"""Live conformance checks for scorer servers implementing the wire protocol.

Returns human-readable violations instead of raising, so a test suite (or an
operator) can point this at any server and get the full list at once.
"""

from __future__ import annotations

import math

import requests

from .scoring import l2_norm

NLI_LABEL_ORDER = ["contradiction", "entailment", "neutral"]

_EMBED_SAMPLE = ["hello world", "δοκιμαστικό κείμενο", "hello world"]
_NLI_SAMPLE = [
    ["the committee approved the budget", "the budget was approved"],
    ["the committee approved the budget", "the committee approved the budget"],
]


def verify_scorer_endpoint(
    base_url: str,
    *,
    timeout: float = 30.0,
    session: requests.Session | None = None,
) -> list[str]:
    """Exercise /info, /embed and /nli; empty result means conformant."""
    base = base_url.rstrip("/")
    http = session or requests.Session()
    violations: list[str] = []

    try:
        resp = http.get(f"{base}/info", timeout=timeout)
    except requests.RequestException as exc:
        return [f"/info unreachable: {exc}"]
    if resp.status_code != 200:
        return [f"/info answered {resp.status_code}"]
    try:
        info = resp.json()
    except ValueError:
        return ["/info body is not JSON"]
    dim = info.get("dim")
    if not isinstance(dim, int) or dim < 1:
        violations.append(f"/info dim must be a positive integer, got {dim!r}")
    if not isinstance(info.get("model"), str) or not info["model"]:
        violations.append("/info must name the model")
    labels = info.get("nli_labels")
    if labels is not None and labels != NLI_LABEL_ORDER:
        violations.append(f"/info nli_labels must be {NLI_LABEL_ORDER}, got {labels!r}")
    if violations:
        return violations

    try:
        resp = http.post(f"{base}/embed", json={"texts": _EMBED_SAMPLE}, timeout=timeout)
    except requests.RequestException as exc:
        return [f"/embed unreachable: {exc}"]
    if resp.status_code != 200:
        violations.append(f"/embed answered {resp.status_code}")
    else:
        vectors = (resp.json() or {}).get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(_EMBED_SAMPLE):
            violations.append("/embed must return one vector per text")
        else:
            for i, row in enumerate(vectors):
                if not isinstance(row, list) or len(row) != dim:
                    violations.append(f"/embed row {i} length != dim {dim}")
                    continue
                norm = l2_norm(float(v) for v in row)
                if abs(norm - 1.0) > 1e-6:
                    violations.append(f"/embed row {i} norm {norm} not within 1e-6 of 1")
            if (
                len(vectors) == 3
                and isinstance(vectors[0], list)
                and vectors[0] != vectors[2]
            ):
                violations.append("/embed must be deterministic for identical texts")

    try:
        resp = http.post(f"{base}/nli", json={"pairs": _NLI_SAMPLE}, timeout=timeout)
    except requests.RequestException as exc:
        return violations + [f"/nli unreachable: {exc}"]
    if resp.status_code != 200:
        violations.append(f"/nli answered {resp.status_code}")
    else:
        probs = (resp.json() or {}).get("probs")
        if not isinstance(probs, list) or len(probs) != len(_NLI_SAMPLE):
            violations.append("/nli must return one row per pair")
        else:
            for i, row in enumerate(probs):
                if not isinstance(row, list) or len(row) != 3:
                    violations.append(f"/nli row {i} must hold three probabilities")
                    continue
                values = [float(v) for v in row]
                if any(not math.isfinite(v) or v < 0 or v > 1 for v in values):
                    violations.append(f"/nli row {i} entries outside [0, 1]")
                if abs(sum(values) - 1.0) > 1e-6:
                    violations.append(f"/nli row {i} sums to {sum(values)}, not 1 +- 1e-6")

    # preconditions: empty batches are client errors, not crashes
    for path, payload in (("/embed", {"texts": []}), ("/nli", {"pairs": []})):
        try:
            resp = http.post(f"{base}{path}", json=payload, timeout=timeout)
        except requests.RequestException as exc:
            violations.append(f"{path} crashed on empty batch: {exc}")
            continue
        if not 400 <= resp.status_code < 500:
            violations.append(f"{path} must reject an empty batch with 4xx, got {resp.status_code}")

    return violations
