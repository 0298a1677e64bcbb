"""Dataset evaluation: map claim evaluations to SUPPORTS / REFUTES /
NOT ENOUGH INFO labels and score them with confusion-matrix metrics.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .errors import IoFailure, LengthMismatch, MalformedRecord
from .linking import LinkerConfig
from .pipeline import STATUS_OK, ClaimEvaluation, EvaluationLimits, evaluate_claim
from .store import GraphStore

SUPPORTS = "SUPPORTS"
REFUTES = "REFUTES"
NOT_ENOUGH_INFO = "NOT ENOUGH INFO"
LABELS = (SUPPORTS, REFUTES, NOT_ENOUGH_INFO)


@dataclass(frozen=True)
class LabeledClaim:
    claim: str
    gold: str
    evidence_hint: tuple[str, ...] = ()

    def __post_init__(self):
        if self.gold not in LABELS:
            raise ValueError(f"gold label {self.gold!r} not in {LABELS}")


@dataclass(frozen=True)
class LabelMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class Metrics:
    per_label: dict[str, LabelMetrics]
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    accuracy: float
    confusion: list[list[int]]
    total: int
    zero_division_flags: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "per_label": {
                label: {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for label, m in self.per_label.items()
            },
            "weighted": {
                "precision": self.weighted_precision,
                "recall": self.weighted_recall,
                "f1": self.weighted_f1,
            },
            "accuracy": self.accuracy,
            "confusion": self.confusion,
            "labels": list(LABELS),
            "total": self.total,
            "zero_division_flags": self.zero_division_flags,
        }


def map_label(evaluation: ClaimEvaluation) -> str:
    """Project an evaluation onto the three dataset labels.

    Any non-ok status means the engine could not decide: NOT ENOUGH INFO.
    Otherwise the verdict argmax decides, with exact ties resolved toward
    NOT ENOUGH INFO.
    """
    if evaluation.status != STATUS_OK or evaluation.verdict is None:
        return NOT_ENOUGH_INFO
    winner = evaluation.verdict.argmax()
    if winner == "e":
        return SUPPORTS
    if winner == "c":
        return REFUTES
    return NOT_ENOUGH_INFO


def confusion_matrix(gold: list[str], predicted: list[str]) -> list[list[int]]:
    index = {label: i for i, label in enumerate(LABELS)}
    matrix = [[0] * len(LABELS) for _ in LABELS]
    for g, p in zip(gold, predicted):
        matrix[index[g]][index[p]] += 1
    return matrix


def metrics_from_confusion(matrix: list[list[int]]) -> Metrics:
    total = sum(sum(row) for row in matrix)
    flags: list[str] = []
    per_label: dict[str, LabelMetrics] = {}
    for i, label in enumerate(LABELS):
        tp = matrix[i][i]
        support = sum(matrix[i])
        predicted = sum(row[i] for row in matrix)
        if predicted == 0:
            precision = 0.0
            flags.append(f"precision undefined for {label} (never predicted)")
        else:
            precision = tp / predicted
        if support == 0:
            recall = 0.0
            flags.append(f"recall undefined for {label} (zero support)")
        else:
            recall = tp / support
        if precision + recall == 0:
            f1 = 0.0
            if predicted != 0 and support != 0:
                flags.append(f"f1 zero for {label}")
        else:
            f1 = 2 * precision * recall / (precision + recall)
        per_label[label] = LabelMetrics(precision=precision, recall=recall, f1=f1, support=support)

    supports = [per_label[label].support for label in LABELS]
    weight_total = sum(supports)

    def weighted(attr: str) -> float:
        if weight_total == 0:
            return 0.0
        return (
            sum(getattr(per_label[label], attr) * per_label[label].support for label in LABELS)
            / weight_total
        )

    accuracy = (sum(matrix[i][i] for i in range(len(LABELS))) / total) if total else 0.0
    return Metrics(
        per_label=per_label,
        weighted_precision=weighted("precision"),
        weighted_recall=weighted("recall"),
        weighted_f1=weighted("f1"),
        accuracy=accuracy,
        confusion=matrix,
        total=total,
        zero_division_flags=flags,
    )


def score_dataset(gold: list[LabeledClaim] | list[str], predicted: list[str]) -> Metrics:
    """Confusion-matrix metrics for predictions against gold labels."""
    gold_labels = [g.gold if isinstance(g, LabeledClaim) else g for g in gold]
    if len(gold_labels) != len(predicted):
        raise LengthMismatch(f"{len(gold_labels)} gold labels vs {len(predicted)} predictions")
    for label in (*gold_labels, *predicted):
        if label not in LABELS:
            raise ValueError(f"label {label!r} not in {LABELS}")
    return metrics_from_confusion(confusion_matrix(gold_labels, predicted))


def load_dataset(path: str | Path) -> list[LabeledClaim]:
    """One JSON object per line with fields claim, gold, evidence_hint."""
    out: list[LabeledClaim] = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"invalid JSON: {exc.msg}", line_no) from exc
        claim = obj.get("claim")
        gold = obj.get("gold")
        if not isinstance(claim, str) or not claim.strip():
            raise MalformedRecord("missing or empty 'claim'", line_no)
        if gold not in LABELS:
            raise MalformedRecord(f"gold label {gold!r} not in {LABELS}", line_no)
        out.append(
            LabeledClaim(claim=claim, gold=gold, evidence_hint=tuple(obj.get("evidence_hint") or ()))
        )
    return out


@dataclass
class EvalRunResult:
    metrics: Metrics
    report: dict


def run_eval(
    dataset_path: str | Path,
    store: GraphStore,
    linker,
    sts_provider,
    nli_provider,
    linker_cfg: LinkerConfig = LinkerConfig(),
    limits: EvaluationLimits = EvaluationLimits(),
    workers: int = 1,
) -> EvalRunResult:
    """Evaluate every dataset claim through the pipeline and score the labels.

    The per-claim report keeps the evaluation status so 'not enough info
    because nothing linked' stays distinguishable from a neutral verdict.
    Metric accumulation is a pure function of the (gold, predicted) pairs,
    so results are independent of evaluation order.
    """
    dataset = load_dataset(dataset_path)

    def evaluate(item: LabeledClaim) -> ClaimEvaluation:
        return evaluate_claim(
            item.claim,
            store,
            linker,
            sts_provider,
            nli_provider,
            linker_cfg=linker_cfg,
            limits=limits,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            evaluations = list(pool.map(evaluate, dataset))
    else:
        evaluations = [evaluate(item) for item in dataset]

    predicted = [map_label(ev) for ev in evaluations]
    metrics = score_dataset(dataset, predicted)

    claims_report = []
    for item, ev, label in zip(dataset, evaluations, predicted):
        claims_report.append(
            {
                "claim": item.claim,
                "gold": item.gold,
                "predicted": label,
                "status": ev.status,
                "sections": list(ev.best.sections) if ev.best else [],
                "sts": ev.sts,
                "verdict": ev.verdict.as_dict() if ev.verdict else None,
            }
        )
    report = {"claims": claims_report, "summary": metrics.as_dict()}
    return EvalRunResult(metrics=metrics, report=report)
