"""Benchmark suite: binary classification scores, run averaging, reasoning
accuracy via an LLM judge, and human-evaluation import.

Conventions, fixed here and rendered at three decimals everywhere:
precision is 1.0 when tp+fp = 0, recall is 1.0 when tp+fn = 0, f1 is 0.0
when precision+recall = 0. evaluation_failed images count toward the
accuracy denominator but never as a correct prediction.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import llm
from .dataset import DatasetManifest, SchemaError
from .errors import LogicodeError
from .execution import RunRecord
from .prompt import build_judge_prompt
from .reports import PREDICTED_ABNORMAL, PREDICTED_NORMAL


class MissingGroundTruth(LogicodeError):
    """A scored image has no labeled record in the manifest."""


class EmptyRuns(LogicodeError):
    """average_runs needs at least one run."""


class CategoryMismatch(LogicodeError):
    """Runs from different categories cannot be averaged together."""


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0
    failed: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn + self.failed

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
            "failed": self.failed,
        }


def metrics_from_counts(counts: ConfusionCounts) -> dict:
    total = counts.total
    accuracy = (counts.tp + counts.tn) / total if total else 1.0
    pred_pos = counts.tp + counts.fp
    precision = counts.tp / pred_pos if pred_pos else 1.0
    actual_pos = counts.tp + counts.fn
    recall = counts.tp / actual_pos if actual_pos else 1.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return {"accuracy": accuracy, "precision": precision, "recall": recall, "f1": f1}


def fmt3(value: float) -> str:
    return f"{value:.3f}"


def render_metrics(metrics: dict) -> dict:
    return {k: fmt3(v) for k, v in metrics.items()}


@dataclass(frozen=True)
class BinaryScore:
    category: str
    counts: ConfusionCounts
    metrics: dict

    def to_dict(self) -> dict:
        return {
            "category": self.category,
            "counts": self.counts.to_dict(),
            "metrics": self.metrics,
            "rendered": render_metrics(self.metrics),
        }


def score_binary(run: RunRecord, manifest: DatasetManifest) -> BinaryScore:
    """Confusion counts and metrics for one run; positive class = abnormal."""
    labels = {rec.image_id: rec.label for rec in manifest.records}
    categories = {rec.category for rec in manifest.records}
    category = categories.pop() if len(categories) == 1 else "mixed"
    tp = fp = tn = fn = failed = 0
    for report in run.reports:
        if report.image_id not in labels:
            raise MissingGroundTruth(f"no ground truth for image {report.image_id!r}")
        truth = labels[report.image_id]
        if report.predicted == PREDICTED_ABNORMAL:
            if truth == "abnormal":
                tp += 1
            else:
                fp += 1
        elif report.predicted == PREDICTED_NORMAL:
            if truth == "normal":
                tn += 1
            else:
                fn += 1
        else:
            failed += 1
    counts = ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn, failed=failed)
    return BinaryScore(category=category, counts=counts, metrics=metrics_from_counts(counts))


@dataclass(frozen=True)
class MetricsReport:
    """Per-run metrics and their arithmetic means for one category."""

    category: str
    n_runs: int
    per_run: tuple[dict, ...]
    averages: dict

    def to_dict(self) -> dict:
        return {
            "category": self.category,
            "n_runs": self.n_runs,
            "per_run": list(self.per_run),
            "averages": self.averages,
            "rendered": render_metrics(self.averages),
        }


def average_runs(scores: Sequence[BinaryScore]) -> MetricsReport:
    if not scores:
        raise EmptyRuns("no runs to average")
    categories = {s.category for s in scores}
    if len(categories) != 1:
        raise CategoryMismatch(f"cannot average across categories {sorted(categories)}")
    keys = ("accuracy", "precision", "recall", "f1")
    averages = {k: sum(s.metrics[k] for s in scores) / len(scores) for k in keys}
    return MetricsReport(
        category=categories.pop(),
        n_runs=len(scores),
        per_run=tuple(dict(s.metrics) for s in scores),
        averages=averages,
    )


VERDICT_MATCH = "match"
VERDICT_MISMATCH = "mismatch"
VERDICT_UNPARSEABLE = "unparseable"


@dataclass(frozen=True)
class JudgeVerdict:
    image_id: str
    predicted_reasons: tuple[str, ...]
    ground_truth_reasons: tuple[str, ...]
    verdict: str
    raw_response: str

    def to_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "predicted_reasons": list(self.predicted_reasons),
            "ground_truth_reasons": list(self.ground_truth_reasons),
            "verdict": self.verdict,
            "raw_response": self.raw_response,
        }


@dataclass(frozen=True)
class JudgeReport:
    verdicts: tuple[JudgeVerdict, ...]
    matches: int
    mismatches: int
    unparseable: int
    accuracy: float | None

    def to_dict(self) -> dict:
        return {
            "verdicts": [v.to_dict() for v in self.verdicts],
            "matches": self.matches,
            "mismatches": self.mismatches,
            "unparseable": self.unparseable,
            "accuracy": self.accuracy,
            "rendered": fmt3(self.accuracy) if self.accuracy is not None else "n/a",
        }


def parse_judge_verdict(response_text: str) -> str:
    """First line decides, nothing else: MATCH, MISMATCH, or unparseable."""
    first = response_text.splitlines()[0].strip() if response_text else ""
    if first == "MATCH":
        return VERDICT_MATCH
    if first == "MISMATCH":
        return VERDICT_MISMATCH
    return VERDICT_UNPARSEABLE


def judge_reasoning(
    run: RunRecord,
    manifest: DatasetManifest,
    backend,
    template_id: str = "judge_v1",
    model: str = "gpt-4",
    temperature: float = 0.0,
) -> JudgeReport:
    """Grade predicted reasons on true-positive images only.

    Accuracy = match / (match + mismatch); unparseable responses are
    reported separately and excluded from the denominator.
    """
    records = {rec.image_id: rec for rec in manifest.records}
    verdicts: list[JudgeVerdict] = []
    for report in run.reports:
        record = records.get(report.image_id)
        if record is None:
            raise MissingGroundTruth(f"no ground truth for image {report.image_id!r}")
        if record.label != "abnormal" or report.predicted != PREDICTED_ABNORMAL:
            continue
        prompt = build_judge_prompt(report.reasons, record.reasons, template_id)
        request = llm.user_request(prompt, model, temperature)
        response = llm.complete(backend, request)
        verdicts.append(
            JudgeVerdict(
                image_id=report.image_id,
                predicted_reasons=report.reasons,
                ground_truth_reasons=record.reasons,
                verdict=parse_judge_verdict(response.content),
                raw_response=response.content,
            )
        )
    matches = sum(1 for v in verdicts if v.verdict == VERDICT_MATCH)
    mismatches = sum(1 for v in verdicts if v.verdict == VERDICT_MISMATCH)
    unparseable = sum(1 for v in verdicts if v.verdict == VERDICT_UNPARSEABLE)
    denominator = matches + mismatches
    return JudgeReport(
        verdicts=tuple(verdicts),
        matches=matches,
        mismatches=mismatches,
        unparseable=unparseable,
        accuracy=matches / denominator if denominator else None,
    )


@dataclass(frozen=True)
class HumanEvalReport:
    per_rater: dict
    accuracy: float
    n_rows: int

    def to_dict(self) -> dict:
        return {
            "per_rater": {k: v for k, v in sorted(self.per_rater.items())},
            "accuracy": self.accuracy,
            "rendered": fmt3(self.accuracy),
            "n_rows": self.n_rows,
        }


def import_human_eval(csv_path: str | Path, known_ids: Sequence[str]) -> HumanEvalReport:
    """Average the per-rater accuracies from a human-evaluation CSV.

    Columns: image_id, rater_id, verdict in {match, mismatch}. No majority
    vote: each rater scores independently and their accuracies are averaged.
    """
    known = set(known_ids)
    rows_by_rater: dict[str, list[str]] = {}
    seen: set[tuple[str, str]] = set()
    n_rows = 0
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = set(reader.fieldnames or ())
        required = {"image_id", "rater_id", "verdict"}
        if not required <= fields:
            raise SchemaError(f"{csv_path}: CSV needs columns {sorted(required)}")
        for lineno, row in enumerate(reader, start=2):
            image_id = row["image_id"]
            rater_id = row["rater_id"]
            verdict = row["verdict"]
            if verdict not in (VERDICT_MATCH, VERDICT_MISMATCH):
                raise SchemaError(f"{csv_path}:{lineno}: bad verdict {verdict!r}")
            if image_id not in known:
                raise SchemaError(f"{csv_path}:{lineno}: unknown image_id {image_id!r}")
            key = (image_id, rater_id)
            if key in seen:
                raise SchemaError(
                    f"{csv_path}:{lineno}: duplicate rating for {image_id} by {rater_id}"
                )
            seen.add(key)
            rows_by_rater.setdefault(rater_id, []).append(verdict)
            n_rows += 1
    if not rows_by_rater:
        raise SchemaError(f"{csv_path}: no ratings")
    per_rater = {
        rater: sum(1 for v in verdicts if v == VERDICT_MATCH) / len(verdicts)
        for rater, verdicts in rows_by_rater.items()
    }
    accuracy = sum(per_rater.values()) / len(per_rater)
    return HumanEvalReport(per_rater=per_rater, accuracy=accuracy, n_rows=n_rows)


def metrics_markdown(reports: Sequence[MetricsReport]) -> str:
    """Render the binary-classification table with an average row."""
    lines = [
        "| Category | Accuracy | Precision | Recall | F1 Score |",
        "| --- | --- | --- | --- | --- |",
    ]
    keys = ("accuracy", "precision", "recall", "f1")
    for report in reports:
        r = render_metrics(report.averages)
        lines.append(
            f"| {report.category} | {r['accuracy']} | {r['precision']} "
            f"| {r['recall']} | {r['f1']} |"
        )
    if len(reports) > 1:
        avg = {k: sum(rep.averages[k] for rep in reports) / len(reports) for k in keys}
        r = render_metrics(avg)
        lines.append(
            f"| Average | {r['accuracy']} | {r['precision']} | {r['recall']} | {r['f1']} |"
        )
    return "\n".join(lines)


def rates_markdown(rates_by_category: dict) -> str:
    """Render generation outcome rates per category."""
    lines = [
        "| Category | Success | Error | Missing |",
        "| --- | --- | --- | --- |",
    ]
    for category, rates in sorted(rates_by_category.items()):
        lines.append(
            f"| {category} | {fmt3(rates['success'])} | {fmt3(rates['error'])} "
            f"| {fmt3(rates['missing'])} |"
        )
    return "\n".join(lines)


def save_json(doc: dict, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
